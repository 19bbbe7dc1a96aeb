"""Command-line front end.

Subcommands: ``codes``, ``state``, ``fidelity``, ``sweep``, ``ideal``,
``approx``, ``tmss``, ``qnd``.  Results go to stdout (or ``--out``) as CSV
or JSON.  Exit status is 0 on success, 1 when ``approx`` finds nothing and 2
on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from .errors import GkpError, NotFound
from .fidelity import Scenario, evaluate
from .ideal import (
    all_outputs,
    check_perfect_transmission,
    logical_op_map,
    verify_logical_map,
)
from .lattice import (
    RationalEfficiency,
    enumerate_matchings,
    factorizations,
    match_codes,
    peak_efficiencies,
    qnd_matching,
    rational_approx,
    sweep_step,
    tmss_matching,
)
from .states import delta_from_nbar, finite_gkp, nbar_from_delta

SIG_DIGITS = 12


class FlagError(ValueError):
    def __init__(self, flag: str, msg: str):
        super().__init__(f"{flag}: {msg}")
        self.flag = flag


def _sig(x):
    return None if x is None else float(f"{x:.{SIG_DIGITS}g}")


# ---------------------------------------------------------------- parsing


def parse_eta(text: str):
    """``"m/n"`` -> :class:`RationalEfficiency`; decimal -> float."""
    text = text.strip()
    try:
        if "/" in text:
            return RationalEfficiency.parse(text)
        val = float(text)
    except (GkpError, ValueError) as exc:
        raise FlagError("--eta", str(exc)) from exc
    if not 0 < val < 1:
        raise FlagError("--eta", f"{val} outside (0, 1)")
    return val


def parse_eta_grid(text: str, nbar_max: float | None = None) -> list:
    """Single value, comma list, or ``a:b:step`` (``step`` may be ``auto``)."""
    if ":" not in text:
        return [parse_eta(t) for t in text.split(",")]
    parts = text.split(":")
    if len(parts) != 3:
        raise FlagError("--eta", "range must be a:b:step")
    lo, hi = float(parse_eta(parts[0])), float(parse_eta(parts[1]))
    if lo > hi:
        raise FlagError("--eta", "range start exceeds end")
    if parts[2] == "auto":
        if nbar_max is None:
            raise FlagError("--eta", "auto step needs --nbar")
        out, e = [], lo
        while e <= hi + 1e-12:
            out.append(round(e, 12))
            e += sweep_step(e, nbar_max)
        return out
    try:
        step = float(parts[2])
    except ValueError as exc:
        raise FlagError("--eta", f"bad step {parts[2]!r}") from exc
    if step <= 0:
        raise FlagError("--eta", "step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def parse_ints(text: str, flag: str, count: int | None = None) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise FlagError(flag, f"expected integers, got {text!r}") from exc
    if count is not None and len(vals) != count:
        raise FlagError(flag, f"expected {count} comma-separated integers")
    return vals


def parse_code(text: str) -> tuple[int, int, int]:
    d1, a, b = parse_ints(text, "--code", 3)
    if d1 < 1 or a < 1 or b < 1:
        raise FlagError("--code", "entries must be positive")
    if math.gcd(a, b) != 1:
        raise FlagError("--code", f"gcd({a}, {b}) != 1")
    return d1, a, b


def parse_floats(text: str, flag: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise FlagError(flag, "range must be a:b:step")
        try:
            lo, hi, step = map(float, parts)
        except ValueError as exc:
            raise FlagError(flag, str(exc)) from exc
        if step <= 0 or lo > hi:
            raise FlagError(flag, "bad range")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 12) for i in range(count)]
    try:
        return [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise FlagError(flag, f"expected numbers, got {text!r}") from exc


def envelopes(args) -> tuple[float, float | None]:
    """``(delta1, delta2)`` from ``--delta`` (preferred) or ``--nbar``; ``None`` is vacuum."""
    if args.delta:
        vals = parse_floats(args.delta, "--delta")
        if len(vals) > 2 or not all(0 < v < 1 for v in vals):
            raise FlagError("--delta", "expected one or two values in (0, 1)")
        return vals[0], vals[-1]
    vals = parse_floats(args.nbar, "--nbar")
    if len(vals) > 2 or vals[0] <= 0 or vals[-1] < 0:
        raise FlagError("--nbar", "expected x[,y] with x > 0 and y >= 0")
    return delta_from_nbar(vals[0]), (delta_from_nbar(vals[-1]) if vals[-1] > 0 else None)


# ---------------------------------------------------------------- records


def generate_code_list(count: int) -> list[tuple[int, int, int]]:
    """First ``count`` labels ``(d1, a, b)``: ``d1 >= 2``, ``gcd(a, b) = 1``,
    ordered by ``d1 + a + b`` and then lexicographically."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[tuple[int, int, int]] = []
    total = 4
    while len(out) < count:
        for d1 in range(2, total - 1):
            for a in range(1, total - d1):
                b = total - d1 - a
                if math.gcd(a, b) == 1:
                    out.append((d1, a, b))
        total += 1
    return out[:count]


def code_label(code) -> str:
    return ",".join(str(c) for c in code)


@dataclass(frozen=True)
class SweepRecord:
    """One evaluated (eta, code, envelope) point; floats kept at 12 significant digits."""

    eta: float
    code: str
    nbar1: float
    nbar2: float
    delta1: float
    delta2: float | None
    fe: float
    fe_comp: float
    coherent_info: float
    tail_mass: float
    wall_time: float
    floor_sensitivity: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                object.__setattr__(self, f.name, _sig(v))

    def to_row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append("" if v is None else v if isinstance(v, str) else f"{v:.{SIG_DIGITS}g}")
        return out

    @classmethod
    def from_row(cls, row: dict) -> "SweepRecord":
        kw = {}
        for f in fields(cls):
            v = row[f.name]
            kw[f.name] = v if f.name == "code" else (None if v == "" else float(v))
        return cls(**kw)

    def deterministic(self) -> tuple:
        """Record without its timing, for reproducibility comparisons."""
        d = asdict(self)
        d.pop("wall_time")
        return tuple(d.values())


HEADER = [f.name for f in fields(SweepRecord)]


def emit_csv(records, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(HEADER)
    for r in records:
        w.writerow(r.to_row())


def parse_csv(text: str) -> list[SweepRecord]:
    return [SweepRecord.from_row(row) for row in csv.DictReader(io.StringIO(text))]


@dataclass(frozen=True)
class Task:
    eta: object
    code: tuple[int, int, int]
    delta1: float
    delta2: float | None
    method: str | None
    cutoff: int | None
    floor: float
    orthogonalize: str


def run_task(task: Task) -> SweepRecord:
    t0 = time.perf_counter()
    d1, a, b = task.code
    s = Scenario(eta=task.eta, d1=d1, r1=1.0, delta1=task.delta1, d2=1, r2=a / b,
                 delta2=task.delta2, method=task.method, cutoff=task.cutoff,
                 orthogonalize=task.orthogonalize, floor=task.floor)
    rep = evaluate(s)
    return SweepRecord(
        eta=float(s.eta_value), code=code_label(task.code),
        nbar1=nbar_from_delta(task.delta1),
        nbar2=0.0 if task.delta2 is None else nbar_from_delta(task.delta2),
        delta1=task.delta1, delta2=task.delta2,
        fe=rep.fe, fe_comp=rep.fe_comp, coherent_info=rep.coherent_info,
        tail_mass=rep.tail_mass, wall_time=time.perf_counter() - t0,
        floor_sensitivity=rep.floor_sensitivity,
    )


def summarize(records) -> list[dict]:
    """Best code per (nbar1, eta), in first-seen order."""
    best: dict[tuple, SweepRecord] = {}
    for r in records:
        key = (r.nbar1, r.eta)
        if key not in best or r.fe > best[key].fe:
            best[key] = r
    return [{"eta": r.eta, "nbar1": r.nbar1, "nbar2": r.nbar2, "code": r.code, "fe": r.fe}
            for r in best.values()]


def run_tasks(tasks, jobs: int):
    """Yield records in input order; ``jobs > 1`` uses worker processes."""
    if jobs <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield run_task(t)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(run_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs)))


# ---------------------------------------------------------------- commands


def _dump(obj, args) -> None:
    text = json.dumps(obj, indent=2, default=str)
    _write(text + "\n", args)


def _write(text: str, args) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_records(records, args) -> None:
    if args.format == "json":
        _dump({"records": [asdict(r) for r in records], "summary": summarize(records)}, args)
    else:
        buf = io.StringIO()
        emit_csv(records, buf)
        _write(buf.getvalue(), args)


def cmd_codes(args) -> int:
    if args.count:
        _dump([list(c) for c in generate_code_list(args.count)], args)
        return 0
    if args.peaks:
        a_max, b_max = parse_ints(args.peaks, "--peaks", 2)
        _dump([str(e) for e in peak_efficiencies(a_max, b_max)], args)
        return 0
    if not args.eta:
        raise FlagError("--eta", "required unless --count or --peaks is given")
    eta = parse_eta(args.eta)
    if not isinstance(eta, RationalEfficiency):
        raise FlagError("--eta", "matching needs an exact ratio m/n")
    out = []
    for d1, d2, facs in enumerate_matchings(eta, args.max_d1, args.max_d2):
        for f in facs:
            out.append(match_codes(eta, d1, d2, *f).to_dict())
    _dump(out, args)
    return 0


def cmd_state(args) -> int:
    delta, _ = envelopes(args)
    st = finite_gkp(args.d, args.r, args.mu, delta, args.cutoff, args.space)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n, a in enumerate(st.amplitudes):
            w.writerow([n, f"{a.real:.{SIG_DIGITS}g}", f"{a.imag:.{SIG_DIGITS}g}"])
        _write(buf.getvalue(), args)
    else:
        _dump(st.to_dict(), args)
    return 0


def _task(args, eta, code, delta1, delta2) -> Task:
    return Task(eta, code, delta1, delta2, args.method, args.cutoff, args.floor,
                args.orthogonalize)


def cmd_fidelity(args) -> int:
    eta = parse_eta(args.eta)
    code = parse_code(args.code)
    d1, d2 = envelopes(args)
    _emit_records([run_task(_task(args, eta, code, d1, d2))], args)
    return 0


def cmd_sweep(args) -> int:
    if args.delta:
        d1 = parse_floats(args.delta, "--delta")
        pairs = [(d, d) for d in d1]
    else:
        nbars = parse_floats(args.nbar, "--nbar")
        if min(nbars) <= 0:
            raise FlagError("--nbar", "values must be positive")
        env = None if args.nbar_env is None else float(args.nbar_env)
        if env is not None and env < 0:
            raise FlagError("--nbar-env", "must be >= 0")
        pairs = [(delta_from_nbar(n),
                  delta_from_nbar(n) if env is None else (delta_from_nbar(env) if env > 0 else None))
                 for n in nbars]
    nbar_max = max(nbar_from_delta(p[0]) for p in pairs)
    etas = parse_eta_grid(args.eta, nbar_max)
    if args.code:
        codes = [parse_code(c) for c in args.code.split(";")]
    else:
        if args.codes < 1:
            raise FlagError("--codes", "must be >= 1")
        codes = generate_code_list(args.codes)
    tasks = [_task(args, e, c, p[0], p[1]) for p in pairs for e in etas for c in codes]
    jobs = args.jobs or os.cpu_count() or 1

    if args.format == "json":
        _emit_records(list(run_tasks(tasks, jobs)), args)
        return 0
    out = open(args.out, "w") if args.out else sys.stdout
    records = []
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(HEADER)
        for rec in run_tasks(tasks, jobs):
            w.writerow(rec.to_row())
            out.flush()
            records.append(rec)
    finally:
        if args.out:
            out.close()
    summary = json.dumps(summarize(records), indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary + "\n")
    elif args.out:
        with open(os.path.splitext(args.out)[0] + ".summary.json", "w") as fh:
            fh.write(summary + "\n")
    else:
        sys.stderr.write(summary + "\n")
    return 0


def default_dims(eta: RationalEfficiency) -> tuple[int, int]:
    """Most balanced ``d1 >= d2`` with ``d1 d2 = n - m``."""
    k = eta.n - eta.m
    d2 = max(d for d in range(1, math.isqrt(k) + 1) if k % d == 0)
    return k // d2, d2


def cmd_ideal(args) -> int:
    eta = parse_eta(args.eta)
    if not isinstance(eta, RationalEfficiency):
        raise FlagError("--eta", "ideal outputs need an exact ratio m/n")
    if args.dims:
        d1, d2 = parse_ints(args.dims, "--dims", 2)
    else:
        d1, d2 = default_dims(eta)
    if (eta.n - eta.m) % (d1 * d2):
        raise FlagError("--dims", f"d1*d2 must divide n - m = {eta.n - eta.m}")
    if args.factors:
        facs = parse_ints(args.factors, "--factors", 4)
    else:
        facs = factorizations(eta.m, (eta.n - eta.m) // (d1 * d2))[0]
    try:
        pair = match_codes(eta, d1, d2, *facs)
    except GkpError as exc:
        raise FlagError("--factors", str(exc)) from exc
    report = check_perfect_transmission(pair)
    _dump({
        "matching": pair.to_dict(),
        "outputs": [st.to_dict() for st in all_outputs(pair).values()],
        "report": report.to_dict(),
        "logical_map": logical_op_map(pair).to_dict(),
        "logical_map_mismatches": verify_logical_map(pair),
    }, args)
    return 0


def cmd_approx(args) -> int:
    try:
        eta = float(args.eta)
    except ValueError as exc:
        raise FlagError("--eta", str(exc)) from exc
    if not 0 < eta < 1:
        raise FlagError("--eta", "must lie in (0, 1)")
    if args.d < 1:
        raise FlagError("--d", "must be >= 1")
    try:
        m, n = rational_approx(eta, args.d, args.n_max)
    except NotFound as exc:
        _dump({"eta": eta, "d": args.d, "n_max": args.n_max, "found": False,
               "reason": str(exc)}, args)
        return 1
    _dump({"eta": eta, "d": args.d, "n_max": args.n_max, "found": True, "m": m, "n": n,
           "error": abs(eta - m / n), "bound": args.d**2 / (4 * n * n)}, args)
    return 0


def cmd_tmss(args) -> int:
    m, k = args.m, args.k
    d1, d2 = parse_ints(args.dims, "--dims", 2)
    facs = parse_ints(args.factors, "--factors", 4)
    sq = tmss_matching(m, k, d1, d2, *facs, swapped=args.swapped)
    _dump({"gain": str(sq.gain), "swapped": sq.swapped,
           "code1": sq.code1.to_dict(), "code2": sq.code2.to_dict()}, args)
    return 0


def cmd_qnd(args) -> int:
    try:
        eta = float(Fraction(args.eta))
    except ValueError as exc:
        raise FlagError("--eta", str(exc)) from exc
    c1, c2 = qnd_matching(eta, args.d)
    _dump({"eta": eta, "d": args.d, "code1": c1.to_dict(), "code2": c2.to_dict()}, args)
    return 0


# ---------------------------------------------------------------- argparse


def _common(p: argparse.ArgumentParser, eta_required: bool = False) -> None:
    p.add_argument("--eta", required=eta_required, help="m/n, decimal, or a:b:step")
    p.add_argument("--nbar", default="3", help="mean photon number x[,y]")
    p.add_argument("--delta", help="envelope x[,y]; overrides --nbar")
    p.add_argument("--method", choices=["summation", "dense"])
    p.add_argument("--cutoff", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--floor", type=float, default=1e-12)
    p.add_argument("--orthogonalize", choices=["input", "output"], default="input")
    p.add_argument("--jobs", type=int)
    p.add_argument("--config", help="JSON file of flag defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkp-transduction",
                                     description="GKP transduction through a beam splitter")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codes", help="matched codes, code list or peak efficiencies")
    _common(p)
    p.add_argument("--max-d1", type=int, default=4)
    p.add_argument("--max-d2", type=int, default=4)
    p.add_argument("--count", type=int, help="print the first N code labels")
    p.add_argument("--peaks", help="a_max,b_max: print peak efficiencies")
    p.set_defaults(func=cmd_codes, format="json")

    p = sub.add_parser("state", help="finite-energy GKP state amplitudes")
    _common(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--mu", type=int, default=0)
    p.add_argument("--space", choices=["q", "p"])
    p.set_defaults(func=cmd_state, format="json")

    p = sub.add_parser("fidelity", help="figures of merit at one point")
    _common(p, eta_required=True)
    p.add_argument("--code", default="2,1,1", help="d1,a,b")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("sweep", help="eta x nbar x code grid")
    _common(p, eta_required=True)
    p.add_argument("--code", help="explicit labels d1,a,b separated by ';'")
    p.add_argument("--codes", type=int, default=1, help="use the first N generated codes")
    p.add_argument("--nbar-env", help="fixed environment nbar (0 = vacuum)")
    p.add_argument("--summary", help="path for the JSON argmax summary")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ideal", help="exact ideal-code output tables")
    _common(p, eta_required=True)
    p.add_argument("--dims", help="d1,d2 (default: most balanced with d1 d2 = n - m)")
    p.add_argument("--factors", help="m1,m2,k1,k2")
    p.set_defaults(func=cmd_ideal, format="json")

    p = sub.add_parser("approx", help="rational efficiency near a target")
    _common(p, eta_required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n-max", type=int, default=500)
    p.set_defaults(func=cmd_approx, format="json")

    p = sub.add_parser("tmss", help="two-mode squeezer matching")
    _common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dims", default="1,1", help="d1,d2")
    p.add_argument("--factors", required=True, help="m1,m2,k1,k2")
    p.add_argument("--swapped", action="store_true")
    p.set_defaults(func=cmd_tmss, format="json")

    p = sub.add_parser("qnd", help="QND gate matching")
    _common(p, eta_required=True)
    p.add_argument("--d", type=int, default=2)
    p.set_defaults(func=cmd_qnd, format="json")
    return parser


def _config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    """Parse ``argv``; keys of a ``--config`` JSON file become defaults that flags override."""
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    if path is None or not argv or argv[0].startswith("-"):
        return parser.parse_args(argv)
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FlagError("--config", str(exc)) from exc
    choices = next(a for a in parser._actions
                   if isinstance(a, argparse._SubParsersAction)).choices
    sub = choices.get(argv[0])
    if sub is None:
        return parser.parse_args(argv)
    known = {a.dest for a in sub._actions}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = set(cfg) - known
    if unknown:
        raise FlagError("--config", f"unknown keys {sorted(unknown)}")
    sub.set_defaults(**{k: str(v) if k in ("eta", "nbar", "delta", "code") else v
                        for k, v in cfg.items()})
    for action in sub._actions:
        if action.dest in cfg:
            action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except FlagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GkpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
