"""Exact model of ideal-code beam-splitter outputs.

For a matched pair, ``U |mu1>|mu2>`` is a uniform superposition of ``n``
product kets of the output codes.  Ket labels, phases (as fractions of a
full turn) and Schmidt weights are all integers or :class:`Fraction`, so the
structural claims (orthogonality, decoupled marginals, gauge entanglement,
logical-operator mapping) are checked as identities.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import NoSolution
from .lattice import MatchedPair
from .states import gkp_raw


class Term(NamedTuple):
    mu3: int
    mu4: int
    phase: Fraction  # turns, in [0, 1)


@dataclass(frozen=True)
class IdealOutputState:
    """``U |mu1, mu2>`` as ``n`` equal-weight product kets (amplitude ``e^{2 pi i phase}/sqrt n``)."""

    matched: MatchedPair
    mu1: int
    mu2: int
    terms: tuple[Term, ...]

    @property
    def weight(self) -> Fraction:
        return Fraction(1, len(self.terms))

    def canonical(self) -> tuple[Term, ...]:
        return tuple(sorted(self.terms))

    def labels(self) -> set[tuple[int, int]]:
        return {(t.mu3, t.mu4) for t in self.terms}

    def to_dict(self) -> dict:
        return {
            "mu1": self.mu1,
            "mu2": self.mu2,
            "amplitude": f"1/sqrt({len(self.terms)})",
            "terms": [{"mu3": t.mu3, "mu4": t.mu4, "phase": str(t.phase)}
                      for t in self.canonical()],
        }


def ideal_output(matched: MatchedPair, mu1: int, mu2: int) -> IdealOutputState:
    """Kets ``(mu1 alpha1 n + j k2 d2 d1 mod d3, mu2 alpha2 n + j m1 d2 mod d4)``, ``j < n``."""
    p = matched
    if not (0 <= mu1 < p.d1 and 0 <= mu2 < p.d2):
        raise ValueError(f"logical indices ({mu1}, {mu2}) out of range")
    n = p.n
    terms = tuple(
        Term((mu1 * p.alpha1 * n + j * p.k2 * p.d2 * p.d1) % p.d3,
             (mu2 * p.alpha2 * n + j * p.m1 * p.d2) % p.d4,
             Fraction(0))
        for j in range(n)
    )
    return IdealOutputState(p, mu1, mu2, terms)


def all_outputs(matched: MatchedPair) -> dict[tuple[int, int], IdealOutputState]:
    return {(a, b): ideal_output(matched, a, b)
            for a in range(matched.d1) for b in range(matched.d2)}


ZERO = Fraction(0)


def _phase_sum(items) -> tuple:
    """Canonical form of ``sum_k c_k e^{2 pi i phi_k}`` from ``(phi, c)`` pairs, ``c`` integer.

    Amplitude products of one matching share the factor ``1/n``, so entries
    are kept as integer multiplicities of it.
    """
    acc = defaultdict(int)
    for phi, c in items:
        acc[phi % 1 if phi else ZERO] += c
    return tuple(sorted((phi, c) for phi, c in acc.items() if c))


def _dphase(a: Fraction, b: Fraction) -> Fraction:
    return a - b if (a or b) else ZERO


def inner_product(a: IdealOutputState, b: IdealOutputState) -> tuple:
    """``n <a|b>`` in the canonical phase-sum form; ``()`` means exactly zero."""
    if len(a.terms) != len(b.terms):
        raise ValueError("states from different matchings")
    amp_a = {(t.mu3, t.mu4): t.phase for t in a.terms}
    items = [(_dphase(t.phase, amp_a[(t.mu3, t.mu4)]), 1)
             for t in b.terms if (t.mu3, t.mu4) in amp_a]
    return _phase_sum(items)


def marginal(state: IdealOutputState, which: int) -> dict:
    """``n`` times the reduced density matrix on mode ``which`` (3 or 4), in phase-sum form."""
    keep, drop = (0, 1) if which == 3 else (1, 0)
    dropped = [t[drop] for t in state.terms]
    if len(set(dropped)) == len(dropped):
        # product-orthogonal partners: the marginal is diagonal
        diag = defaultdict(int)
        for t in state.terms:
            diag[t[keep]] += 1
        return {(x, x): ((ZERO, c),) for x, c in diag.items()}
    by_drop = defaultdict(list)
    for t in state.terms:
        by_drop[t[drop]].append(t)
    entries = defaultdict(list)
    for group in by_drop.values():
        for s in group:
            for t in group:
                entries[(s[keep], t[keep])].append((_dphase(s.phase, t.phase), 1))
    return {k: v for k, v in ((k, _phase_sum(v)) for k, v in entries.items()) if v}


def schmidt_weights(state: IdealOutputState) -> list[Fraction] | None:
    """Schmidt weights when the term list is already a Schmidt form (distinct labels per mode)."""
    m3 = [t.mu3 for t in state.terms]
    m4 = [t.mu4 for t in state.terms]
    if len(set(m3)) != len(m3) or len(set(m4)) != len(m4):
        return None
    return [state.weight] * len(state.terms)


def entropy_bits(weights) -> float:
    return float(-sum(float(w) * math.log2(w) for w in weights if w))


def logical_subspace(matched: MatchedPair, mu: int, which: int) -> set[int]:
    """Output labels ``mu3 = mu m2 (mod d1)`` (mode 3) or ``mu4 = mu m1 (mod d2)`` (mode 4)."""
    p = matched
    if which == 3:
        return {x for x in range(p.d3) if (x - mu * p.m2) % p.d1 == 0}
    return {x for x in range(p.d4) if (x - mu * p.m1) % p.d2 == 0}


@dataclass
class TransmissionReport:
    eta: str
    d1: int
    d2: int
    factors: tuple[int, int, int, int]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"eta": self.eta, "d1": self.d1, "d2": self.d2,
                "factors": list(self.factors), "ok": self.ok,
                "violations": self.violations}


def check_perfect_transmission(matched: MatchedPair) -> TransmissionReport:
    """Check orthogonality (a), decoupled uniform marginals (b) and ``log2 n`` entanglement (c)."""
    p = matched
    outs = all_outputs(p)
    bad: list[str] = []

    keys = list(outs)
    all_labels = [lab for st in outs.values() for lab in st.labels()]
    if len(set(all_labels)) != len(all_labels):
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                if inner_product(outs[a], outs[b]):
                    bad.append(f"(a) outputs {a} and {b} overlap")

    uniform = Fraction(1, p.n)
    unit = ((ZERO, 1),)
    marg = {(key, w): marginal(st, w) for key, st in outs.items() for w in (3, 4)}
    for mu2 in range(p.d2):
        ref = marg[((0, mu2), 4)]
        target = {(x, x): unit for x in logical_subspace(p, mu2, 4)}
        for mu1 in range(p.d1):
            m4 = marg[((mu1, mu2), 4)]
            if m4 != ref:
                bad.append(f"(b) mode-4 marginal depends on mu1 (mu1={mu1}, mu2={mu2})")
            if m4 != target:
                bad.append(f"(b) mode-4 marginal of ({mu1}, {mu2}) not uniform on its subspace")
    for mu1 in range(p.d1):
        ref = marg[((mu1, 0), 3)]
        target = {(x, x): unit for x in logical_subspace(p, mu1, 3)}
        for mu2 in range(p.d2):
            m3 = marg[((mu1, mu2), 3)]
            if m3 != ref:
                bad.append(f"(b) mode-3 marginal depends on mu2 (mu1={mu1}, mu2={mu2})")
            if m3 != target:
                bad.append(f"(b) mode-3 marginal of ({mu1}, {mu2}) not uniform on its subspace")

    for key, st in outs.items():
        w = schmidt_weights(st)
        if w is None or len(w) != p.n or any(x != uniform for x in w):
            bad.append(f"(c) output {key} is not maximally entangled over {p.n} levels")

    return TransmissionReport(str(p.eta), p.d1, p.d2, tuple(p.factors), bad)


class PauliWord(NamedTuple):
    """``X3^x3 Z3^z3 X4^x4 Z4^z4`` (Z factors act first)."""

    x3: int = 0
    z3: int = 0
    x4: int = 0
    z4: int = 0


def apply_word(state: IdealOutputState, word: PauliWord) -> tuple[Term, ...]:
    p = state.matched
    out = []
    for t in state.terms:
        phase = (t.phase + Fraction(word.z3 * t.mu3, p.d3) + Fraction(word.z4 * t.mu4, p.d4)) % 1
        out.append(Term((t.mu3 + word.x3) % p.d3, (t.mu4 + word.x4) % p.d4, phase))
    return tuple(sorted(out))


@dataclass
class LogicalOpMap:
    """Images of the input logical operators on the output modes.

    ``two_mode`` holds ``X1', Z1', X2', Z2'``; ``single_mode`` the equivalents
    acting on one output only.  ``scale2`` is the exact squared length ratio of
    each single-mode displacement to the corresponding input displacement.
    """

    two_mode: dict[str, PauliWord]
    single_mode: dict[str, PauliWord]
    scale2: dict[str, Fraction]

    def to_dict(self) -> dict:
        return {
            "two_mode": {k: w._asdict() for k, w in self.two_mode.items()},
            "single_mode": {k: w._asdict() for k, w in self.single_mode.items()},
            "scale2": {k: str(v) for k, v in self.scale2.items()},
        }


def logical_op_map(matched: MatchedPair) -> LogicalOpMap:
    p = matched
    n = p.n
    two = {
        "X1": PauliWord(x3=p.m2, x4=-p.k1 * p.d2),
        "Z1": PauliWord(z3=p.m1, z4=-p.k2 * p.d2),
        "X2": PauliWord(x3=p.k2 * p.d1, x4=p.m1),
        "Z2": PauliWord(z3=p.k1 * p.d1, z4=p.m2),
    }
    single = {
        "X1": PauliWord(x3=p.alpha1 * n),
        "Z1": PauliWord(z3=p.beta1 * n),
        "X2": PauliWord(x4=p.alpha2 * n),
        "Z2": PauliWord(z4=p.beta2 * n),
    }
    s3, s4, s2 = p.scale3, p.scale4, p.scale2
    scale = {
        "X1": p.alpha1**2 * n * s3,
        "Z1": p.beta1**2 * n / s3,
        "X2": p.alpha2**2 * n * s4 / s2,
        "Z2": p.beta2**2 * n * s2 / s4,
    }
    return LogicalOpMap(two, single, scale)


def verify_logical_map(matched: MatchedPair) -> list[str]:
    """Apply every mapped word to every output table; return mismatches (empty when exact)."""
    p = matched
    table = logical_op_map(p)
    outs = all_outputs(p)
    bad = []
    for family, words in (("two-mode", table.two_mode), ("single-mode", table.single_mode)):
        for name, word in words.items():
            for (mu1, mu2), st in outs.items():
                got = apply_word(st, word)
                if name == "X1":
                    want = outs[((mu1 + 1) % p.d1, mu2)].canonical()
                elif name == "X2":
                    want = outs[(mu1, (mu2 + 1) % p.d2)].canonical()
                else:
                    ph = Fraction(mu1, p.d1) if name == "Z1" else Fraction(mu2, p.d2)
                    want = tuple(sorted(t._replace(phase=ph % 1) for t in st.terms))
                if got != want:
                    bad.append(f"{family} {name} on ({mu1}, {mu2})")
    return bad


def subsystem_labels(matched: MatchedPair, label: int, which: int) -> tuple[int, int]:
    """Split an output label into ``(logical index, gauge index)``.

    Solves ``label = mu1 alpha1 n + j k2 d2 d1 (mod d3)`` for mode 3 or
    ``label = mu2 alpha2 n + j m1 d2 (mod d4)`` for mode 4.
    """
    p = matched
    n = p.n
    if which == 3:
        d, dout, alpha, beta, step = p.d1, p.d3, p.alpha1, p.beta1, p.k2 * p.d2
    elif which == 4:
        d, dout, alpha, beta, step = p.d2, p.d4, p.alpha2, p.beta2, p.m1
    else:
        raise ValueError("which must be 3 or 4")
    if not 0 <= label < dout:
        raise ValueError(f"label {label} out of range [0, {dout})")
    mu = (beta * label) % d
    rem = (label - mu * alpha * n) % dout
    if rem % d:
        raise NoSolution(f"label {label} matches no logical index on mode {which}")
    try:
        inv = pow(step % n, -1, n) if n > 1 else 0
    except ValueError as exc:
        raise NoSolution(f"gauge step {step} not invertible mod {n}") from exc
    j = (rem // d * inv) % n
    if (mu * alpha * n + j * step * d) % dout != label:
        raise NoSolution(f"label {label} is inconsistent with the declared scalars")
    return mu, j


def gauge_weights(matched: MatchedPair, mu1: int, mu2: int) -> list[Fraction]:
    """Schmidt weights of the gauge pair of ``U|mu1,mu2>`` after the subsystem split.

    Raises :class:`NoSolution` if any term's logical labels differ from the input.
    """
    st = ideal_output(matched, mu1, mu2)
    pairs = []
    for t in st.terms:
        l3, j3 = subsystem_labels(matched, t.mu3, 3)
        l4, j4 = subsystem_labels(matched, t.mu4, 4)
        if (l3, l4) != (mu1 % matched.d1, mu2 % matched.d2):
            raise NoSolution(f"term {t} carries logical labels {(l3, l4)}")
        pairs.append((j3, j4))
    if any(a != b for a, b in pairs) or len(set(pairs)) != matched.n:
        return []
    return [st.weight] * matched.n


def gauge_entropy(matched: MatchedPair, mu1: int = 0, mu2: int = 0) -> float:
    return entropy_bits(gauge_weights(matched, mu1, mu2))


def finite_embedding(state: IdealOutputState, delta: float, cutoff: int,
                     space: str = "q") -> np.ndarray:
    """Finite-energy version of an ideal output table on codes 3 and 4 (normalized)."""
    p = state.matched
    c3, c4 = p.code3, p.code4
    if not (c3.is_rectangle and c4.is_rectangle):
        raise ValueError("finite embedding needs rectangle output codes")
    out = np.zeros((cutoff, cutoff), dtype=complex)
    for t in state.terms:
        a = gkp_raw(c3.d, c3.r, t.mu3, delta, cutoff, space)
        b = gkp_raw(c4.d, c4.r, t.mu4, delta, cutoff, space)
        out += np.exp(2j * np.pi * float(t.phase)) * np.multiply.outer(a, b)
    return out / np.linalg.norm(out)
