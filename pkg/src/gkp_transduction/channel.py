"""Beam splitter acting on finite-energy GKP product inputs.

Two independent routes produce the output Fock amplitudes:

* ``summation`` rotates the ideal peak combs in the (q1, q2) (or p1, p2)
  plane and projects onto Fock states through the oscillator wavefunctions.
  It needs equal envelopes on both modes, because only then does the
  envelope commute with the beam splitter.
* ``dense`` builds the unitary block by block in total photon number and
  applies it to arbitrary two-mode kets.

Conventions: ``U = exp(theta (a1^dag a2 - a1 a2^dag))`` with
``theta = arccos(sqrt(eta))``, so ``U |1,0> = sqrt(eta)|1,0> - sqrt(1-eta)|0,1>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import CutoffTooSmall, EnvelopeMismatch
from .fock import FockVector
from .kernels import hermite_table
from .states import choose_space, comb, default_cutoff, gkp_raw, min_cutoff, space_phase

MAX_TAIL = 1e-6


@dataclass(frozen=True)
class ModeSpec:
    """Input of one beam-splitter port: rectangle code ``(d, r)``, index ``mu``.

    ``delta=None`` stands for the vacuum.
    """

    d: int = 1
    r: float = 1.0
    mu: int = 0
    delta: float | None = None

    @property
    def is_vacuum(self) -> bool:
        return self.delta is None

    def default_cutoff(self) -> int:
        return 1 if self.is_vacuum else default_cutoff(self.delta)

    def ket(self, cutoff: int, space: str | None = None) -> np.ndarray:
        """Normalized Fock amplitudes, without any global phase fixing."""
        if self.is_vacuum:
            v = np.zeros(cutoff, dtype=complex)
            v[0] = 1
            return v
        raw = gkp_raw(self.d, self.r, self.mu, self.delta, cutoff,
                      space or choose_space(self.r, self.d))
        return raw / np.linalg.norm(raw)


@dataclass(frozen=True)
class BsJob:
    eta: float
    in1: ModeSpec
    in2: ModeSpec
    method: str = "summation"
    cutoff: int | None = None
    space: str | None = field(default=None)

    def resolved_cutoff(self) -> int:
        if self.cutoff is not None:
            return self.cutoff
        return max(self.in1.default_cutoff(), self.in2.default_cutoff())

    def resolved_space(self) -> str:
        return self.space or choose_space(self.in1.r * self.in2.r)


def rotate(eta: float, a, b):
    """Beam-splitter action on quadrature eigenvalues of the two ports."""
    s, c = math.sqrt(eta), math.sqrt(1 - eta)
    return s * a + c * b, s * b - c * a


def pair_grid(eta: float, in1: ModeSpec, in2: ModeSpec, space: str, window: float):
    """Rotated peak coordinates ``(x, y)`` and weights for every peak pair."""
    x1, _, w1 = comb(in1.d, in1.r, in1.mu, space, window)
    x2, _, w2 = comb(in2.d, in2.r, in2.mu, space, window)
    q1, q2 = np.meshgrid(x1, x2, indexing="ij")
    x, y = rotate(eta, q1.ravel(), q2.ravel())
    return x, y, np.outer(w1, w2).ravel()


def summation_raw(eta: float, in1: ModeSpec, in2: ModeSpec, delta: float,
                  cutoff: int, space: str) -> np.ndarray:
    """Unnormalized output amplitudes; equals ``U`` applied to the two raw input combs.

    Peaks are kept within ``|x_l| <= 2 sqrt(2 cutoff)`` per port.
    """
    window = 2 * math.sqrt(2 * cutoff)
    x, y, w = pair_grid(eta, in1, in2, space, window)
    a = hermite_table(cutoff, x)
    b = hermite_table(cutoff, y)
    amps = (a * w) @ b.T
    level = space_phase(cutoff, space) * np.exp(-delta**2 * np.arange(cutoff))
    return amps * level[:, None] * level[None, :]


def input_norm(spec: ModeSpec, cutoff: int, space: str) -> float:
    """Norm of the raw input comb, taken on twice the output cutoff.

    The output box ``cutoff x cutoff`` is fed by input levels beyond
    ``cutoff``, so the normalization must see them too.
    """
    return float(np.linalg.norm(gkp_raw(spec.d, spec.r, spec.mu, spec.delta, 2 * cutoff, space)))


def apply_bs_summation(job: BsJob) -> FockVector:
    """Output of the beam splitter on ``|mu1_delta>|mu2_delta>`` by peak summation.

    Amplitudes are scaled by the input normalizations, so ``tail_mass`` is the
    probability lost to the per-mode cutoff; the returned vector is then
    renormalized.
    """
    in1, in2 = job.in1, job.in2
    if in1.is_vacuum or in2.is_vacuum:
        raise EnvelopeMismatch("summation needs GKP inputs on both ports")
    if in1.delta != in2.delta:
        raise EnvelopeMismatch(f"delta1={in1.delta} != delta2={in2.delta}")
    delta = in1.delta
    cutoff = job.resolved_cutoff()
    if cutoff < min_cutoff(delta):
        raise CutoffTooSmall(f"cutoff {cutoff} < 4/delta^2")
    space = job.resolved_space()
    raw = summation_raw(job.eta, in1, in2, delta, cutoff, space)
    out = raw / (input_norm(in1, cutoff, space) * input_norm(in2, cutoff, space))
    mass = float(np.vdot(out, out).real)
    return FockVector(out / math.sqrt(mass), tail_mass=max(0.0, 1.0 - mass))


@lru_cache(maxsize=4096)
def _block(s: int, eta: float) -> np.ndarray:
    theta = math.acos(math.sqrt(eta))
    n1 = np.arange(s)
    hop = theta * np.sqrt((n1 + 1.0) * (s - n1))
    gen = np.diag(hop, -1) - np.diag(hop, 1)
    blk = expm(gen)
    blk.flags.writeable = False
    return blk


@dataclass(frozen=True, eq=False)
class BsBlocks:
    """Beam-splitter unitary as one block per total photon number ``s``.

    Block ``s`` acts on the basis ``|n1, s - n1>``, ``n1 = 0..s``.
    """

    eta: float
    blocks: tuple

    @property
    def total_cutoff(self) -> int:
        return len(self.blocks) - 1

    def matrix(self, cutoff: int) -> np.ndarray:
        """Dense operator on per-mode levels ``< cutoff`` (row-major two-mode basis)."""
        if 2 * (cutoff - 1) > self.total_cutoff:
            raise CutoffTooSmall("per-mode cutoff needs blocks beyond total_cutoff")
        dim = cutoff * cutoff
        U = np.zeros((dim, dim))
        for s in range(2 * cutoff - 1):
            n1 = np.arange(max(0, s - cutoff + 1), min(s, cutoff - 1) + 1)
            idx = n1 * cutoff + (s - n1)
            U[np.ix_(idx, idx)] = self.blocks[s][np.ix_(n1, n1)]
        return U


def dense_bs_unitary(total_cutoff: int, eta: float) -> BsBlocks:
    """Blocks of ``U_eta`` for every total photon number up to ``total_cutoff``."""
    if total_cutoff < 0:
        raise ValueError("total_cutoff must be >= 0")
    return BsBlocks(eta, tuple(_block(s, float(eta)) for s in range(total_cutoff + 1)))


def apply_bs_dense_state(psi: np.ndarray, eta: float) -> np.ndarray:
    """Apply ``U_eta`` exactly to a two-mode ket of shape ``(N1, N2)``.

    The result has shape ``(S+1, S+1)`` with ``S = N1 + N2 - 2``, enough to
    hold every output component without truncation.
    """
    n1c, n2c = psi.shape
    S = n1c + n2c - 2
    out = np.zeros((S + 1, S + 1), dtype=np.result_type(psi, float))
    for s in range(S + 1):
        lo, hi = max(0, s - n2c + 1), min(s, n1c - 1)
        col = np.zeros(s + 1, dtype=out.dtype)
        n1 = np.arange(lo, hi + 1)
        col[n1] = psi[n1, s - n1]
        res = _block(s, float(eta)) @ col
        k = np.arange(s + 1)
        out[k, s - k] = res
    return out


def crop(psi: np.ndarray, cutoffs: tuple[int, int]) -> tuple[np.ndarray, float]:
    """Restrict a two-mode ket to ``cutoffs``; return it with the dropped mass."""
    full = float(np.vdot(psi, psi).real)
    pad = np.zeros(cutoffs, dtype=psi.dtype)
    a, b = min(cutoffs[0], psi.shape[0]), min(cutoffs[1], psi.shape[1])
    pad[:a, :b] = psi[:a, :b]
    kept = float(np.vdot(pad, pad).real)
    return pad, max(0.0, 1.0 - kept / full) if full > 0 else 0.0


def apply_bs_dense(in1: np.ndarray, in2: np.ndarray, eta: float,
                   out_cutoffs: tuple[int, int] | None = None,
                   max_tail: float | None = MAX_TAIL,
                   renormalize: bool = True) -> FockVector:
    """Dense-unitary output for the product input ``in1 (x) in2``.

    Without ``out_cutoffs`` the exact (untruncated) output is returned.
    Otherwise it is cropped; a dropped mass above ``max_tail`` raises
    :class:`CutoffTooSmall`.
    """
    psi = np.multiply.outer(np.asarray(in1), np.asarray(in2))
    out = apply_bs_dense_state(psi, eta)
    if out_cutoffs is None:
        return FockVector(out)
    out, tail = crop(out, out_cutoffs)
    if max_tail is not None and tail > max_tail:
        raise CutoffTooSmall(f"tail mass {tail:.3g} exceeds {max_tail:.1g}")
    if renormalize and tail > 0:
        out = out / math.sqrt(1 - tail)
    return FockVector(out, tail_mass=tail)


def run_job(job: BsJob) -> FockVector:
    if job.method == "summation":
        return apply_bs_summation(job)
    if job.method != "dense":
        raise ValueError(f"unknown method {job.method!r}")
    cutoff = job.resolved_cutoff()
    space = job.resolved_space()
    # inputs at twice the output cutoff so every output block is complete
    k1 = job.in1.ket(1 if job.in1.is_vacuum else 2 * cutoff, space)
    k2 = job.in2.ket(1 if job.in2.is_vacuum else 2 * cutoff, space)
    return apply_bs_dense(k1, k2, job.eta, (cutoff, cutoff), max_tail=None)
