"""Finite-energy rectangle-lattice GKP states in the Fock basis.

A basis state is the envelope ``exp(-delta^2 n)`` applied to a comb of
position (or momentum) eigenstates; its Fock amplitudes follow from the
oscillator wavefunctions evaluated at the comb's peaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffTooSmall
from .kernels import hermite_table
from .lattice import GkpCode


def delta_from_nbar(nbar: float) -> float:
    """Envelope width giving mean photon number ``nbar`` (``nbar = 1/(2 delta^2) - 1/2``)."""
    if nbar <= 0:
        raise ValueError("nbar must be positive")
    return 1.0 / math.sqrt(2 * nbar + 1)


def nbar_from_delta(delta: float) -> float:
    return 0.5 / delta**2 - 0.5


def default_cutoff(delta: float) -> int:
    return int(math.ceil(8.0 / delta**2 - 1e-9))


def min_cutoff(delta: float) -> float:
    return 4.0 / delta**2


def choose_space(r: float, d: int = 1, delta: float | None = None) -> str:
    """Representation with the sparser comb: ``"q"`` when ``r >= 1``, else ``"p"``.

    Peak spacings are ``sqrt(2 pi r/d)`` in position and ``sqrt(2 pi/(r d))``
    in momentum; ``d`` and ``delta`` scale both equally and do not change the
    choice.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    q_spacing = math.sqrt(2 * math.pi * r / d)
    p_spacing = math.sqrt(2 * math.pi / (r * d))
    return "q" if q_spacing >= p_spacing else "p"


def comb(d: int, r: float, mu: int, space: str, window: float):
    """Peak positions, integer peak labels and complex weights within ``|x| <= window``.

    In position space the peaks sit at ``sqrt(2 pi r/d) (d k + mu)`` with unit
    weight; in momentum space at ``k sqrt(2 pi/(r d))`` with weight
    ``exp(-2 pi i k mu / d)``.
    """
    if space == "q":
        step = math.sqrt(2 * math.pi * r / d)
        kmax = int(math.floor((window / step + abs(mu)) / d)) + 1
        k = np.arange(-kmax, kmax + 1)
        x = step * (d * k + mu)
        w = np.ones(x.size, dtype=complex)
    elif space == "p":
        step = math.sqrt(2 * math.pi / (r * d))
        kmax = int(math.floor(window / step)) + 1
        k = np.arange(-kmax, kmax + 1)
        x = step * k
        w = np.exp(-2j * math.pi * k * mu / d)
    else:
        raise ValueError(f"space must be 'q' or 'p', got {space!r}")
    sel = np.abs(x) <= window
    return x[sel], k[sel], w[sel]


def space_phase(cutoff: int, space: str) -> np.ndarray:
    """Per-level factor ``<n|p> / psi_n(p) = i^n`` (all ones in position space)."""
    if space == "q":
        return np.ones(cutoff, dtype=complex)
    return (1j) ** (np.arange(cutoff) % 4)


def gkp_raw(d: int, r: float, mu: int, delta: float, cutoff: int, space: str,
            window: float | None = None) -> np.ndarray:
    """Unnormalized amplitudes ``exp(-delta^2 n) <n|mu>`` of the ideal comb."""
    if window is None:
        window = 2 * math.sqrt(cutoff)
    x, _, w = comb(d, r, mu, space, window)
    table = hermite_table(cutoff, x)
    env = np.exp(-delta**2 * np.arange(cutoff))
    return env * space_phase(cutoff, space) * (table @ w)


@dataclass
class FiniteGkpState:
    code: GkpCode
    mu: int
    delta: float
    space: str
    amplitudes: np.ndarray
    norm_constant: float

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size

    @property
    def nbar_estimate(self) -> float:
        return nbar_from_delta(self.delta)

    def to_dict(self) -> dict:
        return {
            "d": self.code.d,
            "r": self.code.r,
            "mu": self.mu,
            "delta": self.delta,
            "space": self.space,
            "cutoff": self.cutoff,
            "norm": self.norm_constant,
            "amplitudes": [
                {"n": n, "re": float(a.real), "im": float(a.imag)}
                for n, a in enumerate(self.amplitudes)
            ],
        }


def fix_global_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive."""
    flat = amps.reshape(-1)
    i = int(np.argmax(np.abs(flat)))
    if flat[i] == 0:
        return amps
    return amps * (abs(flat[i]) / flat[i])


def finite_gkp(
    d: int,
    r: float,
    mu: int,
    delta: float,
    fock_cutoff: int | None = None,
    space: str | None = None,
    phase_fix: bool = True,
) -> FiniteGkpState:
    """Finite-energy basis state ``|mu_delta>`` of the rectangle code ``(d, r)``.

    The cutoff defaults to ``ceil(8/delta^2)`` and must be at least
    ``4/delta^2``; peaks are kept within ``|x| <= 2 sqrt(cutoff)``.
    """
    if not 0 <= mu < d:
        raise ValueError(f"logical index {mu} out of range for d={d}")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    cutoff = default_cutoff(delta) if fock_cutoff is None else int(fock_cutoff)
    if cutoff < min_cutoff(delta):
        raise CutoffTooSmall(f"cutoff {cutoff} < 4/delta^2 = {min_cutoff(delta):.1f}")
    if space is None:
        space = choose_space(r, d, delta)
    raw = gkp_raw(d, r, mu, delta, cutoff, space)
    norm = float(np.linalg.norm(raw))
    amps = raw / norm
    if phase_fix:
        amps = fix_global_phase(amps)
    else:
        amps = amps.astype(complex)
    return FiniteGkpState(GkpCode.rectangle(d, r), mu, delta, space, amps, 1.0 / norm)


def nbar_and_n2(state) -> tuple[float, float]:
    """``<n>`` and ``<n^2>`` of a single-mode Fock vector (or state object)."""
    amps = getattr(state, "amplitudes", state)
    p = np.abs(np.asarray(amps)) ** 2
    p = p / p.sum()
    n = np.arange(p.size)
    return float(p @ n), float(p @ n**2)
