"""Dense linear algebra on truncated Fock spaces (one or two modes).

States are plain numpy arrays: a single-mode ket has shape ``(N,)``, a
two-mode ket ``(N1, N2)`` indexed by the mode-1 photon number first, and
operators are square matrices over the row-major flattening of the same
basis.  :class:`FockVector` only adds bookkeeping (tail mass dropped by
truncation) on top of the array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NotDensityMatrix, TraceNotOne
from .kernels import hermite_table

ENTROPY_FLOOR = 1e-14
INV_SQRT_FLOOR = 1e-12


@dataclass
class FockVector:
    amplitudes: np.ndarray
    tail_mass: float = 0.0

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return self.amplitudes.shape

    @property
    def mode_count(self) -> int:
        return self.amplitudes.ndim

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)


def psi_q(n: int, q):
    """Position wavefunction of the Fock state ``|n>`` at ``q``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    q_arr = np.asarray(q, dtype=float)
    vals = hermite_table(n + 1, q_arr.ravel())[n]
    return vals.reshape(q_arr.shape) if q_arr.ndim else float(vals[0])


def psi_p(n: int, p):
    """Momentum wavefunction ``<n|p>``; equals ``i**n psi_q(n, p)``."""
    return (1j) ** (n % 4) * psi_q(n, p)


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)


def _displacement_pad(alpha: complex) -> int:
    a = abs(alpha)
    return int(math.ceil(2 * a * a + 8 * a + 10))


def displacement_op(cutoff: int, u, pad: int | None = None) -> np.ndarray:
    """Matrix of ``T(u) = D((u_q + i u_p)/sqrt 2)`` on the lowest ``cutoff`` levels.

    The generator is exponentiated on ``cutoff + pad`` levels and the result
    cropped, which keeps the returned block accurate up to the top level.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    alpha = (u[0] + 1j * u[1]) / math.sqrt(2)
    size = cutoff + (_displacement_pad(alpha) if pad is None else pad)
    a = annihilation(size)
    gen = alpha * a.T - np.conj(alpha) * a
    return expm(gen)[:cutoff, :cutoff]


def displacement_truncation_error(cutoff: int, u, pad: int | None = None) -> float:
    """``max |T^dag T - I|`` over the lower two thirds of the returned block."""
    T = displacement_op(cutoff, u, pad)
    keep = max(1, (2 * cutoff) // 3)
    err = T.conj().T @ T - np.eye(cutoff)
    return float(np.abs(err[:keep, :keep]).max())


def char_fn(rho: np.ndarray, u, tol: float = 1e-8) -> complex:
    """Characteristic function ``Tr[rho T(u)]`` of a single-mode state."""
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise TraceNotOne(f"Tr(rho) = {tr!r}")
    T = displacement_op(rho.shape[0], u)
    return complex(np.sum(rho.T * T))


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    v = psi.reshape(-1)
    return np.outer(v, v.conj())


def reduced_dm(psi: np.ndarray, keep: int | tuple[int, ...]) -> np.ndarray:
    """Reduced density matrix of a pure state tensor on the axes in ``keep``."""
    keep = (keep,) if isinstance(keep, int) else tuple(keep)
    drop = tuple(ax for ax in range(psi.ndim) if ax not in keep)
    moved = np.moveaxis(psi, keep + drop, tuple(range(psi.ndim)))
    dim = int(np.prod([psi.shape[ax] for ax in keep]))
    mat = moved.reshape(dim, -1)
    return mat @ mat.conj().T


def partial_trace(state: np.ndarray, keep: int, cutoffs: tuple[int, int] | None = None):
    """Reduce a two-mode state to mode ``keep`` (1 or 2).

    ``state`` is either a ket of shape ``(N1, N2)`` or a density matrix of
    shape ``(N1*N2, N1*N2)``, in which case ``cutoffs`` must be given.
    """
    if keep not in (1, 2):
        raise ValueError("keep must be 1 or 2")
    if cutoffs is None:
        if state.ndim != 2:
            raise ValueError("pass cutoffs for a flattened state")
        return reduced_dm(state, keep - 1)
    n1, n2 = cutoffs
    if state.ndim == 1:
        return reduced_dm(state.reshape(n1, n2), keep - 1)
    rho = state.reshape(n1, n2, n1, n2)
    if keep == 1:
        return np.einsum("ajbj->ab", rho)
    return np.einsum("jajb->ab", rho)


def _check_density(rho: np.ndarray, tol: float) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotDensityMatrix("not a square matrix")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise NotDensityMatrix("not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise NotDensityMatrix(f"trace {np.trace(rho).real!r} != 1")


def entropy(rho: np.ndarray, floor: float = ENTROPY_FLOOR, tol: float = 1e-8) -> float:
    """Von Neumann entropy in bits; eigenvalues below ``floor`` are dropped."""
    _check_density(rho, tol)
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -tol:
        raise NotDensityMatrix(f"negative eigenvalue {lam.min()!r}")
    return entropy_from_eigs(lam, floor)


def entropy_from_eigs(lam: np.ndarray, floor: float = ENTROPY_FLOOR) -> float:
    lam = lam[lam > floor]
    return float(-np.sum(lam * np.log2(lam)))


def inv_sqrt_psd(rho: np.ndarray, floor: float = INV_SQRT_FLOOR) -> np.ndarray:
    """Pseudo-inverse square root restricted to eigenvalues ``>= floor``."""
    lam, vec = np.linalg.eigh(rho)
    keep = lam >= floor if floor > 0 else lam > 0
    w = np.zeros_like(lam)
    w[keep] = lam[keep] ** -0.5
    return (vec * w) @ vec.conj().T


def trace_distance_pure(psi: np.ndarray, phi: np.ndarray) -> float:
    ov = np.vdot(psi.reshape(-1), phi.reshape(-1))
    return math.sqrt(max(0.0, 1.0 - abs(ov) ** 2))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return float(0.5 * np.abs(np.linalg.eigvalsh(rho - sigma)).sum())


def fannes_bound(t: float, dim: int) -> float:
    """``2 T log2(D) - 2 T log2(2 T)``, the entropy-continuity bound."""
    if t <= 0:
        return 0.0
    return 2 * t * math.log2(dim) - 2 * t * math.log2(2 * t)
