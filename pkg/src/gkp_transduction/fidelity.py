"""Transduction figures of merit for a qubit encoded in a finite-energy GKP code.

Mode 1 carries the qubit ``{|0>, |floor(d1/2)>}``, mode 2 the environment
(a qunaught, or the vacuum when its envelope is ``None``).  After the beam
splitter, mode 1 is the transduced output and mode 2 the complementary
(environment) output.  A purification with a two-level reference ``R`` is
the common input to every figure of merit.

Decoding uses the transpose channel, whose entanglement fidelity is
``F_e = || Tr_{1R}[N1 |Psi><Psi|] ||_F^2`` with ``N1 = (2 rho1)^{-1/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ModeSpec, apply_bs_dense_state, crop, input_norm, summation_raw
from .errors import BasisDegenerate, EnvelopeMismatch, RankCollapse
from .fock import INV_SQRT_FLOOR, FockVector, entropy_from_eigs
from .lattice import MatchedPair, RationalEfficiency
from .states import choose_space, default_cutoff, delta_from_nbar, gkp_raw

MAX_CONDITION = 1e8
FLOOR_PROBE = (1e-13, 1e-10)


@dataclass(frozen=True)
class Scenario:
    """One transduction setting.

    Attributes:
        eta: Beam-splitter efficiency (float or :class:`RationalEfficiency`).
        d1, r1: Rectangle code of the signal mode.
        d2, r2: Rectangle code of the environment; ``d2 = 1`` is a qunaught.
        delta1, delta2: Envelopes. ``delta2=None`` puts the vacuum on mode 2.
        qubit_basis: Logical indices of the two qubit states.
        env_mu: Logical index of the environment state.
        method: ``"summation"``, ``"dense"`` or ``None`` (summation whenever
            both envelopes are equal GKP envelopes).
        cutoff: Per-mode output cutoff; default ``ceil(8/delta^2)`` of the
            narrower envelope.
        orthogonalize: ``"input"`` or ``"output"`` side Löwdin step.
        floor: Eigenvalue floor inside ``(2 rho)^{-1/2}``.
    """

    eta: float
    d1: int = 2
    r1: float = 1.0
    delta1: float = 0.5
    d2: int = 1
    r2: float = 1.0
    delta2: float | None = 0.5
    qubit_basis: tuple[int, int] | None = None
    env_mu: int = 0
    method: str | None = None
    cutoff: int | None = None
    orthogonalize: str = "input"
    floor: float = INV_SQRT_FLOOR

    def __post_init__(self):
        eta = self.eta_value
        if not 0 < eta < 1:
            raise ValueError(f"eta={eta} outside (0, 1)")
        basis = self.basis
        if basis[0] == basis[1]:
            raise ValueError(f"qubit indices must differ, got {basis}")
        if not all(0 <= b < self.d1 for b in basis):
            raise ValueError(f"qubit indices {basis} out of range for d1={self.d1}")
        if self.orthogonalize not in ("input", "output"):
            raise ValueError("orthogonalize must be 'input' or 'output'")
        if self.resolved_method() == "summation" and self.delta1 != self.delta2:
            raise EnvelopeMismatch("summation needs equal envelopes on both modes")

    @classmethod
    def from_label(cls, eta, code: tuple[int, int, int], nbar1: float,
                   nbar2: float | None = -1.0, **kw) -> "Scenario":
        """Scenario for a code label ``(d1, a, b)``: square mode 1, ``r2 = a/b``.

        ``nbar2=-1`` (default) copies ``nbar1``; ``nbar2=None`` or ``0`` means vacuum.
        """
        d1, a, b = code
        if nbar2 is not None and nbar2 < 0:
            nbar2 = nbar1
        delta2 = delta_from_nbar(nbar2) if nbar2 else None
        return cls(eta=eta, d1=d1, r1=1.0, delta1=delta_from_nbar(nbar1),
                   d2=1, r2=a / b, delta2=delta2, **kw)

    @classmethod
    def from_matched(cls, pair: MatchedPair, delta1: float,
                     delta2: float | None = -1.0, **kw) -> "Scenario":
        """Scenario for the input codes of a matched pair (rectangle lattices only)."""
        if not (pair.code1.is_rectangle and pair.code2.is_rectangle):
            raise ValueError("only rectangle lattices are simulated")
        if delta2 is not None and delta2 < 0:
            delta2 = delta1
        return cls(eta=pair.eta.value, d1=pair.d1, r1=pair.code1.r, delta1=delta1,
                   d2=pair.d2, r2=pair.code2.r, delta2=delta2, **kw)

    @property
    def basis(self) -> tuple[int, int]:
        return self.qubit_basis or (0, self.d1 // 2)

    @property
    def eta_value(self) -> float:
        e = self.eta
        return e.value if isinstance(e, RationalEfficiency) else float(e)

    def resolved_method(self) -> str:
        if self.method is not None:
            return self.method
        same = self.delta2 is not None and self.delta1 == self.delta2
        return "summation" if same else "dense"

    def resolved_cutoff(self) -> int:
        if self.cutoff is not None:
            return int(self.cutoff)
        deltas = [d for d in (self.delta1, self.delta2) if d is not None]
        return max(default_cutoff(d) for d in deltas)

    def space(self) -> str:
        return choose_space(self.r1 * self.r2)

    def signal(self, mu: int) -> ModeSpec:
        return ModeSpec(self.d1, self.r1, mu, self.delta1)

    def environment(self) -> ModeSpec:
        return ModeSpec(self.d2, self.r2, self.env_mu, self.delta2)

    def mirrored(self) -> "Scenario":
        """Same inputs at efficiency ``1 - eta``."""
        e = self.eta
        if isinstance(e, RationalEfficiency):
            f = 1 - e.fraction
            e = RationalEfficiency(f.numerator, f.denominator)
        else:
            e = 1.0 - float(e)
        return replace(self, eta=e)


def lowdin(gram: np.ndarray) -> np.ndarray:
    """``G^{-1/2}``; raises :class:`BasisDegenerate` for ill-conditioned ``G``."""
    lam, vec = np.linalg.eigh(gram)
    if lam.min() <= 0 or lam.max() / lam.min() > MAX_CONDITION:
        raise BasisDegenerate(f"Gram condition number {lam.max() / max(lam.min(), 0):.3g}")
    return (vec * lam**-0.5) @ vec.conj().T


@dataclass
class Purification:
    """Joint reference-mode1-mode2 state after the beam splitter.

    ``psi`` has shape ``(2, N, N)``; ``psi[mu]`` is the (orthonormalized)
    output for the reference label ``mu``, divided by sqrt 2.
    """

    psi: np.ndarray
    gram_in: np.ndarray
    tail_mass: float
    scenario: Scenario = field(repr=False)

    def rho1(self) -> np.ndarray:
        m = self.psi.transpose(1, 0, 2).reshape(self.psi.shape[1], -1)
        return m @ m.conj().T

    def rho2(self) -> np.ndarray:
        m = self.psi.transpose(2, 0, 1).reshape(self.psi.shape[2], -1)
        return m @ m.conj().T

    def reference(self) -> np.ndarray:
        return np.einsum("rab,sab->rs", self.psi, self.psi.conj())

    def as_fock_vector(self) -> FockVector:
        return FockVector(self.psi, self.tail_mass)


def _summation_outputs(s: Scenario, cutoff: int):
    space = s.space()
    env = s.environment()
    eta = s.eta_value
    outs, kets = [], []
    for mu in s.basis:
        sig = s.signal(mu)
        norm = input_norm(sig, cutoff, space) * input_norm(env, cutoff, space)
        outs.append(summation_raw(eta, sig, env, s.delta1, cutoff, space) / norm)
        raw = gkp_raw(sig.d, sig.r, sig.mu, sig.delta, 2 * cutoff, space)
        kets.append(raw / np.linalg.norm(raw))
    return outs, kets


def _dense_outputs(s: Scenario, cutoff: int):
    space = s.space()
    env = s.environment()
    eta = s.eta_value
    n_env = 1 if env.is_vacuum else default_cutoff(env.delta)
    n_sig = default_cutoff(s.delta1)
    e_ket = env.ket(n_env, space)
    outs, kets = [], []
    for mu in s.basis:
        ket = s.signal(mu).ket(n_sig, space)
        full = apply_bs_dense_state(np.multiply.outer(ket, e_ket), eta)
        outs.append(crop(full, (cutoff, cutoff))[0])
        kets.append(ket)
    return outs, kets


def build_purification(s: Scenario) -> Purification:
    """``(1/sqrt 2) sum_mu |mu>_R U(|mu>|env>)`` with the qubit basis orthonormalized.

    Input-side orthogonalization applies ``G^{-1/2}`` of the input Gram matrix
    to the outputs (``U`` is linear); output-side uses the Gram matrix of the
    truncated outputs instead.  The result is renormalized.
    """
    cutoff = s.resolved_cutoff()
    method = s.resolved_method()
    if method == "summation":
        if s.delta2 is None or s.delta1 != s.delta2:
            raise EnvelopeMismatch("summation needs equal GKP envelopes")
        outs, kets = _summation_outputs(s, cutoff)
    elif method == "dense":
        outs, kets = _dense_outputs(s, cutoff)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = np.stack(outs).astype(complex)
    flat_in = np.stack(kets)
    gram_in = flat_in.conj() @ flat_in.T
    if s.orthogonalize == "input":
        L = lowdin(gram_in)
    else:
        flat = out.reshape(2, -1)
        L = lowdin(flat.conj() @ flat.T)
    psi = np.einsum("nab,nm->mab", out, L)
    mass = float(np.vdot(psi, psi).real) / 2
    psi = psi / math.sqrt(2 * mass)
    return Purification(psi, gram_in, max(0.0, 1.0 - mass), s)


def _factor(rho: np.ndarray):
    lam, vec = np.linalg.eigh(rho)
    return np.clip(lam, 0.0, None), vec


def _transpose_fe(psi_k: np.ndarray, lam: np.ndarray, vec: np.ndarray, floor: float) -> float:
    """``F_e`` given the kept-mode marginal ``rho = vec diag(lam) vec^H``.

    ``psi_k`` has shape ``(2, N_kept, N_other)``.
    """
    keep = lam >= floor if floor > 0 else lam > 0
    if int(keep.sum()) < 2:
        raise RankCollapse(f"marginal support dimension {int(keep.sum())} < 2")
    w = (2 * lam[keep]) ** -0.25
    # Y_r = N^{1/2} psi_r in the eigenbasis; rho_out = sum_r Y_r^H Y_r
    Y = (vec[:, keep].conj().T * w[:, None]) @ psi_k
    Y = Y.reshape(-1, Y.shape[-1])
    rho_out = Y.conj().T @ Y
    return float(np.vdot(rho_out, rho_out).real)


def _fe(p: Purification, side: int, floor: float | None = None) -> float:
    floor = p.scenario.floor if floor is None else floor
    if side == 1:
        lam, vec = _factor(p.rho1())
        return _transpose_fe(p.psi, lam, vec, floor)
    lam, vec = _factor(p.rho2())
    return _transpose_fe(p.psi.transpose(0, 2, 1), lam, vec, floor)


def _purified(s) -> Purification:
    return s if isinstance(s, Purification) else build_purification(s)


def entanglement_fidelity_transpose(s: Scenario | Purification) -> float:
    """Entanglement fidelity of the mode-1 output with the transpose decoder."""
    return _fe(_purified(s), 1)


def complementary_fidelity_transpose(s: Scenario | Purification) -> float:
    """Same figure of merit for the environment (mode-2) output."""
    return _fe(_purified(s), 2)


def coherent_information(s: Scenario | Purification) -> float:
    """``S(rho1) - S(rho2)`` in bits."""
    p = _purified(s)
    return (entropy_from_eigs(np.linalg.eigvalsh(p.rho1()))
            - entropy_from_eigs(np.linalg.eigvalsh(p.rho2())))


def floor_sensitivity(s: Scenario | Purification, floors=FLOOR_PROBE) -> float:
    """Spread of ``F_e`` when the eigenvalue floor varies over ``floors``."""
    p = _purified(s)
    lam, vec = _factor(p.rho1())
    vals = [_transpose_fe(p.psi, lam, vec, f) for f in floors]
    return float(max(vals) - min(vals))


def transpose_decoder_kraus(p: Purification, floor: float | None = None):
    """Encoder Kraus maps ``E_i`` (``N x 2``) and decoder maps ``D_i = E_i^H N1`` (``2 x N``).

    With ``M = U S W^H`` the SVD of the purification viewed as a
    ``mode1 x (ref, mode2)`` matrix, ``D`` stacked over ``i`` equals
    ``W_k U_k^H`` on the kept support.  This form avoids dividing by small
    eigenvalues, so ``sum_i D_i^H D_i`` is the support projector to rounding.
    """
    floor = p.scenario.floor if floor is None else floor
    two, n1, n2 = p.psi.shape
    E = math.sqrt(2) * p.psi.transpose(2, 1, 0)
    M = p.psi.transpose(1, 0, 2).reshape(n1, two * n2)
    U, sv, Wh = np.linalg.svd(M, full_matrices=False)
    keep = sv**2 >= floor if floor > 0 else sv > 0
    Uk, Wk = U[:, keep], Wh[keep].conj().T
    D = (Wk @ Uk.conj().T).reshape(two, n2, n1).transpose(1, 0, 2)
    proj = Uk @ Uk.conj().T
    return E, D, proj


def kraus_completeness_residual(p: Purification, floor: float | None = None) -> float:
    """``max |sum_i D_i^H D_i - P|`` with ``P`` the support projector of ``rho1``."""
    _, D, proj = transpose_decoder_kraus(p, floor)
    total = np.einsum("imb,imc->bc", D.conj(), D)
    return float(np.abs(total - proj).max())


def kraus_fidelity(p: Purification, floor: float | None = None) -> float:
    """``(1/4) sum_ij |Tr(D_j E_i)|^2``, computed from explicit Kraus maps."""
    E, D, _ = transpose_decoder_kraus(p, floor)
    T = np.einsum("jma,iam->ji", D, E)
    return float(np.sum(np.abs(T) ** 2) / 4)


@dataclass
class FidelityReport:
    fe: float
    fe_comp: float
    coherent_info: float
    tail_mass: float
    floor_sensitivity: float
    gram_offdiag: float


def evaluate(s: Scenario) -> FidelityReport:
    """All figures of merit from one purification."""
    p = build_purification(s)
    lam1, vec1 = _factor(p.rho1())
    lam2, vec2 = _factor(p.rho2())
    fe = _transpose_fe(p.psi, lam1, vec1, s.floor)
    fe_c = _transpose_fe(p.psi.transpose(0, 2, 1), lam2, vec2, s.floor)
    probes = [_transpose_fe(p.psi, lam1, vec1, f) for f in FLOOR_PROBE]
    ic = entropy_from_eigs(lam1) - entropy_from_eigs(lam2)
    return FidelityReport(fe, fe_c, ic, p.tail_mass, max(probes) - min(probes),
                          float(abs(p.gram_in[0, 1])))
