"""Finite-energy GKP codes through a beam splitter.

Lattice matching and the exact ideal-code model live in :mod:`.lattice` and
:mod:`.ideal`; Fock-space synthesis, the beam splitter and transduction
figures of merit in :mod:`.states`, :mod:`.channel` and :mod:`.fidelity`.
"""

from .channel import BsJob, ModeSpec, apply_bs_dense, apply_bs_summation, dense_bs_unitary
from .errors import (
    BadFactors,
    BasisDegenerate,
    CutoffTooSmall,
    EnvelopeMismatch,
    GainUndefined,
    GkpError,
    NonSymplectic,
    NoSolution,
    NotCoprime,
    NotDensityMatrix,
    NotFactorizable,
    NotFound,
    RankCollapse,
    TraceNotOne,
    ZeroCoupling,
)
from .fidelity import (
    Scenario,
    build_purification,
    coherent_information,
    complementary_fidelity_transpose,
    entanglement_fidelity_transpose,
    evaluate,
)
from .fock import FockVector, char_fn, displacement_op, entropy, partial_trace, psi_p, psi_q
from .ideal import (
    IdealOutputState,
    check_perfect_transmission,
    ideal_output,
    logical_op_map,
    subsystem_labels,
)
from .kernels import BACKEND
from .lattice import (
    GkpCode,
    MatchedPair,
    RationalEfficiency,
    enumerate_matchings,
    make_code,
    match_codes,
    peak_efficiencies,
    qnd_matching,
    rational_approx,
    sweep_step,
    tmss_matching,
)
from .states import FiniteGkpState, delta_from_nbar, finite_gkp, nbar_and_n2

__version__ = "0.1.0"
