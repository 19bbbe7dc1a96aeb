import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_hermite, gammaln

from gkp_transduction.errors import CutoffTooSmall
from gkp_transduction.fock import char_fn, ket_to_dm
from gkp_transduction.lattice import GkpCode
from gkp_transduction.states import (
    choose_space,
    default_cutoff,
    delta_from_nbar,
    finite_gkp,
    fix_global_phase,
    gkp_raw,
    min_cutoff,
    nbar_and_n2,
    nbar_from_delta,
)


def oracle_amplitudes(d, r, mu, delta, cutoff):
    """Direct sum of closed-form wavefunctions at the position peaks."""
    step = math.sqrt(2 * math.pi * r / d)
    k = np.arange(-40, 41)
    x = step * (d * k + mu)
    x = x[np.abs(x) <= 2 * math.sqrt(cutoff)]
    out = np.empty(cutoff)
    for n in range(cutoff):
        log_norm = 0.5 * (n * math.log(2) + gammaln(n + 1) + 0.5 * math.log(math.pi))
        out[n] = np.sum(eval_hermite(n, x) * np.exp(-x * x / 2 - log_norm))
    out *= np.exp(-delta**2 * np.arange(cutoff))
    return out / np.linalg.norm(out)


def test_nbar_delta_roundtrip():
    assert delta_from_nbar(3) == pytest.approx(1 / math.sqrt(7))
    assert nbar_from_delta(delta_from_nbar(5.5)) == pytest.approx(5.5)
    with pytest.raises(ValueError):
        delta_from_nbar(0)


def test_cutoff_rules():
    assert default_cutoff(0.5) == 32
    assert min_cutoff(0.5) == 16
    with pytest.raises(CutoffTooSmall):
        finite_gkp(2, 1.0, 0, 0.5, fock_cutoff=15)


@pytest.mark.parametrize("d,r,mu", [(1, 1.0, 0), (2, 1.0, 1), (3, 2.0, 2), (2, 0.5, 0)])
def test_matches_closed_form_oracle(d, r, mu):
    st_ = finite_gkp(d, r, mu, 0.45, space="q", phase_fix=False)
    want = oracle_amplitudes(d, r, mu, 0.45, st_.cutoff)
    assert np.abs(st_.amplitudes - want).max() < 1e-10


@pytest.mark.parametrize("d,r,mu", [(2, 1.0, 0), (2, 1.0, 1), (3, 1.0, 1), (2, 2.0, 1), (3, 0.5, 2)])
def test_position_and_momentum_synthesis_agree(d, r, mu):
    a = finite_gkp(d, r, mu, 0.35, space="q").amplitudes
    b = finite_gkp(d, r, mu, 0.35, space="p").amplitudes
    assert np.abs(a - b).max() < 1e-9


@pytest.mark.parametrize("d,mu", [(1, 0), (2, 0), (2, 1), (4, 2)])
def test_parity_symmetric_states_have_no_odd_levels(d, mu):
    amps = finite_gkp(d, 1.0, mu, 0.3).amplitudes
    assert np.abs(amps[1::2]).max() < 1e-12


def test_logical_basis_nearly_orthogonal():
    # d=2 square code at delta=0.35: off-diagonal Gram element below 0.01
    zero = finite_gkp(2, 1.0, 0, 0.35, phase_fix=False).amplitudes
    one = finite_gkp(2, 1.0, 1, 0.35, phase_fix=False).amplitudes
    assert abs(np.vdot(zero, one)) < 0.01


@pytest.mark.parametrize("delta", [0.3, 0.25])
def test_stabilizers_and_logical_z(delta):
    code = GkpCode.rectangle(2)
    for mu, sign in ((0, 1), (1, -1)):
        rho = ket_to_dm(finite_gkp(2, 1.0, mu, delta).amplitudes)
        for s in (code.u, code.v):
            assert char_fn(rho, s).real > math.exp(-delta**2 * (s @ s) / 2)
        z = char_fn(rho, code.v / 2).real
        assert sign * z > 0.8


@pytest.mark.parametrize("delta", [0.3, 0.25, 0.2])
def test_mean_photon_number(delta):
    nbar, _ = nbar_and_n2(finite_gkp(1, 1.0, 0, delta))
    assert nbar == pytest.approx(nbar_from_delta(delta), rel=0.03)


def test_second_moment_estimate():
    # <n^2> tracks 1/(2 delta^4) for the square qunaught
    _, n2 = nbar_and_n2(finite_gkp(1, 1.0, 0, 0.2))
    assert n2 == pytest.approx(1 / (2 * 0.2**4), rel=0.1)


def test_normalization_and_phase():
    s = finite_gkp(3, 1.0, 1, 0.4)
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0)
    i = np.argmax(np.abs(s.amplitudes))
    assert s.amplitudes[i].imag == pytest.approx(0.0, abs=1e-15)
    assert s.amplitudes[i].real > 0
    raw = gkp_raw(3, 1.0, 1, 0.4, s.cutoff, s.space)
    assert s.norm_constant == pytest.approx(1 / np.linalg.norm(raw))


@given(st.floats(0.1, 10.0))
def test_choose_space(r):
    assert choose_space(r) == ("q" if r >= 1 else "p")


def test_fix_global_phase():
    v = np.array([0.1, -0.9j, 0.2])
    w = fix_global_phase(v)
    assert w[1] == pytest.approx(0.9)
    assert np.allclose(np.abs(w), np.abs(v))


def test_to_dict_is_json():
    s = finite_gkp(2, 1.0, 1, 0.5)
    d = json.loads(json.dumps(s.to_dict()))
    assert d["d"] == 2 and d["cutoff"] == s.cutoff
    assert len(d["amplitudes"]) == s.cutoff


def test_invalid_logical_index():
    with pytest.raises(ValueError):
        finite_gkp(2, 1.0, 2, 0.4)
