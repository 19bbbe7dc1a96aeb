import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gkp_transduction.channel import (
    BsJob,
    ModeSpec,
    apply_bs_dense,
    apply_bs_dense_state,
    apply_bs_summation,
    crop,
    dense_bs_unitary,
    run_job,
)
from gkp_transduction.errors import CutoffTooSmall, EnvelopeMismatch
from gkp_transduction.fock import char_fn, ket_to_dm, partial_trace


def coherent(alpha, cutoff):
    n = np.arange(cutoff)
    logf = np.array([math.lgamma(k + 1) for k in n])
    amp = np.zeros(cutoff, dtype=complex)
    amp[0] = 1
    if alpha:
        amp = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(complex(alpha)) - 0.5 * logf)
    else:
        amp *= 1.0
    return amp


@given(st.floats(0.01, 0.99), st.integers(0, 120))
def test_blocks_are_orthogonal(eta, s):
    blk = dense_bs_unitary(s, eta).blocks[s]
    assert np.abs(blk.T @ blk - np.eye(s + 1)).max() < 1e-12


def test_sign_convention():
    eta = 0.3
    psi = np.zeros((2, 2))
    psi[1, 0] = 1
    out = apply_bs_dense_state(psi, eta)
    assert out[1, 0] == pytest.approx(math.sqrt(eta))
    assert out[0, 1] == pytest.approx(-math.sqrt(1 - eta))


@pytest.mark.parametrize("eta", [0.2, 0.5, 0.85])
def test_coherent_states_rotate(eta):
    a1, a2 = 0.9 - 0.2j, -0.4 + 0.6j
    out = apply_bs_dense(coherent(a1, 30), coherent(a2, 30), eta)
    s, c = math.sqrt(eta), math.sqrt(1 - eta)
    want = np.multiply.outer(coherent(s * a1 + c * a2, 59), coherent(s * a2 - c * a1, 59))
    assert np.abs(out.amplitudes - want).max() < 1e-8


def test_norm_preserved(rng):
    psi = rng.normal(size=(12, 9)) + 1j * rng.normal(size=(12, 9))
    psi /= np.linalg.norm(psi)
    out = apply_bs_dense_state(psi, 0.37)
    assert abs(np.linalg.norm(out) - 1) < 1e-10


def test_envelope_commutes(rng):
    # exp(-D^2 (n1+n2)) is a function of total photon number
    psi = rng.normal(size=(15, 15)) + 1j * rng.normal(size=(15, 15))
    n = np.arange(15)
    env_in = np.exp(-0.1 * (n[:, None] + n[None, :]))
    m = np.arange(29)
    env_out = np.exp(-0.1 * (m[:, None] + m[None, :]))
    a = apply_bs_dense_state(env_in * psi, 0.41)
    b = env_out * apply_bs_dense_state(psi, 0.41)
    assert np.abs(a - b).max() < 1e-10


@pytest.mark.parametrize("eta", [0.25, 1 / 3, 0.6])
def test_characteristic_function_product_rule(eta):
    a1, a2 = 0.7 + 0.3j, -0.5 + 0.2j
    k1, k2 = coherent(a1, 25), coherent(a2, 25)
    out = apply_bs_dense(k1, k2, eta).amplitudes
    rho3, rho4 = partial_trace(out, 1), partial_trace(out, 2)
    r1, r2 = ket_to_dm(k1), ket_to_dm(k2)
    s, c = math.sqrt(eta), math.sqrt(1 - eta)
    for u in (np.array([0.4, -0.3]), np.array([-0.2, 0.8])):
        assert abs(char_fn(rho3, u) - char_fn(r1, s * u) * char_fn(r2, c * u)) < 1e-6
        assert abs(char_fn(rho4, u) - char_fn(r1, -c * u) * char_fn(r2, s * u)) < 1e-6


def test_matrix_agrees_with_blockwise_apply(rng):
    N = 6
    blocks = dense_bs_unitary(2 * N, 0.3)
    U = blocks.matrix(N)
    psi = np.zeros((N, N), dtype=complex)
    for i in range(N):
        for j in range(N - i):
            psi[i, j] = rng.normal() + 1j * rng.normal()
    want = crop(apply_bs_dense_state(psi, 0.3), (N, N))[0]
    assert np.allclose((U @ psi.ravel()).reshape(N, N), want)
    with pytest.raises(CutoffTooSmall):
        dense_bs_unitary(4, 0.3).matrix(N)


@pytest.mark.parametrize("eta,d1,mu", [(0.2, 2, 1), (1 / 3, 2, 0), (0.5, 1, 0), (0.7, 2, 1)])
def test_summation_matches_dense(eta, d1, mu):
    job = BsJob(eta, ModeSpec(d1, 1.0, mu, 0.42), ModeSpec(1, 1.0, 0, 0.42))
    s = apply_bs_summation(job)
    d = run_job(BsJob(eta, job.in1, job.in2, method="dense"))
    assert np.abs(s.amplitudes - d.amplitudes).max() < 1e-6
    assert s.tail_mass == pytest.approx(d.tail_mass, abs=1e-9)


def test_summation_in_momentum_space():
    # r1 r2 < 1 selects the momentum comb; the dense route is representation-free
    job = BsJob(0.4, ModeSpec(2, 0.5, 1, 0.4), ModeSpec(1, 1.0, 0, 0.4))
    assert job.resolved_space() == "p"
    s = apply_bs_summation(job)
    d = run_job(BsJob(0.4, job.in1, job.in2, method="dense", space="p"))
    assert np.abs(s.amplitudes - d.amplitudes).max() < 1e-6


def test_summation_rejects_unequal_envelopes():
    with pytest.raises(EnvelopeMismatch):
        apply_bs_summation(BsJob(0.3, ModeSpec(2, 1.0, 0, 0.4), ModeSpec(1, 1.0, 0, 0.3)))
    with pytest.raises(EnvelopeMismatch):
        apply_bs_summation(BsJob(0.3, ModeSpec(2, 1.0, 0, 0.4), ModeSpec()))


def test_summation_cutoff_check():
    with pytest.raises(CutoffTooSmall):
        apply_bs_summation(BsJob(0.3, ModeSpec(2, 1.0, 0, 0.4), ModeSpec(1, 1.0, 0, 0.4), cutoff=20))


def test_dense_tail_guard():
    k = coherent(2.0, 30)
    with pytest.raises(CutoffTooSmall):
        apply_bs_dense(k, coherent(0, 30), 0.5, out_cutoffs=(4, 4))
    out = apply_bs_dense(k, coherent(0, 30), 0.5, out_cutoffs=(4, 4), max_tail=None)
    assert out.tail_mass > 0.01
    assert out.norm == pytest.approx(1.0)
