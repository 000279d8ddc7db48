import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_system, random_systems
from dissipative_spectra.errors import InvalidInput, ResonantFrequency
from dissipative_spectra.harmonic import (
    REGIME_INSIDE,
    REGIME_OUTSIDE,
    admittance_exact,
    admittance_expansion,
    classify_frequency,
    respond,
    response_asymptotes,
    response_limits,
    theorem3_inequality_check,
)
from dissipative_spectra.high_loss import low_loss_coefficients
from dissipative_spectra.system import assemble, build_system, decompose

E1 = np.array([1.0, 0, 0, 0], dtype=complex)
E2 = np.array([0, 1.0, 0, 0], dtype=complex)


def nonresonant_omega(rng, decomp, margin=0.05):
    rho = np.linalg.eigvalsh(decomp.omega1)
    while True:
        w = rng.uniform(-3, 3)
        if np.min(np.abs(w - rho)) > margin:
            return w


def test_classify_frequency_circuit(circuit):
    low = low_loss_coefficients(decompose(circuit))
    assert classify_frequency(1.0, low).klass == "nonresonant"
    fc = classify_frequency(low[1].rho, low)
    assert fc.resonant and fc.distance == 0
    fc = classify_frequency(0.0, low)
    assert fc.resonant and fc.nearest_rho == pytest.approx(0.0, abs=1e-15)


def test_admittance_decoupled():
    s = build_system(np.zeros((2, 2)), np.diag([1.0, 0.0]))
    adm = admittance_exact(s, 1.0, 2.0)
    assert_allclose(np.asarray(adm), np.diag([(2 + 1j) / 5, 1j]), atol=1e-15)
    assert adm.route == "schur"


def test_admittance_circuit_matches_direct(circuit):
    adm = admittance_exact(circuit, 1.0, 50.0)
    direct = 1j * np.linalg.inv(np.eye(4) - assemble(circuit, 50.0))
    assert np.linalg.norm(adm.matrix - direct) <= 1e-10 * np.linalg.norm(direct)
    ident = (np.eye(4) - assemble(circuit, 50.0)) @ (-1j * adm.matrix)
    assert_allclose(ident, np.eye(4), atol=1e-10)


def test_admittance_resonant(circuit):
    with pytest.raises(ResonantFrequency):
        admittance_exact(circuit, 0.0, 10.0)
    with pytest.raises(InvalidInput):
        admittance_exact(circuit, 1.0, 0.0)


def test_admittance_direct_fallback():
    # the loss block omega - Omega2 + i beta B2 = diag(i beta, 1 + i beta) is
    # numerically singular while omega I - A itself is well conditioned
    s = build_system([[1.0, 0, 1.0], [0, 0, 0], [1.0, 0, 3.0]], np.diag([1.0, 1.0, 0.0]))
    adm = admittance_exact(s, 1.0, 1e-13)
    assert adm.route == "direct"
    assert adm.condition < 100
    assert_allclose(np.asarray(adm), 1j * np.linalg.inv(np.eye(3) - assemble(s, 1e-13)))


def test_expansion_decoupled(rng):
    s = random_system(rng, 5, 2)
    dec = decompose(s)
    om = np.zeros((5, 5), dtype=complex)
    om[:2, :2], om[2:, 2:] = dec.omega2, dec.omega1
    s0 = build_system(dec.from_block(om), s.b)
    d0 = decompose(s0)
    w = nonresonant_omega(rng, d0)
    exp = admittance_expansion(d0, w)
    expect = np.zeros((5, 5), dtype=complex)
    expect[:2, :2] = d0.b2_inv
    assert_allclose(exp.w_minus1, d0.from_block(expect), atol=1e-10)
    assert_allclose(d0.p_b @ exp.kernel_basis, 0, atol=1e-10)


def test_expansion_circuit(circuit):
    dec = decompose(circuit)
    exp = admittance_expansion(dec, 1.0)
    assert exp.kernel_basis.shape == (4, 3)
    assert np.linalg.matrix_rank(exp.w_minus1, tol=1e-10) == 1
    err = []
    for beta in (1e3, 1e4):
        adm = admittance_exact(circuit, 1.0, beta).matrix
        err.append(np.linalg.norm(beta * (adm - exp.leading) - exp.w_minus1))
    assert err[0] / err[1] >= 5


@pytest.mark.parametrize("seed", range(3))
def test_dissipation_form_converges(seed):
    rng = np.random.default_rng(seed)
    s = random_systems(seed + 50, 1)[0]
    dec = decompose(s)
    w = nonresonant_omega(rng, dec)
    exp = admittance_expansion(dec, w)
    err = []
    for beta in (1e3, 1e4):
        adm = admittance_exact(s, w, beta).matrix
        err.append(np.linalg.norm(beta * (adm.conj().T @ (beta * s.b) @ adm) - exp.w_minus1))
    assert err[0] / err[1] >= 5


def test_respond_definitions(rng):
    s = random_system(rng, 5, 2)
    dec = decompose(s)
    w = nonresonant_omega(rng, dec)
    f = rng.normal(size=5) + 1j * rng.normal(size=5)
    rep = respond(s, f, w, 3.0)
    v = rep.amplitude
    assert rep.stored_energy == pytest.approx(0.5 * np.vdot(v, v).real, rel=1e-12)
    assert rep.dissipated_power == pytest.approx(3.0 * np.vdot(v, s.b @ v).real, rel=1e-12)
    assert rep.quality_factor == pytest.approx(abs(w) * rep.stored_energy / rep.dissipated_power, rel=1e-15)
    assert rep.regime_class == REGIME_OUTSIDE
    with pytest.raises(InvalidInput):
        respond(s, np.zeros(5), w, 3.0)


def test_loss_subspace_forcing_circuit(circuit):
    dec = decompose(circuit)
    vals = {}
    for beta in (1e2, 1e3, 1e4):
        rep = respond(circuit, E2, 1.0, beta, dec)
        assert rep.regime_class == REGIME_INSIDE
        vals[beta] = (beta * rep.dissipated_power, beta**2 * rep.stored_energy)
    u2 = response_asymptotes(dec, E2, 1.0, 1.0)[0]
    e_w = [abs(vals[b][0] - 1.0) for b in (1e2, 1e3, 1e4)]
    e_u = [abs(vals[b][1] - u2) for b in (1e2, 1e3, 1e4)]
    assert e_w[0] / e_w[1] >= 5 and e_w[1] / e_w[2] >= 5
    assert e_u[0] / e_u[1] >= 5 and e_u[1] / e_u[2] >= 5
    assert u2 > 0


def test_no_loss_component_forcing_circuit(circuit):
    dec = decompose(circuit)
    u0, _, _ = response_limits(dec, E1, 1.0)
    rep = respond(circuit, E1, 1.0, 1e4, dec)
    ua, wa, qa = response_asymptotes(dec, E1, 1.0, 1e4)
    assert rep.stored_energy == pytest.approx(u0, rel=1e-2)
    assert rep.quality_factor == pytest.approx(qa, rel=5e-2)
    assert ua == u0


def test_response_limits(circuit):
    dec = decompose(circuit)
    assert response_limits(dec, E2, 1.0) == (0.0, 0.0, "zero")
    u, w, q = response_limits(dec, E1, 1.0)
    assert u > 0 and w == 0.0 and q == "infinite"
    with pytest.raises(ResonantFrequency):
        response_limits(dec, E1, 0.0)


def test_response_limits_zero_frequency():
    s = build_system(np.diag([1.0, 2.0, 0.5]), np.diag([1.0, 0.0, 0.0]))
    dec = decompose(s)
    assert response_limits(dec, np.array([1.0, 1.0, 1.0]), 0.0)[2] == "zero"


def test_kernel_forcing_has_infinite_q_asymptote(circuit):
    dec = decompose(circuit)
    exp = admittance_expansion(dec, 1.0)
    f = exp.kernel_basis[:, 0]
    assert response_asymptotes(dec, f, 1.0, 1e4)[2] == math.inf


def test_inequality_chain_circuit(circuit):
    assert theorem3_inequality_check(decompose(circuit), E2, 1.0)


def test_inequality_chain_tight_when_decoupled():
    s = build_system(np.diag([1.0, 2.0, 3.0]), np.diag([2.0, 2.0, 0.0]))
    dec = decompose(s)
    assert theorem3_inequality_check(dec, np.array([1.0, 1.0j, 0.0]), 0.7)


def test_inequality_chain_random(rng):
    s = random_system(rng, 6, 3)
    dec = decompose(s)
    w = nonresonant_omega(rng, dec)
    for _ in range(100):
        f = dec.loss_basis @ (rng.normal(size=3) + 1j * rng.normal(size=3))
        assert theorem3_inequality_check(dec, f, w)
    with pytest.raises(InvalidInput):
        theorem3_inequality_check(dec, dec.noloss_basis[:, 0], w)
