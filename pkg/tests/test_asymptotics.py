from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from nanopteron.asymptotics import (
    LateOrderAnsatz,
    Side,
    inner_half_width,
    lattice_remainder,
    mu_factor,
    optimal_truncation,
    remainder_caseA,
    remainder_caseB,
    singularity_locations,
    soliton,
    stokes_jump,
    stokes_profile,
)
from nanopteron.inner import lattice_inner_terms
from nanopteron.models import DomainError, ModelSpec, RegimeError
from nanopteron.singulant import WaveRegime, classify_regime

from test_inner import CASE_A_J600, CASE_B_J600, LATTICE_J200

BETA = 1.0823922002923940
ALPHA = complex(0.5, math.sqrt(3) / 2)


def test_soliton_values():
    assert soliton(0.0, 0.0, 1.0) == 0.5
    assert soliton(4.0, 1.0, 4.0) == 2.0
    assert soliton(10.0, 0.0, 1.0) == pytest.approx(0.5 / math.cosh(5.0) ** 2, rel=1e-15)
    assert soliton(10.0, 0.0, 1.0) == pytest.approx(9.0797e-5, rel=1e-4)
    with pytest.raises(DomainError):
        soliton(0.0, 0.0, -1.0)


@pytest.mark.parametrize("c,t,expected", [(1, 0, 1j * math.pi), (4, 1, 4 + 0.5j * math.pi),
                                          (1, 2, 2 + 1j * math.pi)])
def test_singularity_locations(c, t, expected):
    plus, minus = singularity_locations(c, t)
    assert plus == pytest.approx(expected)
    assert minus == pytest.approx(expected.conjugate())


def test_optimal_truncation_examples():
    assert optimal_truncation(math.pi**2, 0.1) == 50
    assert optimal_truncation(2.0, 1.0) == 1
    assert optimal_truncation(0.01, 1.0) == 1


@settings(max_examples=100, deadline=None)
@given(chi=st.floats(0.1, 50), eps=st.floats(0.01, 2))
def test_optimal_truncation_bounds(chi, eps):
    n = optimal_truncation(chi, eps)
    assert n >= 1
    if chi / (2 * eps) >= 1:
        assert 0 <= n - chi / (2 * eps) < 1
    assert optimal_truncation(chi, eps / 2) >= n


def test_mu_factor():
    mu = mu_factor(0.125, 1j * BETA)
    assert mu == pytest.approx(-7 * 0.125 * BETA**6 + 5 * BETA**4 - 3 * BETA**2, rel=1e-14)
    assert mu.imag == 0
    assert mu_factor(1.0, ALPHA.conjugate()) == pytest.approx(mu_factor(1.0, ALPHA).conjugate())
    with pytest.raises(DomainError):
        mu_factor(1.0, 0)


def test_case_b_amplitude_oracle_chain():
    mu = -7 * 0.125 * BETA**6 + 5 * BETA**4 - 3 * BETA**2
    eps = 0.5
    expected = abs(2 * math.pi * BETA**2 * CASE_B_J600 / (mu * eps**2)) * math.exp(-BETA * math.pi / eps)
    pred = remainder_caseB(ModelSpec.seventh_order(0.125), eps)
    assert pred.amplitude == pytest.approx(expected, rel=1e-10)
    assert pred.frequency == pytest.approx(BETA / eps)
    assert pred.envelope_rate == 0.0
    assert pred.side is Side.BOTH
    assert pred.jump == pytest.approx(2 * pred.amplitude)


def test_case_b_beyond_all_orders():
    model = ModelSpec.seventh_order(0.125)
    amps = [remainder_caseB(model, e, prefactor=CASE_B_J600).amplitude for e in (0.2, 0.1, 0.05)]
    # amplitude / eps^p still vanishes for a large power p
    assert amps[2] / 0.05**10 < amps[1] / 0.1**10 < amps[0] / 0.2**10


def test_case_a_predictions():
    model = ModelSpec.seventh_order(1.0)
    left, right = remainder_caseA(model, 0.1)
    assert left.side is Side.LEFT and right.side is Side.RIGHT
    for attr in ("amplitude", "frequency", "envelope_rate"):
        assert getattr(left, attr) == getattr(right, attr)
    assert right.envelope_rate == pytest.approx(0.5 / 0.1)
    assert right.frequency == pytest.approx(math.sqrt(3) / 2 / 0.1)
    mu = mu_factor(1.0, ALPHA)
    expected = 4 * math.pi * abs(ALPHA**2 * CASE_A_J600) / (abs(mu) * 0.01)
    expected *= math.exp(-math.sqrt(3) / 2 * math.pi / 0.1)
    assert right.amplitude == pytest.approx(expected, rel=1e-9)
    assert left.singularity.imag < 0 < right.singularity.imag


def test_case_a_envelope_mirrors():
    _, right = remainder_caseA(ModelSpec.seventh_order(1.0, c=2.0), 0.2, prefactor=CASE_A_J600)
    x = np.linspace(-3, 7, 11)
    c, t = 2.0, 1.0
    assert np.allclose(right.envelope(x, c, t), right.envelope(2 * c * t - x, c, t), rtol=1e-14)


def test_regime_guards():
    with pytest.raises(RegimeError):
        remainder_caseA(ModelSpec.seventh_order(0.2), 0.1)
    with pytest.raises(RegimeError):
        remainder_caseB(ModelSpec.seventh_order(0.3), 0.1)


@pytest.mark.parametrize("lam", [0.05, 0.125, 0.25, 0.3, 1.0, 2.0])
def test_envelope_rate_tracks_regime(lam):
    model = ModelSpec.seventh_order(lam)
    regime = classify_regime(model)
    if lam <= 0.25:
        pred = remainder_caseB(model, 0.3, j_max=100)
        assert regime is WaveRegime.GENERALIZED_SOLITARY_WAVE and pred.envelope_rate == 0
    else:
        left, right = remainder_caseA(model, 0.3, j_max=100)
        assert regime is WaveRegime.LOCALIZED_SOLITON and right.envelope_rate > 0


def test_lattice_remainder_value():
    pred = lattice_remainder(0.5, 1.0)
    expected = abs(2 * math.pi**3 * LATTICE_J200 / 0.25) * math.exp(-2 * math.pi**2)
    assert pred.amplitude == pytest.approx(expected, rel=1e-10)
    assert pred.frequency == pytest.approx(2 * math.pi)


def test_lattice_amplitude_increases_with_speed():
    speeds = [1, 2, 5, 10, 20, 50]
    for h in (0.2, 0.5, 1.0):
        amps = [lattice_remainder(h, c, prefactor=LATTICE_J200).amplitude for c in speeds]
        assert all(a < b for a, b in zip(amps, amps[1:]))
    # at a fixed amplitude level the faster waves need smaller h
    target = 1e-6
    h_grid = np.linspace(0.05, 3, 3000)
    crossing = []
    for c in speeds:
        amps = np.array([lattice_remainder(h, c, prefactor=LATTICE_J200).amplitude for h in h_grid])
        crossing.append(h_grid[np.argmax(amps > target)])
    assert all(a > b for a, b in zip(crossing, crossing[1:]))


def test_log_amplitude_affine_in_inverse_parameter():
    model = ModelSpec.seventh_order(0.125, c=2.0)
    eps = np.array([0.1, 0.2, 0.3, 0.5])
    logs = [math.log(remainder_caseB(model, e, prefactor=CASE_B_J600).amplitude * e**2) for e in eps]
    slope = np.polyfit(1 / eps, logs, 1)[0]
    assert slope == pytest.approx(-BETA * math.pi / math.sqrt(2.0), rel=1e-12)
    h = np.array([0.2, 0.4, 0.8])
    logs = [math.log(lattice_remainder(v, 2.0, prefactor=LATTICE_J200).amplitude * v**2) for v in h]
    slope = np.polyfit(1 / h, logs, 1)[0]
    assert slope == pytest.approx(-math.pi**2 / math.sqrt(2.0), rel=1e-12)


def test_stokes_jump_formula():
    mu = mu_factor(0.125, 1j * BETA)
    jump = stokes_jump(0.2, 1j * BETA, CASE_B_J600, mu)
    assert jump == pytest.approx(-2j * math.pi * (1j * BETA) ** 2 * CASE_B_J600 / (mu * 0.04))


def test_symmetric_profile_limits():
    eps = 0.2
    chi = 1j * BETA
    mu = mu_factor(0.125, chi)
    prof = stokes_profile(BETA * math.pi, eps, chi, CASE_B_J600, mu, "symmetric", (-3, 3))
    half = math.pi * BETA**2 * abs(CASE_B_J600) / (abs(mu) * eps**2)
    assert abs(prof.multiplier_values[0]) == pytest.approx(half, rel=1e-8)
    assert abs(prof.multiplier_values[-1]) == pytest.approx(half, rel=1e-8)
    assert prof.multiplier_values[-1] == pytest.approx(-prof.multiplier_values[0], rel=1e-8)
    mid = np.argmin(np.abs(prof.theta_samples))
    assert abs(prof.multiplier_values[mid]) < 1e-12 * half


def test_one_sided_profile():
    mu = mu_factor(0.125, 1j * BETA)
    prof = stokes_profile(2.0, 0.2, 1j * BETA, CASE_B_J600, mu, "one-sided", (-3, 3))
    assert prof.left_limit == 0
    assert prof.right_limit == prof.jump
    assert abs(prof.multiplier_values[0]) < 1e-8 * abs(prof.jump)


@settings(max_examples=50, deadline=None)
@given(re=st.floats(-1e3, 1e3), im=st.floats(-1e3, 1e3), eps=st.floats(0.05, 1.0))
def test_jump_independent_of_constant(re, im, eps):
    mu = mu_factor(1.0, ALPHA)
    prof = stokes_profile(3.0, eps, ALPHA, CASE_A_J600, mu, complex(re, im), (-5, 5))
    diff = prof.multiplier_values[-1] - prof.multiplier_values[0]
    assert abs(diff - prof.jump) <= 1e-8 * abs(prof.jump)
    assert prof.jump == stokes_jump(eps, ALPHA, CASE_A_J600, mu)


def test_transition_width_scales_with_root_eps():
    mu = mu_factor(0.125, 1j * BETA)

    def width(eps):
        prof = stokes_profile(2.0, eps, 1j * BETA, CASE_B_J600, mu, "one-sided", (-2, 2), 40001)
        frac = (prof.multiplier_values / prof.jump).real
        return prof.theta_samples[np.argmax(frac > 0.8413447460685429)]

    assert width(0.04) / width(0.01) == pytest.approx(2.0, rel=1e-3)


def test_inner_half_width_shrinks_like_root_eps():
    a = inner_half_width(0.04, 1j * BETA, 1.0)
    b = inner_half_width(0.01, 1j * BETA, 1.0)
    assert a / b == pytest.approx(2.0)


def test_ansatz_fixes_gamma():
    LateOrderAnsatz(1j * BETA, CASE_B_J600, 1j * math.pi)
    with pytest.raises(DomainError):
        LateOrderAnsatz(1j * BETA, CASE_B_J600, 1j * math.pi, gamma=3)


@pytest.mark.parametrize("h", [0.3, 0.5])
def test_least_term_near_optimal_truncation(h):
    series = lattice_inner_terms(200)
    c = 1.0
    chi_mag = math.pi * abs(complex(1.0, -math.pi / math.sqrt(c)))
    j = np.arange(1, 201)
    log_terms = (np.log(np.abs(series.scaled_terms[1:])) + gammaln(2 * j + 2)
                 + 2 * j * math.log(h) - (2 * j + 2) * math.log(chi_mag))
    j_min = int(j[np.argmin(log_terms)])
    assert abs(j_min - optimal_truncation(chi_mag, h)) <= 2
