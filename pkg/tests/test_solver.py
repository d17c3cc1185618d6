from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nanopteron.asymptotics import Side, soliton
from nanopteron.models import DomainError, ModelSpec
from nanopteron.solver import (
    MeasurementError,
    ResolutionError,
    SimulationConfig,
    SpectralField,
    Splitting,
    core_position,
    extract_tail,
    grid,
    linear_step,
    nonlinear_step,
    run,
    sweep_config,
    wavenumbers,
    write_comparison,
    write_snapshots,
    ComparisonRow,
    COMPARISON_HEADER,
)

MODEL = ModelSpec.seventh_order(0.125)


def field_of(fn, L=math.pi, n=256):
    x = grid(L, n)
    return SpectralField(fn(x), L, n)


def test_field_validation():
    with pytest.raises(DomainError):
        SpectralField(np.zeros(300), 1.0, 300)
    with pytest.raises(DomainError):
        SpectralField(np.full(256, np.nan), 1.0, 256)
    with pytest.raises(DomainError):
        SimulationConfig(ModelSpec.lattice_kdv(), 0.5, 1e-3, 1.0)


def test_linear_step_zero_is_identity():
    f = field_of(np.sin)
    assert np.allclose(linear_step(f, MODEL, 0.5, 0.0).samples, f.samples, atol=1e-15)


@pytest.mark.parametrize("m", [1, 3, 7])
def test_linear_step_single_mode_phase(m):
    lam, eps, dt = 0.125, 0.5, 0.3
    f = field_of(lambda x: np.cos(m * x))
    out = linear_step(f, MODEL, eps, dt)
    omega = lam * eps**4 * m**7 - eps**2 * m**5 + m**3
    # u_t = -(lam eps^4 D^7 + eps^2 D^5 + D^3) u moves cos(m x) to cos(m x + omega t)
    assert np.allclose(out.samples, np.cos(m * f.x + omega * dt), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dt=st.floats(1e-4, 10.0))
def test_linear_step_preserves_l2(seed, dt):
    rng = np.random.default_rng(seed)
    f = SpectralField(rng.standard_normal(256), 10.0, 256)
    out = linear_step(f, MODEL, 0.4, dt)
    a, b = np.sum(f.samples**2), np.sum(out.samples**2)
    # the unpaired Nyquist coefficient is kept fixed, so the norm is exact
    assert abs(a - b) <= 1e-12 * a


def test_nonlinear_step_constant_unchanged():
    f = SpectralField(np.full(256, 0.7), 5.0, 256)
    assert np.allclose(nonlinear_step(f, 0.1).samples, 0.7, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_nonlinear_step_conserves_mass(seed):
    rng = np.random.default_rng(seed)
    x = grid(10.0, 256)
    u = sum(rng.normal() * np.cos(m * x * math.pi / 10 + rng.uniform(0, 6)) for m in range(1, 10))
    f = SpectralField(u, 10.0, 256)
    out = nonlinear_step(f, 1e-3)
    assert abs(out.mass() - f.mass()) <= 1e-10 * max(1.0, np.abs(u).sum() * f.dx)


def burgers_exact(x, a, t):
    """u = a sin(x - 6 u t) by fixed-point iteration, valid before breaking."""
    u = a * np.sin(x)
    for _ in range(200):
        u = a * np.sin(x - 6 * u * t)
    return u


def test_nonlinear_step_matches_characteristics():
    a, dt = 0.1, 1e-3
    f = field_of(lambda x: a * np.sin(x))
    out = f
    for _ in range(50):
        out = nonlinear_step(out, dt)
    assert np.max(np.abs(out.samples - burgers_exact(f.x, a, 50 * dt))) < 1e-9


def test_wavenumbers():
    k = wavenumbers(math.pi, 256)
    assert k[1] == pytest.approx(1.0)
    assert k[-1] == pytest.approx(128.0)


def test_zero_length_run_returns_initial():
    cfg = SimulationConfig(MODEL, 0.5, 1e-3, 0.0, L=30, n_points=512, n_snapshots=1)
    final, snaps = run(cfg)
    assert np.array_equal(final.samples, soliton(final.x, 0.0, 1.0))
    assert len(snaps) == 1


def test_run_is_deterministic():
    cfg = SimulationConfig(MODEL, 0.5, 2e-3, 0.2, L=30, n_points=512)
    a, _ = run(cfg)
    b, _ = run(cfg)
    assert np.array_equal(a.samples, b.samples)


def test_resolution_guard():
    with pytest.raises(ResolutionError):
        run(SimulationConfig(MODEL, 0.05, 1e-4, 0.1, L=50, n_points=256))


def plain_kdv_error(dt, splitting=Splitting.STRANG):
    cfg = SimulationConfig(ModelSpec.seventh_order(0.125, c=1.0), 0.5, dt, 1.0, L=30, n_points=512,
                           plain_kdv=True, splitting=splitting)
    final, _ = run(cfg)
    exact = soliton(final.x, 1.0, 1.0)
    return float(np.max(np.abs(final.samples - exact)))


def test_plain_kdv_soliton_second_order():
    errors = [plain_kdv_error(dt) for dt in (4e-3, 2e-3, 1e-3)]
    assert errors[0] < 1e-5
    for a, b in zip(errors, errors[1:]):
        assert 3.6 < a / b < 4.4


def test_lie_splitting_is_first_order():
    e1, e2 = plain_kdv_error(4e-3, Splitting.LIE), plain_kdv_error(2e-3, Splitting.LIE)
    assert 1.7 < e1 / e2 < 2.3


def test_mass_conserved_over_run():
    cfg = SimulationConfig(MODEL, 0.5, 2e-3, 1.0, L=40, n_points=1024)
    final, _ = run(cfg)
    start = soliton(final.x, 0.0, 1.0).sum() * final.dx
    assert abs(final.mass() - start) < 1e-8


def test_snapshots_end_at_final_time():
    cfg = SimulationConfig(MODEL, 0.5, 2e-3, 0.4, L=30, n_points=512, n_snapshots=3)
    final, snaps = run(cfg)
    assert len(snaps) == 3
    assert snaps[-1].time == pytest.approx(0.4)
    assert np.array_equal(snaps[-1].samples, final.samples)
    assert snaps[0].time == pytest.approx(0.3)
    one = run(replace(cfg, n_snapshots=1))[1]
    assert len(one) == 1 and one[0].time == pytest.approx(0.4)


def test_core_position_subgrid():
    L, n = 40.0, 1024
    x = grid(L, n)
    f = SpectralField(0.5 / np.cosh(0.5 * (x - 0.0123)) ** 2, L, n)
    assert abs(core_position(f) - 0.0123) < 0.01 * f.dx


def test_extract_tail_synthetic_sine():
    L, n = 200.0, 8192
    x = grid(L, n)
    k, amp = 5.0, 1e-3
    u = soliton(x, 0.0, 1.0) + amp * np.cos(k * x) * (x > 5)
    f = SpectralField(u, L, n)
    wl = 2 * math.pi / k
    m = extract_tail(f, core_position(f), Side.RIGHT, 10 * wl, wl, 15 * wl, background_speed=1.0)
    assert m.amplitude == pytest.approx(amp, rel=1e-3)
    assert m.frequency_estimate == pytest.approx(k, rel=0.01)
    lo, hi = m.window
    assert hi - lo == pytest.approx(10 * wl)


def test_extract_tail_flat_field():
    f = SpectralField(np.zeros(4096), 200.0, 4096)
    m = extract_tail(f, 0.0, Side.LEFT, 20.0, 2.0, 30.0, background_speed=0.0)
    assert m.amplitude == 0.0 and m.frequency_estimate == 0.0


def test_extract_tail_window_errors():
    f = SpectralField(np.zeros(4096), 100.0, 4096)
    with pytest.raises(MeasurementError):
        extract_tail(f, 0.0, Side.RIGHT, 20.0, 2.0, 12.0)
    with pytest.raises(MeasurementError):
        extract_tail(f, 0.0, Side.RIGHT, 20.0, 2.0, 85.0)
    with pytest.raises(MeasurementError):
        extract_tail(f, 0.0, Side.BOTH, 20.0, 2.0, 30.0)


def test_seventh_order_run_radiates_ahead():
    cfg = sweep_config(0.125, 1.0, 0.5)
    assert cfg.n_points & (cfg.n_points - 1) == 0
    final, _ = run(cfg)
    core = core_position(final)
    wl = 2 * math.pi * 0.5 / 1.0823922002923940
    m = extract_tail(final, core, Side.RIGHT, 10 * wl, wl, 15 * wl)
    assert m.amplitude > 1e-3
    assert m.frequency_estimate == pytest.approx(2 * math.pi / wl, rel=0.2)


def test_writers(tmp_path):
    snaps = [SpectralField(np.linspace(0, 1, 256), 1.0, 256, 0.5)]
    paths = write_snapshots(snaps, tmp_path / "s")
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "x,u" and len(lines) == 257
    assert float(lines[-1].split(",")[1]) == 1.0
    row = ComparisonRow(0.5, 0.1, 0.2, 0.5, 0.5)
    text = write_comparison([row], tmp_path / "c.csv").read_text().splitlines()
    assert text[0] == ",".join(COMPARISON_HEADER)
    assert [float(v) for v in text[1].split(",")] == [0.5, 0.1, 0.2, 0.5, 0.5]
