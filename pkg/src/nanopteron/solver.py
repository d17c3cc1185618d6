"""Split-step pseudo-spectral integration of KdV and seventh-order KdV on a periodic domain.

The linear dispersive part is integrated exactly in Fourier space.
The advective nonlinearity ``u_t + (3 u^2)_x = 0`` is advanced with
classical RK4, using pseudo-spectral derivatives and optional 2/3-rule
dealiasing.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .asymptotics import Side, remainder_caseB, soliton
from .models import DomainError, ModelKind, ModelSpec, RegimeError
from .singulant import first_quadrant_root, smallest_imaginary_root, solve_7kdv_singulant

STEADY_DRIFT = 0.02


class Splitting(enum.Enum):
    LIE = "Lie"
    STRANG = "Strang"


class IntegrationError(RuntimeError):
    """The numerical solution blew up."""


class ResolutionError(ValueError):
    """The grid cannot represent the predicted tail."""


class MeasurementError(ValueError):
    """A tail window is badly placed."""


@dataclass(frozen=True)
class SpectralField:
    samples: np.ndarray
    L: float
    n_points: int
    time: float = 0.0

    def __post_init__(self):
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise DomainError(f"n_points must be a power of two >= 256, got {n}")
        if not self.L > 0:
            raise DomainError("domain half-length must be positive")
        samples = np.asarray(self.samples)
        if samples.shape != (n,) or np.iscomplexobj(samples):
            raise DomainError("samples must be a real array of length n_points")
        if not np.all(np.isfinite(samples)):
            raise DomainError("samples must be finite")

    @property
    def x(self) -> np.ndarray:
        return grid(self.L, self.n_points)

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n_points

    def mass(self) -> float:
        return float(np.sum(self.samples) * self.dx)


@dataclass(frozen=True)
class SimulationConfig:
    """Run parameters. ``plain_kdv`` drops the higher-order dispersion."""

    model: ModelSpec
    eps: float
    dt: float
    t_end: float
    L: float = 50.0
    n_points: int = 4096
    dealias: bool = True
    splitting: Splitting = Splitting.STRANG
    plain_kdv: bool = False
    n_snapshots: int = 0

    def __post_init__(self):
        if self.model.kind is not ModelKind.SEVENTH_ORDER:
            raise DomainError("the solver integrates the seventh-order model (or plain KdV)")
        if not (self.eps > 0 and self.dt > 0 and self.t_end >= 0 and self.L > 0):
            raise DomainError("eps and dt must be positive, t_end non-negative")


@dataclass(frozen=True)
class TailMeasurement:
    amplitude: float
    frequency_estimate: float
    window: tuple[float, float]
    side: Side
    steady: bool = True


@dataclass(frozen=True)
class ComparisonRow:
    eps: float
    numeric_amplitude: float
    asymptotic_amplitude: float
    ratio: float
    rel_error: float
    steady: bool = True
    frequency_estimate: float = math.nan
    config: SimulationConfig | None = field(default=None, repr=False)


def grid(L: float, n: int) -> np.ndarray:
    return -L + 2.0 * L * np.arange(n) / n


def wavenumbers(L: float, n: int) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=2.0 * L / n)


def dispersion_phase(k: np.ndarray, lam: float, eps: float, plain: bool = False) -> np.ndarray:
    """Phase rate ``lam eps^4 k^7 - eps^2 k^5 + k^3`` of each Fourier mode."""
    if plain:
        return k**3
    return lam * eps**4 * k**7 - eps**2 * k**5 + k**3


def group_velocity(k: float, lam: float, eps: float) -> float:
    """``d omega / dk`` for modes ``exp(i(kx - omega t))`` of the linear operator."""
    return -(7 * lam * eps**4 * k**6 - 5 * eps**2 * k**4 + 3 * k**2)


def _linear_multiplier(L, n, lam, eps, dt, plain):
    k = wavenumbers(L, n)
    phase = dispersion_phase(k, lam, eps, plain)
    # the Nyquist mode cannot carry a phase in a real field
    phase[-1] = 0.0
    return np.exp(1j * dt * phase)


def _dealias_mask(L, n, dealias):
    k = wavenumbers(L, n)
    if not dealias:
        return np.ones_like(k)
    return (k <= (2.0 / 3.0) * k[-1]).astype(float)


def linear_step(field: SpectralField, model: ModelSpec, eps: float, dt: float,
                plain_kdv: bool = False) -> SpectralField:
    """Exact step of ``u_t = -(lam eps^4 D^7 + eps^2 D^5 + D^3) u``."""
    mult = _linear_multiplier(field.L, field.n_points, model.lam, eps, dt, plain_kdv)
    uh = np.fft.rfft(field.samples) * mult
    return replace(field, samples=np.fft.irfft(uh, field.n_points), time=field.time + dt)


def _flux_rhs(ik_masked: np.ndarray, n: int):
    def rhs(uh):
        u = np.fft.irfft(uh, n)
        return -ik_masked * np.fft.rfft(3.0 * u * u)
    return rhs


def _rk4(uh, dt, rhs):
    k1 = rhs(uh)
    k2 = rhs(uh + 0.5 * dt * k1)
    k3 = rhs(uh + 0.5 * dt * k2)
    k4 = rhs(uh + dt * k3)
    return uh + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def nonlinear_step(field: SpectralField, dt: float, dealias: bool = True) -> SpectralField:
    """One RK4 step of ``u_t + (3 u^2)_x = 0``."""
    n = field.n_points
    ik = 1j * wavenumbers(field.L, n) * _dealias_mask(field.L, n, dealias)
    uh = _rk4(np.fft.rfft(field.samples), dt, _flux_rhs(ik, n))
    return replace(field, samples=np.fft.irfft(uh, n), time=field.time + dt)


def predicted_tail_wavenumber(model: ModelSpec, eps: float) -> float:
    roots = solve_7kdv_singulant(model.lam)
    root = smallest_imaginary_root(roots)
    if root is None:
        root = first_quadrant_root(roots)
    return root.value.imag / eps


def check_resolution(config: SimulationConfig) -> None:
    if config.plain_kdv:
        return
    k_tail = predicted_tail_wavenumber(config.model, config.eps)
    k_nyq = math.pi * config.n_points / (2.0 * config.L)
    if k_tail >= (2.0 / 3.0) * k_nyq:
        raise ResolutionError(
            f"tail wavenumber {k_tail:.4g} is not below 2/3 of the Nyquist wavenumber {k_nyq:.4g}"
        )


def initial_field(config: SimulationConfig) -> SpectralField:
    x = grid(config.L, config.n_points)
    return SpectralField(soliton(x, 0.0, config.model.c), config.L, config.n_points, 0.0)


def run(config: SimulationConfig) -> tuple[SpectralField, list[SpectralField]]:
    """Integrate from the soliton initial condition to ``t_end``.

    The step is shortened slightly if needed so that a whole number of steps
    reaches ``t_end``. Snapshots are spaced evenly over the final quarter
    of the run, ending at ``t_end``.
    """
    check_resolution(config)
    n, L = config.n_points, config.L
    start = initial_field(config)
    n_steps = math.ceil(config.t_end / config.dt - 1e-9) if config.t_end > 0 else 0
    if n_steps == 0:
        return start, [start] if config.n_snapshots else []
    dt = config.t_end / n_steps
    lam, eps, plain = config.model.lam, config.eps, config.plain_kdv
    if config.splitting is Splitting.STRANG:
        lin = _linear_multiplier(L, n, lam, eps, 0.5 * dt, plain)
    else:
        lin = _linear_multiplier(L, n, lam, eps, dt, plain)
    ik = 1j * wavenumbers(L, n) * _dealias_mask(L, n, config.dealias)
    rhs = _flux_rhs(ik, n)

    snap_steps: dict[int, None] = {}
    if config.n_snapshots:
        first = 0.75 * n_steps
        for s in np.linspace(n_steps, first, config.n_snapshots)[::-1]:
            snap_steps[int(round(s))] = None
    snapshots = []
    uh = np.fft.rfft(start.samples)
    for step in range(1, n_steps + 1):
        if config.splitting is Splitting.STRANG:
            uh = lin * _rk4(lin * uh, dt, rhs)
        else:
            uh = _rk4(lin * uh, dt, rhs)
        if step % 64 == 0 or step == n_steps or step in snap_steps:
            if not np.all(np.isfinite(uh)):
                raise IntegrationError(f"solution became non-finite by t = {step * dt:.6g}")
        if step in snap_steps:
            snapshots.append(SpectralField(np.fft.irfft(uh, n), L, n, step * dt))
    final = SpectralField(np.fft.irfft(uh, n), L, n, n_steps * dt)
    return final, snapshots


def core_position(field: SpectralField) -> float:
    """Location of the maximum, refined by a parabola through the three top samples."""
    u = field.samples
    i = int(np.argmax(u))
    a, b, c = u[i - 1], u[i], u[(i + 1) % len(u)]
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    return float(field.x[i] + shift * field.dx)


def _tail_window(field, core, side, width, wavelength, center_offset):
    if wavelength is None:
        wavelength = width / 10.0
    if center_offset is None:
        center_offset = 15.0 * wavelength
    sign = 1.0 if side is Side.RIGHT else -1.0
    centre = core + sign * center_offset
    lo, hi = centre - 0.5 * width, centre + 0.5 * width
    if min(abs(lo - core), abs(hi - core)) < 5 * wavelength or (lo - core) * (hi - core) < 0:
        raise MeasurementError("tail window is within 5 wavelengths of the core")
    if lo < -field.L + 5 * wavelength or hi > field.L - 5 * wavelength:
        raise MeasurementError("tail window is within 5 wavelengths of the periodic boundary")
    return lo, hi


def extract_tail(field: SpectralField, core: float, side: Side, window_width: float,
                 wavelength: float | None = None, center_offset: float | None = None,
                 background_speed: float | None = None) -> TailMeasurement:
    """Half peak-to-trough amplitude and dominant wavenumber in a window beside the core.

    The window is centred ``center_offset`` from ``core`` (default 15
    wavelengths). A soliton with the measured peak height, or of speed
    ``background_speed`` if given, is subtracted first.
    """
    if side is Side.BOTH:
        raise MeasurementError("measure one side at a time")
    lo, hi = _tail_window(field, core, side, window_width, wavelength, center_offset)
    x = field.x
    sel = (x >= lo) & (x <= hi)
    if sel.sum() < 8:
        raise MeasurementError("window holds too few grid points")
    speed = background_speed if background_speed is not None else 2.0 * float(field.samples.max())
    u = field.samples[sel]
    if speed > 0:
        u = u - soliton(x[sel] - core, 0.0, speed)
    amplitude = 0.5 * float(u.max() - u.min())
    detrended = u - u.mean()
    pad = 8 * len(detrended)
    spectrum = np.abs(np.fft.rfft(detrended * np.hanning(len(detrended)), pad))
    freqs = 2 * np.pi * np.fft.rfftfreq(pad, d=field.dx)
    freq = float(freqs[int(np.argmax(spectrum))]) if amplitude > 0 else 0.0
    return TailMeasurement(amplitude, freq, (lo, hi), side, True)


def tail_history(snapshots: list[SpectralField], side: Side, window_width: float,
                 wavelength: float | None = None, center_offset: float | None = None) -> TailMeasurement:
    """Measure every snapshot; ``steady`` if the amplitude drifts less than 2%."""
    if not snapshots:
        raise MeasurementError("no snapshots to measure")
    measures = [extract_tail(s, core_position(s), side, window_width, wavelength, center_offset)
                for s in snapshots]
    amps = np.array([m.amplitude for m in measures])
    last = measures[-1]
    drift = (amps.max() - amps.min()) / amps[-1] if amps[-1] > 0 else math.inf
    return replace(last, steady=bool(drift < STEADY_DRIFT))


def sweep_config(lam: float, c: float, eps: float, dt: float = 2e-3, points_per_wavelength: int = 24,
                 n_snapshots: int = 5) -> SimulationConfig:
    """Run parameters that let the radiated tail fill the default window.

    The window spans 10 to 20 tail wavelengths ahead of the core. The tail
    front moves away from the core at ``c_g - c`` and must clear the window
    for the whole final quarter of the run. The domain holds the front
    without wrapping.
    """
    model = ModelSpec.seventh_order(lam, c)
    k_tail = predicted_tail_wavenumber(model, eps)
    wavelength = 2 * math.pi / k_tail
    excess = group_velocity(k_tail, lam, eps) - c
    if excess <= 0:
        raise MeasurementError("tail does not outrun the core at this eps")
    t_end = (22.0 * wavelength / excess) / 0.75
    front = (c + excess) * t_end
    L = 1.1 * front + 25.0 * wavelength
    n = 256
    while 2 * L / n > wavelength / points_per_wavelength or 2 * L / n > 0.25:
        n *= 2
    return SimulationConfig(model, eps, dt, t_end, L, n, n_snapshots=n_snapshots)


def check_window_coverage(config: SimulationConfig, far_edge_offset: float) -> None:
    """Raise if the tail front misses the window or wraps into it."""
    k_tail = predicted_tail_wavenumber(config.model, config.eps)
    c = config.model.c
    cg = group_velocity(k_tail, config.model.lam, config.eps)
    t_fill = 0.75 * config.t_end
    if (cg - c) * t_fill < far_edge_offset:
        raise MeasurementError("tail front has not crossed the window by the final quarter of the run")
    if cg * config.t_end > config.L:
        raise MeasurementError("tail front wraps around the periodic domain")


def compare_one(lam: float, c: float, eps: float, config: SimulationConfig | None = None,
                j_max: int = 600) -> ComparisonRow:
    if config is None:
        config = sweep_config(lam, c, eps)
    wavelength = 2 * math.pi / predicted_tail_wavenumber(config.model, eps)
    width, offset = 10 * wavelength, 15 * wavelength
    check_window_coverage(config, offset + 0.5 * width)
    _, snaps = run(replace(config, n_snapshots=max(config.n_snapshots, 2)))
    tail = tail_history(snaps, Side.RIGHT, width, wavelength, offset)
    numeric = 0.5 * tail.amplitude
    predicted = remainder_caseB(config.model, eps, j_max).amplitude
    ratio = numeric / predicted
    return ComparisonRow(eps, numeric, predicted, ratio, abs(ratio - 1.0), tail.steady,
                         tail.frequency_estimate, config)


def compare_sweep(lam: float, c: float, eps_values, template: dict | None = None,
                  j_max: int = 600) -> list[ComparisonRow]:
    """Halved one-sided numerical tail amplitude against the symmetric prediction, per eps.

    ``template`` holds overrides for ``sweep_config`` (``dt``,
    ``points_per_wavelength``, ``n_snapshots``) and optionally fixed
    ``t_end``, ``L`` and ``n_points`` applied to every run.
    """
    if not 0 < lam <= 0.25:
        raise RegimeError(f"lambda = {lam} is not in the oscillatory regime")
    template = dict(template or {})
    fixed = {k: template.pop(k) for k in ("t_end", "L", "n_points", "dealias", "splitting")
             if k in template}
    rows = []
    for eps in eps_values:
        cfg = sweep_config(lam, c, eps, **template)
        if fixed:
            cfg = replace(cfg, **fixed)
        rows.append(compare_one(lam, c, eps, cfg, j_max))
    return rows


def write_snapshots(snapshots: list[SpectralField], directory: Path, stem: str = "snapshot") -> list[Path]:
    """One ``x,u`` CSV per snapshot, values at round-trip precision."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, snap in enumerate(snapshots):
        path = directory / f"{stem}_{i:04d}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "u"])
            for xv, uv in zip(snap.x, snap.samples):
                writer.writerow([repr(float(xv)), repr(float(uv))])
        paths.append(path)
    return paths


COMPARISON_HEADER = ["eps", "numeric_amplitude", "asymptotic_amplitude", "ratio", "rel_error"]


def write_comparison(rows: list[ComparisonRow], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPARISON_HEADER)
        for r in rows:
            writer.writerow([repr(float(getattr(r, name))) for name in COMPARISON_HEADER])
    return path
