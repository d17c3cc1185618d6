"""Leading-order solitons, optimal truncation and exponentially small remainders."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .inner import prefactor_caseA, prefactor_caseB, prefactor_lattice
from .models import DomainError, ModelKind, ModelSpec, RegimeError
from .singulant import first_quadrant_root, smallest_imaginary_root, solve_7kdv_singulant

GAMMA = 2


class Side(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    BOTH = "Both"


@dataclass(frozen=True)
class LateOrderAnsatz:
    chi_x: complex
    prefactor: complex
    singularity: complex
    gamma: int = GAMMA

    def __post_init__(self):
        if self.gamma != GAMMA:
            raise DomainError("the singularity-strength offset is fixed at 2")


@dataclass(frozen=True)
class RemainderPrediction:
    amplitude: float
    frequency: float
    envelope_rate: float
    side: Side
    mu: complex
    singularity: complex
    chi_x: complex
    prefactor: complex
    jump: complex | None = None

    def envelope(self, x, c: float, t: float = 0.0) -> np.ndarray:
        """Amplitude envelope at positions ``x``, measured outward from the core."""
        dist = np.abs(np.asarray(x, dtype=float) - c * t)
        return self.amplitude * np.exp(-self.envelope_rate * dist)


@dataclass(frozen=True)
class StokesProfile:
    theta_samples: np.ndarray
    multiplier_values: np.ndarray
    jump: complex
    left_limit: complex
    right_limit: complex


def soliton(x, t: float, c: float):
    """KdV soliton ``c/2 sech^2(sqrt(c)/2 (x - c t))``."""
    if not c > 0:
        raise DomainError("wave speed must be positive")
    arg = 0.5 * math.sqrt(c) * (np.asarray(x, dtype=float) - c * t)
    out = 0.5 * c / np.cosh(arg) ** 2
    return float(out) if out.ndim == 0 else out


def singularity_locations(c: float, t: float) -> tuple[complex, complex]:
    """Nearest complex singularities ``c t +/- i pi / sqrt(c)`` of the soliton."""
    if not c > 0:
        raise DomainError("wave speed must be positive")
    offset = math.pi / math.sqrt(c)
    return complex(c * t, offset), complex(c * t, -offset)


def optimal_truncation(chi_magnitude: float, eps: float) -> int:
    """Index of the least term, ``ceil(|chi| / (2 eps))``, at least 1."""
    if not (chi_magnitude > 0 and eps > 0):
        raise DomainError("chi magnitude and eps must be positive")
    return max(1, math.ceil(chi_magnitude / (2.0 * eps)))


def mu_factor(lam: float, chi_x: complex) -> complex:
    """``7 lam chi^6 + 5 chi^4 + 3 chi^2``."""
    if chi_x == 0:
        raise DomainError("chi_x must be nonzero")
    chi2 = chi_x * chi_x
    return complex(chi2 * (3 + chi2 * (5 + 7 * lam * chi2)))


def inner_half_width(eps: float, chi_x: complex, c: float) -> float:
    """Half-width of the excluded region around the core: three smoothing widths."""
    rho_core = abs(chi_x) * math.pi / math.sqrt(c)
    return 3.0 * math.sqrt(eps * rho_core) / abs(chi_x)


def _require_seventh(model: ModelSpec) -> None:
    if model.kind not in (ModelKind.SEVENTH_ORDER,) and not (
        model.kind is ModelKind.HIERARCHY and model.k == 2
    ):
        raise DomainError("remainder formulas here are for the seventh-order model")


def remainder_caseA(model: ModelSpec, eps: float, j_max: int = 600,
                    prefactor: complex | None = None) -> tuple[RemainderPrediction, RemainderPrediction]:
    """Decaying remainders on either side of the core for ``lam > 1/4``.

    The two conjugate contributions combine into one real oscillation with
    envelope ``4 pi |alpha^2 Lambda| / (|mu| eps^2) exp(-(Re(alpha) |x - ct| + Im(alpha) pi / sqrt(c)) / eps)``.
    """
    _require_seventh(model)
    if not model.lam > 0.25:
        raise RegimeError(f"lambda = {model.lam}: decaying remainders need lambda > 1/4")
    if not eps > 0:
        raise DomainError("eps must be positive")
    alpha = first_quadrant_root(solve_7kdv_singulant(model.lam)).value
    if prefactor is None:
        prefactor = prefactor_caseA(model.lam, j_max)[0].value
    mu = mu_factor(model.lam, alpha)
    c = model.c
    amp = 4 * math.pi * abs(alpha**2 * prefactor) / (abs(mu) * eps**2)
    amp *= math.exp(-alpha.imag * math.pi / (eps * math.sqrt(c)))
    x_plus, x_minus = singularity_locations(c, 0.0)
    common = dict(amplitude=amp, frequency=alpha.imag / eps, envelope_rate=alpha.real / eps,
                  mu=mu, chi_x=alpha, prefactor=complex(prefactor))
    left = RemainderPrediction(side=Side.LEFT, singularity=x_minus, **common)
    right = RemainderPrediction(side=Side.RIGHT, singularity=x_plus, **common)
    return left, right


def remainder_caseB(model: ModelSpec, eps: float, j_max: int = 600,
                    prefactor: float | None = None) -> RemainderPrediction:
    """Symmetric non-decaying remainder for ``0 < lam <= 1/4``.

    Amplitude ``|2 pi beta^2 Lambda / (mu eps^2)| exp(-beta pi / (eps sqrt(c)))``,
    frequency ``beta / eps``. The stored jump is the one-sided switching
    magnitude, twice the symmetric amplitude.
    """
    _require_seventh(model)
    if not 0 < model.lam <= 0.25:
        raise RegimeError(f"lambda = {model.lam}: non-decaying remainders need 0 < lambda <= 1/4")
    if not eps > 0:
        raise DomainError("eps must be positive")
    root = smallest_imaginary_root(solve_7kdv_singulant(model.lam)).value
    beta = root.imag
    if prefactor is None:
        prefactor = prefactor_caseB(model.lam, j_max).value.real
    mu = mu_factor(model.lam, root)
    amp = abs(2 * math.pi * beta**2 * prefactor / (mu * eps**2))
    amp *= math.exp(-beta * math.pi / (eps * math.sqrt(model.c)))
    x_plus, _ = singularity_locations(model.c, 0.0)
    return RemainderPrediction(
        amplitude=amp, frequency=beta / eps, envelope_rate=0.0, side=Side.BOTH, mu=mu,
        singularity=x_plus, chi_x=root, prefactor=complex(prefactor), jump=complex(2 * amp),
    )


def lattice_remainder(h: float, c: float, j_max: int = 200,
                      prefactor: float | None = None) -> RemainderPrediction:
    """Symmetric lattice remainder ``|2 pi^3 Lambda / h^2| exp(-pi^2 / (h sqrt(c)))``.

    The lattice jump has ``h^2`` where the continuum formula has ``mu eps^2``,
    so the stored ``mu`` is 1 and ``h`` plays the role of ``eps``.
    """
    if not (h > 0 and c > 0):
        raise DomainError("h and c must be positive")
    if prefactor is None:
        prefactor = prefactor_lattice(j_max).value.real
    amp = abs(2 * math.pi**3 * prefactor / h**2) * math.exp(-math.pi**2 / (h * math.sqrt(c)))
    x_plus, _ = singularity_locations(c, 0.0)
    return RemainderPrediction(
        amplitude=amp, frequency=math.pi / h, envelope_rate=0.0, side=Side.BOTH,
        mu=complex(1.0), singularity=x_plus, chi_x=complex(0.0, math.pi),
        prefactor=complex(prefactor), jump=complex(2 * amp),
    )


def stokes_jump(eps: float, chi_x: complex, prefactor: complex, mu: complex) -> complex:
    """Change in the Stokes multiplier across the Stokes line, ``-2 pi i chi^2 Lambda / (mu eps^2)``."""
    return -2j * math.pi * chi_x**2 * prefactor / (mu * eps**2)


def stokes_profile(rho: float, eps: float, chi_x: complex, prefactor: complex, mu: complex,
                   s0: complex | str = "symmetric", theta_range: tuple[float, float] = (-1.0, 1.0),
                   n_samples: int = 401) -> StokesProfile:
    """Smooth Stokes switching across ``theta = 0``.

    ``S(theta) = jump * Phi(theta * sqrt(rho / eps)) + S0``, with ``Phi`` the
    standard normal distribution function. ``s0`` is ``"symmetric"``
    (``S = 0`` on the Stokes line), ``"one-sided"`` (``S = 0`` far left) or
    an explicit constant.
    """
    if not (rho > 0 and eps > 0):
        raise DomainError("rho and eps must be positive")
    jump = stokes_jump(eps, chi_x, prefactor, mu)
    if s0 == "symmetric":
        offset = -0.5 * jump
    elif s0 == "one-sided":
        offset = 0.0
    elif isinstance(s0, str):
        raise ValueError(f"unknown S0 choice {s0!r}")
    else:
        offset = complex(s0)
    theta = np.linspace(theta_range[0], theta_range[1], n_samples)
    values = jump * ndtr(theta * math.sqrt(rho / eps)) + offset
    return StokesProfile(theta, values, jump, complex(offset), complex(jump + offset))
