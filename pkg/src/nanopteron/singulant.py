"""Singulant equations: roots, regime classification and critical parameters.

All polynomial singulant equations in scope are even in ``chi``.
They are solved as polynomials in ``y = chi**2``
(companion-matrix eigenvalues), and the two square roots of each ``y``
are then taken.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq, minimize_scalar

from .models import CLASS_TOL, DomainError, ModelKind, ModelSpec


class Regime(enum.Enum):
    PURE_IMAGINARY = "PureImaginary"
    COMPLEX_DECAYING = "ComplexDecaying"


class Family(enum.Enum):
    PRIMARY = "Primary"
    SECONDARY = "Secondary"


class WaveRegime(enum.Enum):
    GENERALIZED_SOLITARY_WAVE = "GeneralizedSolitaryWave"
    LOCALIZED_SOLITON = "LocalizedSoliton"
    KAPPA_INDEPENDENT_OSCILLATIONS = "KappaIndependentOscillations"
    KAPPA_DEPENDENT_OSCILLATIONS = "KappaDependentOscillations"


@dataclass(frozen=True)
class SingulantRoot:
    value: complex
    regime: Regime
    family: Family = Family.PRIMARY
    branch_index: int = 0

    def __post_init__(self):
        if self.value == 0:
            raise DomainError("chi_x = 0 is not an admissible singulant root")


@dataclass(frozen=True)
class BifurcationResult:
    parameter_name: str
    critical_value: float
    bracket: tuple[float, float]
    iterations: int


def classify(value: complex) -> Regime:
    if abs(value.real) <= CLASS_TOL:
        return Regime.PURE_IMAGINARY
    return Regime.COMPLEX_DECAYING


def _make_root(value: complex, family: Family = Family.PRIMARY, branch: int = 0) -> SingulantRoot:
    return SingulantRoot(complex(value), classify(complex(value)), family, branch)


def _poly_scale(coeffs: np.ndarray, s: float) -> float:
    return float(np.sum(np.abs(coeffs) * abs(s) ** np.arange(len(coeffs))))


def _snap_real_pairs(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """Replace near-real conjugate pairs by the real roots they approximate.

    Eigenvalue solvers resolve a (near-)double real root only to about the
    square root of machine precision, and may return it as a complex pair.
    The real polynomial is inspected on the real line near such a pair.
    If it changes sign there, the pair is replaced by the two bracketed real
    roots. If it only touches zero to within rounding, the pair becomes a
    double real root.
    """
    roots = roots.astype(complex).copy()
    p = lambda s: float(npoly.polyval(s, coeffs))  # noqa: E731
    for idx in np.flatnonzero(roots.imag > 0):
        y = roots[idx]
        if y.imag > 1e-6 * max(1.0, abs(y)):
            continue
        partner = np.flatnonzero(np.abs(roots - y.conjugate()) <= 4 * y.imag + 1e-300)
        partner = [j for j in partner if j != idx]
        if not partner:
            continue
        j = partner[0]
        half = 8.0 * y.imag
        grid = np.linspace(y.real - half, y.real + half, 401)
        vals = npoly.polyval(grid, coeffs)
        crossings = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
        if len(crossings) >= 2:
            a = crossings[0]
            b = crossings[-1]
            r1 = brentq(p, grid[a], grid[a + 1], xtol=1e-300, rtol=4e-16)
            r2 = brentq(p, grid[b], grid[b + 1], xtol=1e-300, rtol=4e-16)
            roots[idx], roots[j] = complex(r1), complex(r2)
            continue
        best = minimize_scalar(lambda s: abs(p(s)), bounds=(grid[0], grid[-1]),
                               method="bounded", options={"xatol": 1e-15 * max(1.0, abs(y))})
        s_star = float(best.x)
        if abs(p(s_star)) <= 64 * np.finfo(float).eps * _poly_scale(coeffs, s_star):
            roots[idx] = roots[j] = complex(s_star)
    return roots


def _polish(coeffs: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    """A few guarded Newton steps; a step is kept only if it lowers |p|."""
    dcoeffs = npoly.polyder(coeffs)
    out = roots.copy()
    for i, r in enumerate(out):
        if r.imag == 0:
            continue
        for _ in range(steps):
            pr = npoly.polyval(r, coeffs)
            dp = npoly.polyval(r, dcoeffs)
            if dp == 0:
                break
            trial = r - pr / dp
            if abs(npoly.polyval(trial, coeffs)) < abs(pr):
                r = trial
            else:
                break
        out[i] = r
    return out


def _even_polynomial_roots(y_coeffs: np.ndarray) -> list[complex]:
    """Roots in chi of P(chi**2) = 0 given the coefficients of P (low to high)."""
    y_roots = npoly.polyroots(y_coeffs)
    y_roots = _polish(y_coeffs, y_roots)
    y_roots = _snap_real_pairs(y_coeffs, y_roots)
    out = []
    for y in y_roots:
        if y.imag == 0 and y.real < 0:
            w = complex(0.0, math.sqrt(-y.real))
        else:
            w = cmath.sqrt(y)
        out.extend((w, -w))
    return out


def _sort_key(r: SingulantRoot):
    return (abs(r.value.imag), abs(r.value.real), -r.value.imag, -r.value.real)


def hierarchy_singulant_roots(k: int, lam: float) -> list[SingulantRoot]:
    """All ``2k`` roots of ``lam*chi**(2k) + sum_{r<k} chi**(2r) = 0``."""
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    if lam == 0:
        raise DomainError("lambda = 0 degenerates the singulant polynomial")
    y_coeffs = np.ones(k + 1)
    y_coeffs[k] = lam
    roots = [_make_root(v) for v in _even_polynomial_roots(y_coeffs)]
    return sorted(roots, key=_sort_key)


def solve_7kdv_singulant(lam: float) -> list[SingulantRoot]:
    """Four roots of ``lam*chi**4 + chi**2 + 1 = 0``."""
    return hierarchy_singulant_roots(2, lam)


def hierarchy_residual(k: int, lam: float, chi: complex) -> float:
    """Residual of the hierarchy singulant relative to its largest monomial."""
    terms = [chi ** (2 * r) for r in range(k)] + [lam * chi ** (2 * k)]
    return abs(sum(terms)) / max(1.0, max(abs(t) for t in terms))


def smallest_imaginary_root(roots: list[SingulantRoot]) -> SingulantRoot | None:
    """PureImaginary root with the smallest positive imaginary part."""
    cands = [r for r in roots if r.regime is Regime.PURE_IMAGINARY and r.value.imag > 0]
    return min(cands, key=lambda r: r.value.imag) if cands else None


def first_quadrant_root(roots: list[SingulantRoot]) -> SingulantRoot:
    """Decaying root with positive real and imaginary parts and the smallest |Im|."""
    cands = [r for r in roots if r.value.real > CLASS_TOL and r.value.imag > 0]
    if not cands:
        raise DomainError("no root in the open first quadrant")
    return min(cands, key=lambda r: (r.value.imag, r.value.real))


def _has_imaginary_root(k: int, lam: float) -> bool:
    return any(r.regime is Regime.PURE_IMAGINARY for r in hierarchy_singulant_roots(k, lam))


def lambda_crit(k: int, tol: float = 1e-10, max_iter: int = 400) -> BifurcationResult:
    """Largest lambda for which the even-``k`` hierarchy has imaginary singulant roots.

    Bisection on the predicate "some root is purely imaginary". The
    returned value is the midpoint of a bracket of width at most ``tol``.
    """
    if k < 2 or k % 2:
        raise DomainError(
            f"k = {k}: odd k has imaginary roots for every lambda > 0, so no critical value exists"
        )
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = 1e-6, 1.0
    iterations = 0
    while not _has_imaginary_root(k, lo):
        lo /= 2.0
        iterations += 1
        if iterations > 200:
            raise DomainError("predicate false on the whole search bracket")
    while _has_imaginary_root(k, hi):
        lo, hi = hi, 2.0 * hi
        iterations += 1
        if iterations > 200:
            raise DomainError("predicate true on the whole search bracket")
    while hi - lo > tol and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _has_imaginary_root(k, mid):
            lo = mid
        else:
            hi = mid
        iterations += 1
    return BifurcationResult("lambda", 0.5 * (lo + hi), (lo, hi), iterations)


def lattice_kdv_singulants(n_max: int) -> list[SingulantRoot]:
    """Roots ``i*pi*N`` of ``[1 - cosh(chi)] sinh(chi) = 0`` for ``0 < |N| <= n_max``.

    The dominant pair (``N = +1, -1``) comes first.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be at least 1, got {n_max}")
    roots = []
    for n in range(1, n_max + 1):
        for sign in (1, -1):
            value = complex(0.0, sign * math.pi * n)
            roots.append(SingulantRoot(value, Regime.PURE_IMAGINARY, Family.PRIMARY, sign * n))
    return roots


def lattice_kdv_residual(chi: complex) -> float:
    return abs((1 - cmath.cosh(chi)) * cmath.sinh(chi))


def _reduce_strip(value: complex) -> tuple[complex, int]:
    """Shift by multiples of 4*pi*i into the strip -2*pi < Im <= 2*pi."""
    period = 4 * math.pi
    shift = math.ceil((value.imag - 2 * math.pi) / period)
    return complex(value.real, value.imag - shift * period), shift


def lattice_5kdv_singulants(
    kappa: float, n_max: int = 1, offsets: tuple[int, ...] = (0,)
) -> tuple[list[SingulantRoot], list[SingulantRoot]]:
    """Both root families of the discretized fifth-order equation.

    The first family is ``i*pi*N``. The second family is every sign choice of
    ``4*pi*i*N +/- log(+/- sqrt(1 - (1 +/- sqrt(1 - 4*kappa)) / (2*kappa)))``,
    reduced to the strip ``-2*pi < Im <= 2*pi`` and shifted by each requested
    offset ``N``.
    """
    if kappa == 0:
        raise DomainError("kappa = 0 reduces to the lattice KdV model; use lattice_kdv_singulants")
    family1 = lattice_kdv_singulants(n_max)
    disc = cmath.sqrt(1 - 4 * kappa)
    base: list[complex] = []
    for s_disc in (1, -1):
        q = (1 + s_disc * disc) / (2 * kappa)
        w = cmath.sqrt(1 - q)
        for s_inner in (1, -1):
            logw = cmath.log(s_inner * w)
            for s_outer in (1, -1):
                value, _ = _reduce_strip(s_outer * logw)
                if not any(abs(value - b) <= 1e-12 * max(1.0, abs(b)) for b in base):
                    base.append(value)
    family2 = []
    for n in offsets:
        for value in base:
            shifted = value + 4j * math.pi * n
            if shifted != 0:
                family2.append(_make_root(shifted, Family.SECONDARY, n))
    return family1, sorted(family2, key=_sort_key)


def lattice_5kdv_residual(kappa: float, chi: complex) -> float:
    """Residual of the quadratic ``kappa*q**2 - q + 1 = 0`` in ``q = 1 - exp(2 chi)``.

    This is the relation that the second family inverts.
    """
    q = 1 - cmath.exp(2 * chi)
    return abs(kappa * q * q - q + 1) / max(1.0, abs(kappa * q * q))


def dominant_frequency(*families: list[SingulantRoot]) -> float | None:
    """Smallest positive |Im| among PureImaginary roots of the given families."""
    freqs = [abs(r.value.imag) for fam in families for r in fam
             if r.regime is Regime.PURE_IMAGINARY and r.value.imag != 0]
    return min(freqs) if freqs else None


def kappa_crit(tol: float = 1e-10, lo: float = 0.01, hi: float = 1.0) -> BifurcationResult:
    """Smallest kappa > 0 for which the second family is purely imaginary."""

    def imaginary(kappa: float) -> bool:
        _, fam2 = lattice_5kdv_singulants(kappa)
        return any(r.regime is Regime.PURE_IMAGINARY for r in fam2)

    if imaginary(lo) or not imaginary(hi):
        raise DomainError("kappa bracket does not straddle the regime change")
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if imaginary(mid):
            hi = mid
        else:
            lo = mid
        iterations += 1
    return BifurcationResult("kappa", 0.5 * (lo + hi), (lo, hi), iterations)


def classify_regime(model: ModelSpec) -> WaveRegime:
    if model.kind is ModelKind.LATTICE_KDV:
        return WaveRegime.GENERALIZED_SOLITARY_WAVE
    if model.kind is ModelKind.LATTICE_5KDV:
        if model.kappa < 0.25:
            return WaveRegime.KAPPA_INDEPENDENT_OSCILLATIONS
        return WaveRegime.KAPPA_DEPENDENT_OSCILLATIONS
    if _has_imaginary_root(model.k, model.lam):
        return WaveRegime.GENERALIZED_SOLITARY_WAVE
    return WaveRegime.LOCALIZED_SOLITON
