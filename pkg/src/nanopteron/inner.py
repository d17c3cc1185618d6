"""Inner-region recurrences near a singularity, and the prefactor limits they define.

Near a leading-order singularity, the inner solution is ``sum_j v_j / z**(2j+2)``.
The coefficients ``v_j`` grow factorially, so every recurrence here is
iterated in the scaled variable

    t_j = v_j * chi_x**(2j+2) / Gamma(2j+2),

which tends to the prefactor constant as ``j -> infinity``. Factorial
ratios become bounded polynomial factors. Convolution weights are
formed from log-gamma differences with a single exponentiation per term.

Two forms are available for each recurrence:

* ``"consistent"`` (default) comes from matching the inner equation order by
  order. Its linear part reproduces the singulant equation, and its
  lowest-order balance is satisfied by the seed ``v_0 = -2``.
* ``"printed"`` is the form in wide circulation. Its binomial and
  falling-factorial weights do not match the inner equation. It is kept
  for cross-checking small-order coefficients and should not be used to
  extract prefactors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .models import CLASS_TOL, DomainError, ModelSpec, RegimeError
from .singulant import first_quadrant_root, smallest_imaginary_root, solve_7kdv_singulant

CONV_TOL = 1e-6
CONV_WINDOW = 10
FORMS = ("consistent", "printed")


@dataclass(frozen=True)
class InnerSeries:
    model: ModelSpec
    scaled_terms: np.ndarray
    raw_log_magnitudes: np.ndarray
    j_max: int
    chi_x: complex
    form: str = "consistent"

    def raw_term(self, j: int) -> complex:
        """Unscaled coefficient ``v_j``; only safe below the overflow horizon."""
        return complex(self.scaled_terms[j] * math.exp(gammaln(2 * j + 2)) / self.chi_x ** (2 * j + 2))


@dataclass(frozen=True)
class PrefactorEstimate:
    value: complex
    history: tuple[tuple[int, complex], ...] = field(repr=False)
    converged: bool
    rel_change_last: float


def _check_form(form: str) -> None:
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}, got {form!r}")


def _finish(model, t, chi_x, j_max, form) -> InnerSeries:
    js = np.arange(j_max + 1)
    with np.errstate(divide="ignore"):
        log_v = np.log(np.abs(t)) + gammaln(2 * js + 2) - (2 * js + 2) * math.log(abs(chi_x))
    return InnerSeries(model, t, log_v, j_max, complex(chi_x), form)


def _guard(value: complex, j: int) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise OverflowError(f"scaled inner term became non-finite at j = {j}")
    return value


def kdv7_inner_terms(
    lam: float, chi_x: complex, j_max: int, v0: float = -2.0, form: str = "consistent"
) -> InnerSeries:
    """Scaled inner coefficients of the seventh-order equation.

    ``consistent``::

        [(2k+3)(2k+2) + 6 v0] t_k = -(2k+3)(2k+2) (chi^2 t_{k-1} + lam chi^4 t_{k-2})
                                    - 3 chi^-2 sum_{r=1}^{k-1} w(k, r) t_r t_{k-r}

    ``printed``::

        [(2k+4)(2k+3)(2k+2) + 12 k v0] t_k = (2k+4)(2k+3)(2k+2) (chi^2 t_{k-1} + lam chi^4 t_{k-2})
                                             + 6 chi^-2 sum_{r=1}^{k-1} (2k-2r+2) w(k, r) t_r t_{k-r}

    with ``w(k, r) = Gamma(2r+2) Gamma(2k-2r+2) / Gamma(2k+2)``.
    """
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    if j_max < 1:
        raise DomainError("j_max must be at least 1")
    _check_form(form)
    chi_x = complex(chi_x)
    chi2 = chi_x * chi_x
    chi4 = chi2 * chi2
    inv_chi2 = 1.0 / chi2
    t = np.zeros(j_max + 1, dtype=complex)
    t[0] = v0 * chi2
    lg = gammaln(2 * np.arange(j_max + 1) + 2)
    for k in range(1, j_max + 1):
        prev1 = t[k - 1]
        prev2 = t[k - 2] if k >= 2 else 0.0
        r = np.arange(1, k)
        w = np.exp(lg[r] + lg[k - r] - lg[k])
        conv = np.sum(w * t[r] * t[k - r]) if k >= 2 else 0.0
        if form == "consistent":
            poly = (2 * k + 3) * (2 * k + 2)
            rhs = -poly * (chi2 * prev1 + lam * chi4 * prev2) - 3.0 * inv_chi2 * conv
            t[k] = _guard(rhs / (poly + 6.0 * v0), k)
        else:
            poly = (2 * k + 4) * (2 * k + 3) * (2 * k + 2)
            conv_p = np.sum((2 * k - 2 * r + 2) * w * t[r] * t[k - r]) if k >= 2 else 0.0
            rhs = poly * (chi2 * prev1 + lam * chi4 * prev2) + 6.0 * inv_chi2 * conv_p
            t[k] = _guard(rhs / (poly + 12.0 * k * v0), k)
    return _finish(ModelSpec.seventh_order(lam), t, chi_x, j_max, form)


def lattice_inner_terms(j_max: int, v0: float = -2.0, form: str = "consistent") -> InnerSeries:
    """Scaled inner coefficients of the lattice KdV equation, scaled against ``chi_x = i*pi``.

    Equation ``k`` (``k >= 1``) fixes ``v_k``::

        sum_{r=1}^{k+1} C(2k+4, 2r+1) (4^r - 1) v_{k+1-r}
          + 3 sum_{l=0}^{k} sum_{r=0}^{l} B(k, l, r) v_{k-l} v_{l-r} = 0

    with ``B = C(2l+2, 2r+1)`` in the consistent form and ``B = C(2k+4, 2r+1)``
    in the printed form. Equation ``k = 0`` is the seed balance. It holds for
    ``v_0 = -2`` in the consistent form and for ``v_0 = -1`` in the printed form.
    """
    if j_max < 1:
        raise DomainError("j_max must be at least 1")
    _check_form(form)
    chi_x = complex(0.0, math.pi)
    chi2 = chi_x * chi_x
    log_chi2 = 2.0 * math.log(math.pi)
    n = j_max + 1
    t = np.zeros(n, dtype=complex)
    t[0] = v0 * chi2
    # chi^(2r) / Gamma(2r+2), bounded for chi = i*pi
    rr = np.arange(n + 1)
    lin_w = (-1.0) ** rr * np.exp(rr * log_chi2 - gammaln(2 * rr + 2))
    lin_w = lin_w * (4.0 ** rr.astype(float) - 1.0)
    sign_r = (-1.0) ** rr
    for k in range(1, n):
        r_lin = np.arange(2, k + 2)
        lin = np.sum(lin_w[r_lin] * t[k + 1 - r_lin])
        lg_k = gammaln(2 * k + 5)
        coef_tk = lin_w[1]
        nonlin = 0.0 + 0.0j
        for l in range(k + 1):
            r = np.arange(l + 1)
            a = k - l
            b = l - r
            if form == "consistent":
                logw = gammaln(2 * l + 3) + gammaln(2 * a + 2) - gammaln(2 * r + 2) - lg_k
            else:
                logw = (gammaln(2 * a + 2) + gammaln(2 * b + 2)
                        - gammaln(2 * r + 2) - gammaln(2 * k + 4 - 2 * r))
            w = 3.0 * sign_r[r] * np.exp(logw + r * log_chi2)
            # the two products t_k * t_0 carry the unknown
            unknown = np.zeros(l + 1, dtype=bool)
            if a == k:
                unknown |= b == 0
            if a == 0:
                unknown |= b == k
            coef_tk += np.sum(w[unknown]) * t[0]
            known = ~unknown
            nonlin += np.sum(w[known] * t[a] * t[b[known]])
        t[k] = _guard(-(lin + nonlin) / coef_tk, k)
    return _finish(ModelSpec.lattice_kdv(), t, chi_x, j_max, form)


def _estimate(history: list[tuple[int, complex]]) -> PrefactorEstimate:
    values = np.array([v for _, v in history])
    tail = values[-(CONV_WINDOW + 1):]
    rel = np.abs(np.diff(tail)) / np.maximum(np.abs(tail[1:]), np.finfo(float).tiny)
    rel_change = float(np.mean(rel)) if len(rel) else math.inf
    return PrefactorEstimate(
        value=complex(values[-1]),
        history=tuple((int(j), complex(v)) for j, v in history),
        converged=bool(rel_change < CONV_TOL),
        rel_change_last=rel_change,
    )


def three_term_estimates(series: InnerSeries) -> list[tuple[int, complex]]:
    t = series.scaled_terms
    return [(j, complex((t[j] + t[j + 1] + t[j + 2]) / 3.0)) for j in range(series.j_max - 1)]


def single_term_estimates(series: InnerSeries) -> list[tuple[int, complex]]:
    return [(j, complex(v)) for j, v in enumerate(series.scaled_terms)]


def prefactor_caseA(lam: float, j_max: int = 600, v0: float = -2.0) -> tuple[PrefactorEstimate, PrefactorEstimate]:
    """Prefactor pair for the decaying case ``lam > 1/4``.

    Each singularity carries two late-order contributions, with singulants
    ``alpha`` and ``conj(alpha)``. Averaging three consecutive scaled terms
    cancels the other contribution, because
    ``1 + (alpha/conj(alpha))**2 + (alpha/conj(alpha))**4 = 0``.
    """
    if not lam > 0.25:
        raise RegimeError(f"lambda = {lam} is not in the decaying regime (needs lambda > 1/4)")
    if j_max < 12:
        raise DomainError("j_max must be at least 12")
    alpha = first_quadrant_root(solve_7kdv_singulant(lam)).value
    first = _estimate(three_term_estimates(kdv7_inner_terms(lam, alpha, j_max, v0)))
    second = _estimate(three_term_estimates(kdv7_inner_terms(lam, alpha.conjugate(), j_max, v0)))
    if abs(second.value - first.value.conjugate()) > 1e-6 * abs(first.value):
        raise ArithmeticError("prefactor pair is not a conjugate pair")
    return first, second


def prefactor_caseB(lam: float, j_max: int = 600, v0: float = -2.0) -> PrefactorEstimate:
    """Real prefactor for ``0 < lam <= 1/4``, scaled against ``i*beta``."""
    if not 0 < lam <= 0.25:
        raise RegimeError(f"lambda = {lam} is not in the oscillatory regime (needs 0 < lambda <= 1/4)")
    if j_max < 12:
        raise DomainError("j_max must be at least 12")
    beta_root = smallest_imaginary_root(solve_7kdv_singulant(lam))
    est = _estimate(single_term_estimates(kdv7_inner_terms(lam, beta_root.value, j_max, v0)))
    if abs(est.value.imag) >= CLASS_TOL:
        raise ArithmeticError("prefactor has a spurious imaginary part")
    return est


def prefactor_lattice(j_max: int = 200, v0: float = -2.0) -> PrefactorEstimate:
    """Real prefactor of the lattice KdV equation, scaled against ``i*pi``."""
    if j_max < 12:
        raise DomainError("j_max must be at least 12")
    return _estimate(single_term_estimates(lattice_inner_terms(j_max, v0)))


def richardson_limit(estimate: PrefactorEstimate, order: int = 2, points: int = 40) -> complex:
    """Extrapolate the history assuming ``Lambda + a_1/j + ... + a_order/j**order``.

    A least-squares fit over the last ``points`` entries. Reported
    separately from ``estimate.value`` and never substituted for it.
    """
    js = np.array([j for j, _ in estimate.history[-points:]], dtype=float)
    vals = np.array([v for _, v in estimate.history[-points:]])
    if np.any(js <= 0) or len(js) <= order + 1:
        raise DomainError("history too short for extrapolation")
    design = np.vander(1.0 / js, order + 1, increasing=True)
    coef_re, *_ = np.linalg.lstsq(design, vals.real, rcond=None)
    coef_im, *_ = np.linalg.lstsq(design, vals.imag, rcond=None)
    return complex(coef_re[0], coef_im[0])
