"""Model descriptions shared by every module."""

from __future__ import annotations

import enum
from dataclasses import dataclass

# Absolute threshold on |Re chi_x| separating imaginary roots from decaying ones.
CLASS_TOL = 1e-9


class ModelKind(enum.Enum):
    SEVENTH_ORDER = "7kdv"
    HIERARCHY = "hierarchy"
    LATTICE_KDV = "lattice-kdv"
    LATTICE_5KDV = "lattice-5kdv"


class DomainError(ValueError):
    """Parameters outside the domain where an operation is defined."""


class RegimeError(ValueError):
    """Operation requested for the wrong oscillation regime."""


@dataclass(frozen=True)
class ModelSpec:
    """Which equation is studied, with its parameters.

    Parameters
    ----------
    kind : ModelKind
    lam : float
        Coefficient of the highest derivative for the seventh-order and
        hierarchy equations.
    k : int
        Hierarchy index; the equation has order ``2k + 3``.
    kappa : float
        Fifth-derivative coefficient of the discretized fifth-order equation.
    sigma : float
        Lattice time-step ratio ``tau / h``. Carried for the solver only.
    c : float
        Wave speed.
    """

    kind: ModelKind
    lam: float = 0.0
    k: int = 2
    kappa: float = 0.0
    sigma: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.kind in (ModelKind.SEVENTH_ORDER, ModelKind.HIERARCHY) and self.lam == 0:
            raise DomainError("lambda must be nonzero for the seventh-order and hierarchy models")
        if self.kind is ModelKind.SEVENTH_ORDER and self.k != 2:
            raise DomainError("the seventh-order model is the hierarchy member k = 2")
        if self.kind is ModelKind.LATTICE_5KDV and self.kappa == 0:
            raise DomainError("kappa must be nonzero for the discretized fifth-order model")
        if not self.c > 0:
            raise DomainError(f"wave speed must be positive, got {self.c}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.k < 1:
            raise DomainError(f"hierarchy index must be at least 1, got {self.k}")

    @classmethod
    def seventh_order(cls, lam: float, c: float = 1.0) -> "ModelSpec":
        return cls(ModelKind.SEVENTH_ORDER, lam=lam, k=2, c=c)

    @classmethod
    def hierarchy(cls, k: int, lam: float, c: float = 1.0) -> "ModelSpec":
        return cls(ModelKind.HIERARCHY, lam=lam, k=k, c=c)

    @classmethod
    def lattice_kdv(cls, c: float = 1.0, sigma: float = 1.0) -> "ModelSpec":
        return cls(ModelKind.LATTICE_KDV, sigma=sigma, c=c)

    @classmethod
    def lattice_5kdv(cls, kappa: float, c: float = 1.0) -> "ModelSpec":
        return cls(ModelKind.LATTICE_5KDV, kappa=kappa, c=c)
