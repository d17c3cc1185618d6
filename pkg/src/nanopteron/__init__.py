"""Exponentially small tails of generalized solitary waves in higher-order and lattice KdV equations."""

__version__ = "0.1.0"

from .models import CLASS_TOL, DomainError, ModelKind, ModelSpec, RegimeError  # noqa: E402

__all__ = ["CLASS_TOL", "DomainError", "ModelKind", "ModelSpec", "RegimeError", "__version__"]
