"""Input checks shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .energy import EnergyModel
from .exceptions import InvalidInputError

__all__ = ["check_rows", "check_model", "check_positive"]


def check_model(model) -> EnergyModel:
    if not isinstance(model, EnergyModel):
        raise InvalidInputError(
            f"expected an EnergyModel, got {type(model).__name__}"
        )
    return model


def check_rows(X, model: EnergyModel) -> np.ndarray:
    """2-D finite float array whose rows are nodal vectors for ``model``."""
    try:
        X = check_array(X, dtype=float, ensure_2d=True, ensure_all_finite=True)
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from None
    if X.shape[1] != model.size:
        raise InvalidInputError(
            f"rows must have {model.size} nodal values for n = {model.grid.n}, "
            f"got {X.shape[1]}"
        )
    return X


def check_positive(name: str, value) -> float:
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise InvalidInputError(f"{name} must be a positive number, got {value}")
    return value
