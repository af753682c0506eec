"""Input validation shared by the estimator front end."""

import numpy as np
from sklearn.utils import check_array

from .errors import ValidationError


def check_reduced_params(X, default_y=0.0):
    """Coerce ``X`` to an (n, 2) float array of (x, y) rows.

    A single column is read as x with y = ``default_y``.
    """
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[1] == 1:
        X = np.column_stack([X[:, 0], np.full(X.shape[0], default_y)])
    elif X.shape[1] != 2:
        raise ValidationError(f"expected 1 or 2 columns (x[, y]), got {X.shape[1]}", "X")
    if np.any(X[:, 0] < 0):
        raise ValidationError("x must be >= 0", "x")
    if np.any((X[:, 1] < 0) | (X[:, 1] >= 2)):
        raise ValidationError("y must lie in [0, 2)", "y")
    return X


def check_x_column(X):
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    if X.ndim == 2:
        if X.shape[1] < 1:
            raise ValidationError("X has no columns", "X")
        X = X[:, 0]
    if np.any(X < 0):
        raise ValidationError("x must be >= 0", "x")
    return X
