"""scikit-learn style front end.

:class:`ChshMaximizer` is a stateless transformer mapping rows of (x, y) to
the maximized CHSH value and its settings. :class:`ThresholdClassifier`
learns the critical mixing parameter for one width asymmetry and then
classifies x values as violating or not.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_reduced_params, check_x_column
from .chsh import VIOLATION_MARGIN, OptimizerOptions, find_threshold, maximize_chsh
from .correlation import CorrelationKind


class _OptimizerParams:
    def _options(self):
        return OptimizerOptions(
            t_max=self.t_max, grid_points=self.grid_points, top_k=self.top_k, face_k=self.face_k
        )


class ChshMaximizer(_OptimizerParams, TransformerMixin, BaseEstimator):
    """Maximize the CHSH functional over measurement times for each row.

    Parameters
    ----------
    kind : {"unitary", "nonunitary", "renormalized"}
        Correlation kernel.
    t_max : float
        Upper limit of every dimensionless time.
    grid_points, top_k, face_k : int
        Multistart seeding, see :class:`~mesonbell.chsh.OptimizerOptions`.
    margin : float
        ``predict`` reports a violation when S exceeds 2 + margin.

    Examples
    --------
    >>> est = ChshMaximizer(kind="renormalized")
    >>> round(float(est.fit_transform([[0.77, 0.0]])[0, 0]), 6)
    2.828427
    """

    def __init__(self, kind="unitary", t_max=8.0, grid_points=13, top_k=32, face_k=4, margin=VIOLATION_MARGIN):
        self.kind = kind
        self.t_max = t_max
        self.grid_points = grid_points
        self.top_k = top_k
        self.face_k = face_k
        self.margin = margin

    def fit(self, X, y=None):
        "Validate parameters; nothing is learned."
        check_reduced_params(X)
        CorrelationKind.parse(self.kind)
        self._options()
        self.n_features_in_ = 2
        return self

    def _results(self, X):
        X = check_reduced_params(X)
        kind = CorrelationKind.parse(self.kind)
        opts = self._options()
        return [maximize_chsh(kind, float(x), float(y), opts) for x, y in X]

    def transform(self, X):
        """Return an (n, 5) array: s_max followed by (tau_a, tau_a', tau_b, tau_b')."""
        return np.array([[r.s_max, *r.settings.as_tuple()] for r in self._results(X)]).reshape(-1, 5)

    def predict(self, X):
        return self.transform(X)[:, 0] > 2.0 + self.margin


class ThresholdClassifier(_OptimizerParams, ClassifierMixin, BaseEstimator):
    """Learn the critical x above which the CHSH inequality is violated.

    ``fit`` ignores its inputs apart from validation; the threshold depends
    only on the hyper-parameters. After fitting, ``critical_x_`` and
    ``result_`` hold the bisection outcome.
    """

    def __init__(self, kind="unitary", width_asymmetry=0.0, tol=1e-3, t_max=8.0, grid_points=13, top_k=32, face_k=4):
        self.kind = kind
        self.width_asymmetry = width_asymmetry
        self.tol = tol
        self.t_max = t_max
        self.grid_points = grid_points
        self.top_k = top_k
        self.face_k = face_k

    def fit(self, X=None, y=None):
        if X is not None:
            check_x_column(X)
        self.result_ = find_threshold(self.kind, self.width_asymmetry, self.tol, self._options())
        self.critical_x_ = self.result_.critical_x
        self.classes_ = np.array([False, True])
        return self

    def predict(self, X):
        check_is_fitted(self, "critical_x_")
        return check_x_column(X) > self.critical_x_

    def decision_function(self, X):
        check_is_fitted(self, "critical_x_")
        return check_x_column(X) - self.critical_x_
