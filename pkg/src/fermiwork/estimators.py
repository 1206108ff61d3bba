"""scikit-learn wrappers over stacks of covariance matrices.

``X`` is either ``(n_samples, 2n, 2n)`` or flattened to ``(n_samples, 4n^2)``.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import fock, gaussian
from .covariance import energy_cm, validate
from .exceptions import ValidationError
from .modes import CLASSIFY_TOL, as_modes


def check_cm_array(X, n_modes=None) -> np.ndarray:
    """Validate ``X`` as a stack of physical covariance matrices, returned as ``(m, 2n, 2n)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        dim = int(round(np.sqrt(X.shape[1])))
        if dim * dim != X.shape[1]:
            raise ValidationError(f"{X.shape[1]} features do not form a square matrix")
        X = X.reshape(len(X), dim, dim)
    if X.ndim != 3 or X.shape[1] != X.shape[2] or X.shape[1] % 2:
        raise ValidationError(f"expected (n_samples, 2n, 2n) covariance matrices, got shape {X.shape}")
    if len(X) == 0:
        raise ValidationError("no samples")
    if n_modes is not None and X.shape[1] != 2 * n_modes:
        raise ValidationError(f"expected {n_modes}-mode covariance matrices, got {X.shape[1] // 2} modes")
    for m in X:
        validate(m)
    return X


class _CMEstimator(BaseEstimator):
    def __init__(self, omegas=(1.0, 1.0)):
        self.omegas = omegas

    def fit(self, X, y=None):
        self.modes_ = as_modes(self.omegas)
        check_cm_array(X, self.modes_.n_modes)
        self.n_modes_ = self.modes_.n_modes
        return self

    def _check(self, X):
        check_is_fitted(self, "modes_")
        return check_cm_array(X, self.n_modes_)


class GaussianPassivityClassifier(ClassifierMixin, _CMEstimator):
    """Label 1 when no Gaussian unitary lowers the energy by more than ``tol``."""

    def __init__(self, omegas=(1.0, 1.0), tol=CLASSIFY_TOL):
        self.omegas = omegas
        self.tol = tol

    def fit(self, X, y=None):
        super().fit(X, y)
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        """Negated Gaussian ergotropy shifted by ``tol``; positive means passive."""
        X = self._check(X)
        return np.array([self.tol - gaussian.gaussian_ergotropy(m, self.modes_) for m in X])

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(int)


class GaussianEnergyMinimizer(TransformerMixin, _CMEstimator):
    """Maps each covariance matrix to its energy-minimized Gaussian counterpart (flattened)."""

    def transform(self, X):
        X = self._check(X)
        out = [gaussian.gaussian_minimize(m, self.modes_).final_cm.matrix.ravel() for m in X]
        return np.array(out)


class ErgotropyFeatures(TransformerMixin, _CMEstimator):
    """Columns: energy, minimal Gaussian energy, Gaussian ergotropy and, with ``fock=True``, full ergotropy."""

    def __init__(self, omegas=(1.0, 1.0), fock=False):
        self.omegas = omegas
        self.fock = fock

    def transform(self, X):
        X = self._check(X)
        rows = []
        for m in X:
            e = energy_cm(m, self.modes_)
            low = gaussian.minimal_energy(m, self.modes_)
            row = [e, low, max(e - low, 0.0)]
            if self.fock:
                row.append(fock.ergotropy(fock.cm_to_density(m), self.modes_))
            rows.append(row)
        return np.array(rows)

    def get_feature_names_out(self, input_features=None):
        names = ["energy", "min_gaussian_energy", "gaussian_ergotropy"]
        if self.fock:
            names.append("ergotropy")
        return np.array(names, dtype=object)
