"""scikit-learn style wrappers around the functional core.

Only the pieces with a natural fit/transform or fit/predict reading are
wrapped.  Parameters live in ``__init__`` untouched, fitted state ends in an
underscore, so ``get_params``/``set_params``/``clone`` behave as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .correlation import CorrelationSequence, Empirical
from .exceptions import InputError
from .mixing import Budget, classify, rigidity_search
from .operators import as_complex_matrix, image_kernel_decomposition
from .spectral import fejer_estimate, wiener_atom_mass


def _complex_2d(Y, dim: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.ndim != 2 or Y.shape[1] != dim:
        raise InputError(f"expected vectors of length {dim}")
    if not np.all(np.isfinite(Y)):
        raise InputError("vectors contain non-finite entries")
    return Y


class ImageKernelSplitter(TransformerMixin, BaseEstimator):
    """Split vectors along ``Im V`` (closure) and ``Ker V`` for a normal matrix ``V``.

    ``fit(V)`` computes the two projectors; ``transform(Y)`` returns the image
    components of the rows of ``Y`` and ``kernel_component`` the rest.
    """

    def __init__(self, tol=None):
        self.tol = tol

    def fit(self, X, y=None):
        V = as_complex_matrix(X, "V")
        self.decomposition_ = image_kernel_decomposition(V, self.tol)
        self.p_image_ = self.decomposition_.p_image
        self.p_kernel_ = self.decomposition_.p_kernel
        self.n_features_in_ = V.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "p_image_")
        Y = _complex_2d(X, self.n_features_in_)
        return Y @ self.p_image_.T

    def kernel_component(self, X):
        check_is_fitted(self, "p_kernel_")
        Y = _complex_2d(X, self.n_features_in_)
        return Y @ self.p_kernel_.T


class SpectralMeasureEstimator(BaseEstimator):
    """Fejer estimate of the spectral measure from ``c(0), c(1), ..., c(L)``.

    Negative lags are filled in by Hermitian symmetry.  ``predict(theta)``
    reads the smoothed density at the nearest grid point.
    """

    def __init__(self, M=None, L=None, atom_factor=5.0, atom_floor=0.05):
        self.M = M
        self.L = L
        self.atom_factor = atom_factor
        self.atom_floor = atom_floor

    def fit(self, X, y=None):
        c = np.asarray(X, dtype=np.complex128).ravel()
        if c.size < 2 or not np.all(np.isfinite(c)):
            raise InputError("need finite coefficients c(0..L) with L >= 1")
        seq = CorrelationSequence.from_array(c, same_observable=True).with_symmetric_extension()
        est = fejer_estimate(seq, self.M, self.L, self.atom_factor, self.atom_floor)
        self.estimate_ = est
        self.grid_ = est.grid
        self.density_ = est.density
        self.atoms_ = list(est.atoms)
        self.total_mass_ = est.total_mass
        self.wiener_mass_ = wiener_atom_mass(seq, c.size - 1)
        return self

    def predict(self, X):
        check_is_fitted(self, "density_")
        theta = np.mod(np.asarray(X, dtype=float).ravel(), 1.0)
        idx = np.rint(theta * self.grid_.size).astype(int) % self.grid_.size
        return self.estimate_.raw_density[idx]


class MixingClassifier(BaseEstimator):
    """Weak/mild/strong verdicts for a fixed system.

    ``fit(observables)`` runs the joint classification; ``predict`` returns
    the weak-mixing verdict of each observable on its own.
    """

    def __init__(self, system=None, max_lag=10_000, orbit_length=200_000, ip_families=3, seed=0):
        self.system = system
        self.max_lag = max_lag
        self.orbit_length = orbit_length
        self.ip_families = ip_families
        self.seed = seed

    def _budget(self):
        return Budget(max_lag=self.max_lag, orbit_length=self.orbit_length, ip_families=self.ip_families, seed=self.seed)

    def fit(self, X, y=None):
        if self.system is None:
            raise InputError("MixingClassifier needs a system")
        self.verdict_ = classify(self.system, list(X), self._budget())
        return self

    def predict(self, X):
        check_is_fitted(self, "verdict_")
        return np.array([classify(self.system, [o], self._budget()).weak for o in X])


class RigidityEstimator(BaseEstimator):
    """Partial-rigidity constant of an indicator along candidate sequences."""

    def __init__(self, system=None, candidates=None, depth=None, orbit_length=100_000):
        self.system = system
        self.candidates = candidates
        self.depth = depth
        self.orbit_length = orbit_length

    def fit(self, X, y=None):
        if self.system is None or not self.candidates:
            raise InputError("RigidityEstimator needs a system and candidate sequences")
        self.profile_ = rigidity_search(self.system, X, self.candidates, self.depth,
                                        Empirical(orbit_length=self.orbit_length))
        self.alpha_ = self.profile_.alpha_hat
        self.kind_ = self.profile_.kind
        return self
