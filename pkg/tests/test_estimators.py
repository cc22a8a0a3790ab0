import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ergolab.estimators import (
    ImageKernelSplitter,
    MixingClassifier,
    RigidityEstimator,
    SpectralMeasureEstimator,
)
from ergolab.exceptions import InputError
from ergolab.operators import random_normal
from ergolab.systems import (
    bernoulli,
    chacon,
    chacon_heights,
    character,
    cylinder,
    rotation,
)


def test_params_and_clone():
    est = SpectralMeasureEstimator(M=64, L=8, atom_factor=4.0)
    assert est.get_params() == {"M": 64, "L": 8, "atom_factor": 4.0, "atom_floor": 0.05}
    twin = clone(est).set_params(atom_floor=0.1)
    assert twin.atom_floor == 0.1 and est.atom_floor == 0.05
    s = ImageKernelSplitter(tol=1e-9)
    assert clone(s).get_params() == {"tol": 1e-9}
    m = MixingClassifier(system=chacon(), max_lag=500)
    assert clone(m).get_params()["max_lag"] == 500


@pytest.mark.parametrize("est,X", [
    (ImageKernelSplitter(), np.eye(2)),
    (SpectralMeasureEstimator(), [0.0]),
])
def test_not_fitted(est, X):
    with pytest.raises(NotFittedError):
        (est.transform if hasattr(est, "transform") else est.predict)(X)


def test_image_kernel_splitter(rng):
    v = random_normal(6, rng, kernel_rank=2)
    sp = ImageKernelSplitter().fit(v)
    Y = rng.standard_normal((5, 6)) + 1j * rng.standard_normal((5, 6))
    img, ker = sp.transform(Y), sp.kernel_component(Y)
    np.testing.assert_allclose(img + ker, Y, atol=1e-10)
    np.testing.assert_allclose(ker @ v.T, 0, atol=1e-9)
    assert sp.decomposition_.kernel_rank == 2
    with pytest.raises(InputError):
        sp.transform(np.ones(5))
    assert np.allclose(sp.fit_transform(v), v @ sp.p_image_.T)


def test_spectral_estimator_two_atoms():
    L = 256
    n = np.arange(L + 1)
    c = 0.5 * np.exp(2j * np.pi * n * 0.2) + 0.5 * np.exp(2j * np.pi * n * 0.7)
    est = SpectralMeasureEstimator().fit(c)
    locs = sorted(round(t, 2) for t, _ in est.atoms_)
    assert locs == [0.2, 0.7]
    assert est.total_mass_ == pytest.approx(1.0)
    assert est.wiener_mass_ == pytest.approx(0.5, abs=0.02)
    assert est.predict([0.2])[0] > est.predict([0.45])[0]
    with pytest.raises(InputError):
        SpectralMeasureEstimator().fit([1.0])


def test_mixing_classifier():
    clf = MixingClassifier(system=bernoulli(), max_lag=1_000, orbit_length=100_000)
    obs = [cylinder("0").centered_version()]
    clf.fit(obs)
    assert clf.verdict_.weak == "pass"
    assert list(clf.predict(obs)) == ["pass"]
    rot = MixingClassifier(system=rotation(2**0.5 - 1), max_lag=1_000).fit([character(1)])
    assert rot.verdict_.weak == "fail"
    with pytest.raises(InputError):
        MixingClassifier().fit(obs)


def test_rigidity_estimator():
    est = RigidityEstimator(system=chacon(), candidates={"heights": chacon_heights(11)}, orbit_length=400_000)
    est.fit(cylinder("0"))
    assert 0.55 <= est.alpha_ <= 0.8
    assert est.kind_ == "alpha_rigid"
    with pytest.raises(InputError):
        RigidityEstimator(system=chacon()).fit(cylinder("0"))
