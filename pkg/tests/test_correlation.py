import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import toeplitz

from ergolab.correlation import (
    CorrelationSequence,
    Empirical,
    correlation,
    exact_correlation,
)
from ergolab.exceptions import CapabilityError, InputError
from ergolab.systems import (
    BaseMeasure,
    cantor_fourier,
    chacon,
    character,
    cylinder,
    iet,
    interval_indicator,
    rotation,
    rudin_shapiro,
    rudin_shapiro_sign,
    skew_torus,
)


def _min_toeplitz_eig(c: CorrelationSequence, L: int) -> float:
    col = np.array([c[n] for n in range(L + 1)])
    return float(np.linalg.eigvalsh(toeplitz(np.conj(col), col)).min())


def test_rotation_eigenfunction():
    a = 0.1234567
    c = correlation(rotation(a), character(1), lags=range(-5, 50))
    for n in range(-5, 50):
        assert abs(c[n] - np.exp(2j * np.pi * n * a)) <= 1e-12
    c = correlation(rotation(a), character(1), character(2), lags=range(10))
    assert max(abs(v) for v in c.values.values()) == 0


def test_exact_requires_supported_pair():
    with pytest.raises(CapabilityError):
        correlation(chacon(), cylinder("0"), lags=[1])
    with pytest.raises(CapabilityError):
        correlation(rotation(0.3), interval_indicator(0, 0.5), lags=[1])


def test_empirical_requires_long_orbit():
    with pytest.raises(InputError):
        Empirical(orbit_length=9_999)


def test_skew_torus_along_powers_of_four():
    s = skew_torus("cantor4")
    lags = [4**k for k in range(1, 15)]
    c = correlation(s, character(0, 1), lags=lags)
    target = cantor_fourier(-1)
    for n in lags:
        assert abs(c[n] - target) <= 1e-8


def _skew_quadrature(base, a, b, c, d, n, pts):
    # <T^n e_{d,c}, e_{a,b}>: y integrates out to [c == b]
    if c != b:
        return 0j
    return np.mean(np.exp(2j * np.pi * (d + c * n - a) * pts))


def test_skew_torus_formula_against_quadrature():
    rng = np.random.default_rng(7)
    # every point of the depth-14 Cantor set, weight 2**-14 each
    x = np.zeros(1)
    for k in range(1, 15):
        x = np.concatenate([x, x + 4.0**-k])
    lebesgue_pts = (np.arange(2**14) + 0.5) / 2**14
    for base, pts in ((BaseMeasure("cantor4", 40), x), (BaseMeasure("lebesgue"), lebesgue_pts)):
        s = skew_torus(base)
        for _ in range(100):
            a, b, c, d = (int(v) for v in rng.integers(-4, 5, size=4))
            if rng.random() < 0.5:
                b = c
            n = int(rng.integers(-40, 41))
            got = correlation(s, character(d, c), character(a, b), lags=[n])[n]
            assert abs(got - _skew_quadrature(base, a, b, c, d, n, pts)) <= 1e-3


def test_skew_torus_lebesgue_base_is_trivial_off_zero():
    c = correlation(skew_torus(), character(0, 1), lags=range(1, 30))
    assert max(abs(v) for v in c.values.values()) == 0


def test_centered_exact_subtracts_means():
    c = correlation(rotation(0.3), character(0).centered_version(), lags=[0, 1, 5])
    assert max(abs(v) for v in c.values.values()) <= 1e-15


@pytest.mark.parametrize("system,obs", [
    (chacon(), cylinder("0").centered_version()),
    (rudin_shapiro(), rudin_shapiro_sign()),
    (iet((0.2, 0.3, 0.5), (3, 1, 2)), interval_indicator(0.1, 0.6).centered_version()),
    (rotation(2**0.5 - 1), interval_indicator(0.0, 0.5)),
])
def test_empirical_positive_definiteness(system, obs):
    L = 64
    c = correlation(system, obs, lags=range(-L, L + 1), quality=Empirical(orbit_length=100_000))
    assert c.same_observable
    for n in range(1, L + 1):
        assert c[-n] == np.conj(c[n])
        assert abs(c[n]) <= c.mass.real + 1e-9 + 5 * c.stderr[n]
    assert _min_toeplitz_eig(c, L) >= -1e-6 * c.mass.real


@settings(max_examples=25)
@given(st.floats(0.0, 0.999), st.integers(-3, 3), st.integers(1, 40))
def test_exact_positive_definiteness(alpha, k, L):
    c = correlation(rotation(alpha), character(k), lags=range(L + 1))
    assert _min_toeplitz_eig(c, L) >= -1e-6 * abs(c.mass)
    c = correlation(skew_torus("cantor4"), character(k, 1), lags=range(L + 1))
    assert _min_toeplitz_eig(c, L) >= -1e-6


def test_empirical_matches_exact_on_rotation():
    alpha = 2**0.5 - 1
    lags = [0, 1, 3, 10, 100]
    ex = correlation(rotation(alpha), character(1), lags=lags)
    em = correlation(rotation(alpha), character(1), lags=lags, quality=20_000)
    for n in lags:
        assert abs(ex[n] - em[n]) <= 1e-9


def test_empirical_skew_torus_agrees_with_exact():
    s = skew_torus("cantor4")
    ex = correlation(s, character(1, 1), lags=[1, 4, 16])
    em = correlation(s, character(1, 1), lags=[1, 4, 16], quality=Empirical(orbit_length=200_000))
    for n in (1, 4, 16):
        assert abs(ex[n] - em[n]) <= 5 * em.stderr[n] + 1e-3


def test_chacon_cesaro_decay():
    # weak mixing: averaged |c(n)| for the centered cylinder [0]; two orbit lengths must agree
    lags = range(1, 10_001)
    q1 = Empirical(orbit_length=1_000_000)
    q2 = Empirical(orbit_length=500_000)
    vals = []
    for q in (q1, q2):
        c = correlation(chacon(), cylinder("0").centered_version(), lags=lags, quality=q)
        vals.append(np.mean(np.abs(c.array(lags))))
    assert vals[0] <= 0.05
    assert abs(vals[0] - vals[1]) <= 0.02


def test_csv_roundtrip():
    c = correlation(chacon(), cylinder("0").centered_version(), lags=range(20), quality=20_000)
    back = CorrelationSequence.from_csv(c.to_csv())
    assert back.lags == c.lags
    for n in c.lags:
        assert back[n] == c[n]
        assert back.stderr[n] == c.stderr[n]
    assert c.to_csv().splitlines()[0] == "lag,re,im,stderr"


def test_symmetric_extension_and_missing_lags():
    c = exact_correlation(rotation(0.2), character(1), character(1), range(5))
    ext = c.with_symmetric_extension()
    assert ext.symmetric_range() == 4
    with pytest.raises(InputError, match="lacks"):
        c.array([7])
    with pytest.raises(InputError):
        CorrelationSequence({0: 1, 1: 0.5}).with_symmetric_extension()
