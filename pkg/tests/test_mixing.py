import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergolab.correlation import Empirical
from ergolab.exceptions import ConvergenceError, InputError
from ergolab.mixing import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    Budget,
    alpha_weak_mixing_check,
    chacon_weak_limit_fit,
    classify,
    enforce_hierarchy,
    rigidity_search,
    split_from_limits,
    u_split,
)
from ergolab.operators import cesaro_limit_operator
from ergolab.schemes import folner_cesaro, subsequence
from ergolab.systems import (
    bernoulli,
    chacon,
    chacon_heights,
    character,
    convergent_denominators,
    cylinder,
    interval_indicator,
    rotation,
    skew_torus,
)

OUTCOMES = (PASS, FAIL, INCONCLUSIVE)
GOLDEN = (5**0.5 - 1) / 2


@given(st.sampled_from(OUTCOMES), st.sampled_from(OUTCOMES), st.sampled_from(OUTCOMES))
def test_hierarchy_is_consistent_and_idempotent(w, m, s):
    out = enforce_hierarchy(w, m, s)
    weak, mild, strong = out
    assert not (strong == PASS and weak == FAIL)
    assert not (strong == PASS and mild != PASS)
    assert not (mild == PASS and weak != PASS)
    assert enforce_hierarchy(*out) == out


def test_classify_rotation_fails_weak():
    v = classify(rotation(2**0.5 - 1), [character(1)], Budget(max_lag=10_000))
    assert (v.weak, v.mild_proxy, v.strong_proxy) == (FAIL, FAIL, FAIL)
    assert v.tolerance == 1e-8
    assert v.to_dict()["evidence"]


def test_classify_skew_torus_fails_weak():
    v = classify(skew_torus(), [character(1, 0), character(0, 1)], Budget(max_lag=2_000))
    assert v.weak == FAIL


def test_classify_chacon_weak_but_not_strong():
    v = classify(chacon(), [cylinder("0").centered_version()], Budget(max_lag=10_000, orbit_length=200_000))
    assert v.weak == PASS
    assert v.strong_proxy == FAIL
    assert v.tolerance == 0.05


def test_classify_bernoulli_passes():
    v = classify(bernoulli(), [cylinder("0").centered_version(), cylinder("01").centered_version()],
                 Budget(max_lag=2_000, orbit_length=200_000))
    assert (v.weak, v.mild_proxy, v.strong_proxy) == (PASS, PASS, PASS)


def test_classify_budget_exhaustion_is_inconclusive():
    v = classify(chacon(), [cylinder("0").centered_version()], Budget(max_lag=100, max_seconds=-1))
    assert (v.weak, v.mild_proxy, v.strong_proxy) == (INCONCLUSIVE,) * 3
    assert v.diagnostics and "budget" in v.diagnostics[0]


def test_classify_rejects_uncentered():
    with pytest.raises(InputError, match="mean-centered"):
        classify(chacon(), [cylinder("0")])
    with pytest.raises(InputError):
        classify(chacon(), [])


def test_rigidity_rotation_convergents():
    alpha = 2**0.5 - 1
    p = rigidity_search(rotation(alpha), interval_indicator(0.0, 0.3),
                        {"convergents": convergent_denominators(alpha, 12), "powers2": [2**k for k in range(4, 16)]})
    assert p.candidate == "convergents"
    assert p.alpha_hat >= 0.99 and p.kind == "rigid"
    assert list(p.sequence) == sorted(p.sequence)


def test_rigidity_chacon_heights():
    p = rigidity_search(chacon(), cylinder("0"), {"heights": chacon_heights(12)},
                        quality=Empirical(orbit_length=1_000_000))
    assert 0.55 <= p.alpha_hat <= 0.75 + 3 * p.stderr
    assert p.kind == "alpha_rigid"


def test_rigidity_bernoulli_none_found():
    p = rigidity_search(bernoulli(), cylinder("0"), [[2**k for k in range(1, 13)], list(range(100, 120))])
    assert p.kind == "none_found"
    assert p.alpha_hat <= 0.55


def test_rigidity_input_checks():
    with pytest.raises(InputError):
        rigidity_search(chacon(), cylinder("0").centered_version(), [[1, 2, 3, 4]])
    with pytest.raises(InputError):
        rigidity_search(chacon(), cylinder("0"), [[1, 2, 3]])


def test_weak_limit_fit_trivial_case():
    fit = chacon_weak_limit_fit(0, [0] * 8, quality=Empirical(orbit_length=100_000))
    assert fit.weights == (1.0,) and fit.powers == (0,)
    assert fit.residual <= 1e-12


def test_weak_limit_fit_along_heights():
    fit = chacon_weak_limit_fit(3, chacon_heights(12)[3:], quality=Empirical(orbit_length=1_000_000))
    assert fit.residual <= 0.05
    assert len(fit.support) <= 3
    assert abs(sum(fit.weights) - 1) <= 1e-9
    # the classical limit is (I + T^-1)/2
    assert set(fit.support) <= {-1, 0}
    assert fit.theta_residual > 5 * fit.residual


def test_weak_limit_fit_random_sparse_sequence():
    seq = sorted(int(n) for n in np.random.default_rng(5).choice(np.arange(1000, 200_000), 16, replace=False))
    fit = chacon_weak_limit_fit(3, seq, quality=Empirical(orbit_length=1_000_000))
    # mixing-like behaviour: the projection model explains the data about as well as any T-combination
    assert fit.theta_residual <= 0.05
    assert fit.residual <= max(0.05, 5 * fit.theta_residual)


def test_weak_limit_fit_power_cap():
    with pytest.raises(InputError):
        chacon_weak_limit_fit(9, [1, 2, 3, 4])


def test_u_split_separates_blocks():
    u = np.diag(np.exp(2j * np.pi * np.array([0.0, 0.0, 2**0.5 - 1, 3**0.5 - 1])))
    d = u_split(u, [folner_cesaro([1000 * 2**k for k in range(8)])], tol=1e-3)
    np.testing.assert_allclose(d.p_kernel, np.diag([0, 0, 1, 1]), atol=1e-9)
    assert d.kernel_rank == 2 and d.is_valid()


def test_u_split_identity_limits(rng):
    q = np.linalg.qr(rng.standard_normal((5, 5)))[0]
    u = q @ np.diag(np.exp(2j * np.pi * np.array([0, 1, 2, 3, 5]) / 6)) @ q.T
    d = u_split(u, [subsequence([6 * k for k in range(1, 13)])])
    np.testing.assert_allclose(d.p_image, np.eye(5), atol=1e-9)


def test_u_split_zero_limits():
    d = split_from_limits([np.zeros((3, 3))])
    np.testing.assert_allclose(d.p_kernel, np.eye(3))


def test_u_split_names_nonconvergent_scheme():
    u = np.diag([np.exp(2j * np.pi / 3)])
    good = subsequence([3 * k for k in range(1, 13)])
    bad = subsequence([2**k for k in range(1, 17)])
    with pytest.raises(ConvergenceError, match=r"scheme #1 \(subsequence\)"):
        u_split(u, [good, bad])


def _cycle_permutation(lengths):
    n = sum(lengths)
    p = np.zeros((n, n))
    start = 0
    for s in lengths:
        for i in range(s):
            p[start + (i + 1) % s, start + i] = 1.0
        start += s
    return p


@given(st.lists(st.integers(1, 6), min_size=1, max_size=5))
def test_finite_extension_block_count(lengths):
    # a union of cycles is a finite extension of its cycle factor; the Cesaro
    # limit is the fibre average, sum of J_s / s, which makes every point
    # alpha-rigid with alpha = 1 / (largest fibre)
    u = _cycle_permutation(lengths)
    windows = [math.lcm(*lengths) * 2**k * 16 for k in range(8)]
    d = u_split(u, [folner_cesaro(windows)], tol=1e-3)
    lim = cesaro_limit_operator(u, windows, tol=1e-3).limit
    alpha = float(np.min(np.real(np.diag(lim))))
    assert alpha == pytest.approx(1 / max(lengths), abs=1e-3)
    # fibres of the image (the generated factor): points per image direction
    blocks = [round(float(1 / lim[i, i].real)) for i in range(u.shape[0])]
    assert d.image_rank == len(lengths)
    assert max(blocks) <= math.floor(1 / alpha + 1e-9)


def test_alpha_one_is_mixing_along_sequence():
    A, B = cylinder("0"), cylinder("01")
    r = alpha_weak_mixing_check(bernoulli(), [(A, A), (A, B)], list(range(50, 70)), 1.0,
                                quality=Empirical(orbit_length=400_000))
    assert r.verdict is True


def test_alpha_zero_is_rigidity():
    qs = convergent_denominators(GOLDEN, 25)
    A, B = interval_indicator(0.1, 0.5), interval_indicator(0.3, 0.9)
    r = alpha_weak_mixing_check(rotation(GOLDEN), [(A, A), (A, B)], qs, 0.0)
    assert r.verdict is True


def test_half_fails_for_rotation():
    qs = convergent_denominators(GOLDEN, 25)
    I, J = interval_indicator(0.0, 0.5), interval_indicator(0.0, 0.25)
    r = alpha_weak_mixing_check(rotation(GOLDEN), [(I, I), (J, J)], qs, 0.5)
    assert r.verdict is False


def test_half_fails_along_every_sequence_by_brute_force():
    # mu(I & T^-n I) = 1/2 - ||n a|| and mu(J & T^-n J) = max(0, 1/4 - ||n a||); the targets
    # 3/8 and 5/32 need ||n a|| = 1/8 and 3/32 at once, so no n comes close to both
    a = GOLDEN
    ns = np.arange(1, 200_000)
    d = np.abs((ns * a + 0.5) % 1.0 - 0.5)
    err = np.maximum(np.abs(0.5 - d - 0.375), np.abs(np.maximum(0, 0.25 - d) - 5 / 32))
    assert err.min() >= 1 / 64 - 1e-12


def test_alpha_check_inconclusive_on_unsettled_window():
    I = interval_indicator(0.0, 0.5)
    r = alpha_weak_mixing_check(rotation(GOLDEN), [(I, I)], list(range(1, 41)), 0.5, tol=0.01)
    assert r.verdict is None
    assert r.pairs[0]["ok"] is None


def test_alpha_check_inputs():
    with pytest.raises(InputError):
        alpha_weak_mixing_check(rotation(GOLDEN), [(character(1), character(1))], [1, 2, 3, 4], 0.5)
    with pytest.raises(InputError):
        alpha_weak_mixing_check(rotation(GOLDEN), [], [1, 2], 1.5)


def test_verdict_json_keys():
    v = classify(rotation(0.3), [character(1)], Budget(max_lag=100))
    d = v.to_dict()
    assert set(d) == {"weak", "mild_proxy", "strong_proxy", "tolerance", "evidence", "diagnostics"}
    for reports in d["evidence"].values():
        for r in reports:
            assert set(r) >= {"scheme", "value", "converged"}
