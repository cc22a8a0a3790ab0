import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.correlation import CorrelationSequence, correlation
from ergolab.exceptions import InputError
from ergolab.runner import adversarial_vdc_example, random_equivalence_model
from ergolab.schemes import (
    MAX_IP_GENERATORS,
    LimitScheme,
    cyclic_shift,
    difference_grid,
    evaluate_limit,
    folner_cesaro,
    ip_grid,
    ip_sums,
    paired_sums,
    reports_to_csv,
    scheme_zero_equivalence,
    subsequence,
    sumset_grid,
    tail_sup,
    vdc_conclusion_check,
    vdc_inequality_check,
    vdc_probes,
)
from ergolab.systems import cantor_fourier, character, rotation, skew_torus


def _const(value, L):
    return CorrelationSequence({n: value for n in range(L + 1)})


def test_scheme_validation():
    with pytest.raises(InputError):
        subsequence([3, 2])
    with pytest.raises(InputError):
        subsequence([1])
    with pytest.raises(InputError):
        folner_cesaro([0, 4])
    with pytest.raises(InputError):
        ip_grid(range(1, MAX_IP_GENERATORS + 2))
    with pytest.raises(InputError):
        ip_grid([1, 2], depth=3)
    with pytest.raises(InputError):
        LimitScheme("ultrafilter")


@pytest.mark.parametrize("scheme", [subsequence([1, 5, 9]), folner_cesaro([4, 8]), ip_grid([1, 2, 4], 2), tail_sup(7)])
def test_scheme_json_roundtrip(scheme):
    assert LimitScheme.from_json(scheme.to_json()) == scheme


def test_rotation_folner_average_is_one():
    c = correlation(rotation(2**0.5 - 1), character(1), lags=range(10_000))
    r = evaluate_limit(c, folner_cesaro([1250, 2500, 5000, 10_000]), tol=1e-9)
    assert r.converged and abs(r.value - 1) <= 1e-12


@pytest.mark.parametrize("scheme", [subsequence(range(1, 40)), folner_cesaro([10, 20, 40]),
                                    ip_grid([1, 2, 4, 8, 16]), tail_sup(3)])
def test_zero_sequence_has_zero_limit(scheme):
    r = evaluate_limit(_const(0, 40), scheme)
    assert r.value == 0 and r.converged


def test_cantor_along_powers_of_four():
    lags = [4**k for k in range(1, 15)]
    c = correlation(skew_torus("cantor4"), character(0, -1), lags=lags)
    r = evaluate_limit(c, subsequence(lags), tol=1e-8)
    assert r.converged
    assert abs(r.value - cantor_fourier(1)) <= 1e-8


def test_missing_lags_are_listed():
    with pytest.raises(InputError, match="lacks 1 lags: 9"):
        evaluate_limit(_const(1, 8), subsequence([2, 9]))


def test_reports_csv():
    text = reports_to_csv([evaluate_limit(_const(0.5, 10), tail_sup(2))])
    header, row = text.strip().splitlines()
    assert header.startswith("scheme,re,im")
    assert row.startswith("tail_sup,0.5,0.0")


def test_grids():
    assert ip_sums([1, 10, 100]) == [1, 10, 11, 100, 101, 110, 111]
    assert sumset_grid([1, 3, 7]) == [4, 8, 10]
    assert difference_grid([1, 3, 7]) == [2, 4, 6]
    assert paired_sums([1, 2, 3], [10, 20, 30]) == [11, 22, 33]
    assert sumset_grid([1, 2], [10, 20]) == [11, 12, 21, 22]


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=80))
def test_tail_sup_dominates_other_schemes(vals):
    # when tail_sup gives 0, every other scheme reading the tail gives 0 too
    c = CorrelationSequence({n: v / 100 for n, v in enumerate(vals)})
    sup = evaluate_limit(c, tail_sup(0)).value.real
    L = len(vals)
    if L >= 2:
        assert abs(evaluate_limit(c, subsequence(range(L))).value) <= sup + 1e-15
        assert abs(evaluate_limit(c, folner_cesaro([1, L])).value) <= sup + 1e-15
    gens = [g for g in (1, 2, 4, 8, 16) if g < L // 2 + 1][:3]
    if gens and sum(gens) < L:
        assert abs(evaluate_limit(c, ip_grid(gens)).value) <= sup + 1e-15


@settings(max_examples=40)
@given(st.integers(0, 2**31 - 1))
def test_scheme_zero_equivalence_on_matrix_models(seed):
    rng = np.random.default_rng(seed)
    u, f, probes, idx = random_equivalence_model(rng)
    out = scheme_zero_equivalence(u, f, idx, probes)
    assert len(set(out.values())) == 1
    # the zero verdict tracks whether f has a component on the discrete block
    D = u.shape[0] - np.count_nonzero(np.diag(u))
    assert out["sequence"] == (not np.any(f[D:]))


def test_shift_correlations_vanish_off_period():
    s = cyclic_shift(12)
    e0 = np.eye(12)[0]
    for n in range(1, 12):
        assert abs(np.linalg.matrix_power(s, n) @ e0 @ e0) == 0


def test_vdc_inequality_examples(rng):
    e = np.eye(8)[3]
    r = vdc_inequality_check([e] * 10)
    assert r.lhs == pytest.approx(1) and r.rhs == pytest.approx(1) and r.holds
    r = vdc_inequality_check(np.eye(8))
    assert r.rhs == pytest.approx(1 / 8) and r.lhs <= 1 / 8 + 1e-12 and r.holds
    with pytest.raises(InputError):
        vdc_inequality_check([2 * e])


def test_vdc_inequality_random_trials():
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(1, 30))
        z = rng.standard_normal((N, 8)) + 1j * rng.standard_normal((N, 8))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        r = vdc_inequality_check(z, probes=vdc_probes(8, seed=seed))
        assert r.holds
        assert r.rhs <= r.bound + 1e-12


@given(st.integers(1, 12), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_vdc_inequality_is_cauchy_schwarz(N, d, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((N, d)) + 1j * rng.standard_normal((N, d))
    z *= rng.random((N, 1)) / np.linalg.norm(z, axis=1, keepdims=True)
    assert vdc_inequality_check(z, seed=seed).holds


def test_vdc_conclusion_constant_is_vacuous():
    n = 40
    G = np.ones((n, n))
    y = np.ones(n)
    r = vdc_conclusion_check(G, subsequence(range(n)), y, tol=0.05)
    assert r.double_converged and abs(r.double_limit - 1) < 1e-12 and r.verdict is True


def test_vdc_conclusion_random_phase():
    rng = np.random.default_rng(3)
    d, n = 2**14, 64
    X = np.exp(2j * np.pi * rng.random((n, d))) / np.sqrt(d)
    r = vdc_conclusion_check(X @ X.conj().T, subsequence(range(n)), X.conj()[:, 0], tol=0.05)
    assert abs(r.double_limit) <= 0.05 and abs(r.single_limit) <= 0.05
    assert r.verdict is True


def test_vdc_conclusion_adversarial_is_not_vacuous():
    G, X, _ = adversarial_vdc_example()
    np.testing.assert_allclose(X @ X.conj().T, G, atol=1e-9)
    n = G.shape[0]
    win = list(range(n))[-n // 4:]
    y = X[win].mean(axis=0)
    y /= np.linalg.norm(y)
    tol = 0.1
    r = vdc_conclusion_check(G, subsequence(range(n)), X.conj() @ y, tol)
    assert abs(r.double_limit) <= tol  # hypothesis met
    assert abs(r.single_limit) > tol  # y was picked to push the single limit up
    assert abs(r.single_limit) <= np.sqrt(tol) + tol
    assert r.verdict is True


def test_vdc_conclusion_nonconvergent_double_limit():
    n = 40
    G = np.diag(np.ones(n))
    G[np.triu_indices(n, 1)] = np.resize([1.0, -1.0], n * (n - 1) // 2)
    r = vdc_conclusion_check(G, subsequence(range(n)), np.zeros(n), tol=0.05)
    assert r.verdict is None
    with pytest.raises(InputError):
        vdc_conclusion_check(G, folner_cesaro([1, 2]), np.zeros(n))
