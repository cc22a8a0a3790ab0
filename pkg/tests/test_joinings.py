import itertools
import json
from fractions import Fraction
from math import gcd

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.exceptions import InputError
from ergolab.joinings import (
    FiniteSystem,
    coupling_from_json,
    coupling_support_orbits,
    coupling_to_csv,
    coupling_to_json,
    cyclic,
    extreme_joinings,
    finite_mixing_constant,
    finite_rigidity_constant,
    footnote_coupling,
    from_cycle_lengths,
    intertwines,
    is_disjoint,
    is_joining,
    is_stochastic,
    joining_polytope,
    markov_from_joining,
    non_disjointness_witness,
    product_coupling,
)


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield []
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield [k] + rest


def _systems(max_size):
    for n in range(1, max_size + 1):
        for p in _partitions(n):
            yield from_cycle_lengths(p)
            if len(p) > 1:
                # uneven cycle masses
                w = [Fraction(i + 1) for i in range(len(p))]
                yield from_cycle_lengths(p, [v / sum(w) for v in w])


def _constraints(x, y):
    """Marginal and invariance equations on the n_x * n_y cell masses."""
    nx, ny = x.size, y.size
    var = lambda i, j: i * ny + j
    rows, rhs = [], []
    for i in range(nx):
        r = [0] * (nx * ny)
        for j in range(ny):
            r[var(i, j)] = 1
        rows.append(r)
        rhs.append(x.measure[i])
    for j in range(ny):
        r = [0] * (nx * ny)
        for i in range(nx):
            r[var(i, j)] = 1
        rows.append(r)
        rhs.append(y.measure[j])
    for i in range(nx):
        for j in range(ny):
            r = [0] * (nx * ny)
            r[var(i, j)] += 1
            r[var(x.map[i], y.map[j])] -= 1
            if any(r):
                rows.append(r)
                rhs.append(0)
    return sympy.Matrix(rows), sympy.Matrix(rhs)


def _dimension_oracle(x, y):
    A, _ = _constraints(x, y)
    # the product coupling is strictly positive, so the affine hull dimension is the polytope's
    return A.shape[1] - A.rank()


def _vertex_oracle(x, y):
    """Basic feasible solutions of the constraint system, by brute force over supports."""
    A, b = _constraints(x, y)
    r = A.rank()
    n = A.shape[1]
    found = set()
    for cols in itertools.combinations(range(n), r):
        sub = A[:, list(cols)]
        if sub.rank() < r:
            continue
        sol, params = sub.gauss_jordan_solve(b)
        if params.shape[0]:
            continue
        if any(v < 0 for v in sol):
            continue
        full = [Fraction(0)] * n
        for c, v in zip(cols, sol):
            full[c] = Fraction(int(v.p), int(v.q))
        found.add(tuple(full))
    return found


def _flat(lam):
    return tuple(Fraction(v) for row in lam for v in row)


def test_system_validation():
    with pytest.raises(InputError, match="permutation"):
        FiniteSystem((0, 0), (Fraction(1, 2),) * 2)
    with pytest.raises(InputError, match="invariant"):
        FiniteSystem((1, 0), (Fraction(1, 3), Fraction(2, 3)))
    with pytest.raises(InputError, match="sums"):
        FiniteSystem((0, 1), (Fraction(1, 3), Fraction(1, 3)))
    with pytest.raises(InputError, match="positive"):
        FiniteSystem((0, 1), (Fraction(1), Fraction(0)))
    with pytest.raises(InputError):
        cyclic(65)


def test_system_json_forms():
    assert FiniteSystem.from_json({"cyclic": 3}) == cyclic(3)
    x = from_cycle_lengths([1, 2], ["1/2", "1/2"])
    assert FiniteSystem.from_json(x.to_json()) == x
    assert FiniteSystem.from_json({"cycle_lengths": [1, 2], "weights": ["1/2", "1/2"]}) == x
    assert FiniteSystem.from_json({"map": [1, 0]}) == cyclic(2)


def test_polytope_examples():
    assert joining_polytope(cyclic(2), cyclic(3)).dimension == 0
    assert joining_polytope(cyclic(2), cyclic(2)).dimension == 1
    for n in range(1, 9):
        assert joining_polytope(cyclic(n), cyclic(1)).dimension == 0


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(_systems(4))), st.sampled_from(list(_systems(4))))
def test_polytope_dimension_matches_rank_oracle(x, y):
    poly = joining_polytope(x, y)
    assert poly.dimension == _dimension_oracle(x, y)
    assert is_joining(poly.product, x, y)
    for b in poly.basis:
        assert is_joining(b, x, y)


def test_polytope_basis_is_affinely_independent():
    x, y = from_cycle_lengths([1, 2]), from_cycle_lengths([2, 1, 3])
    poly = joining_polytope(x, y)
    M = sympy.Matrix([[a - p for a, p in zip(_flat(b), _flat(poly.product))] for b in poly.basis])
    assert M.rank() == poly.dimension == 3


def test_cyclic_disjointness_is_coprimality():
    for m in range(1, 9):
        for n in range(1, 9):
            assert is_disjoint(cyclic(m), cyclic(n)) == (gcd(m, n) == 1)
            assert joining_polytope(cyclic(m), cyclic(n)).dimension == gcd(m, n) - 1


def test_self_joining_and_non_ergodic_pairs():
    for n in range(2, 7):
        assert not is_disjoint(cyclic(n), cyclic(n))
    x, y = from_cycle_lengths([1, 2]), from_cycle_lengths([3, 5])
    assert not is_disjoint(x, y)
    w = non_disjointness_witness(x, y)
    assert is_joining(w, x, y) and w != product_coupling(x, y)
    assert non_disjointness_witness(cyclic(3), y) is None


def test_ergodic_component_disjointness():
    # for ergodic x, disjointness from y is decided component by component
    for m in range(1, 9):
        x = cyclic(m)
        for y in _systems(8 - m if m < 8 else 1):
            whole = is_disjoint(x, y)
            parts = all(is_disjoint(x, c) for c in y.ergodic_components())
            assert whole == parts


def test_extreme_joinings_examples():
    v = extreme_joinings(cyclic(2), cyclic(2))
    assert len(v) == 2 and not v.partial
    prod = product_coupling(cyclic(2), cyclic(2))
    mid = [[(a + b) / 2 for a, b in zip(r1, r2)] for r1, r2 in zip(*v.vertices)]
    assert mid == prod
    assert len(extreme_joinings(cyclic(2), cyclic(3))) == 1
    # graph couplings of i -> i + r mod 2 for r = 0, 1
    got = {_flat(m) for m in extreme_joinings(cyclic(4), cyclic(2))}
    want = {tuple(Fraction(1, 4) if (i + r) % 2 == j else Fraction(0) for i in range(4) for j in range(2))
            for r in (0, 1)}
    assert got == want


@pytest.mark.parametrize("x,y", [
    (cyclic(4), cyclic(2)), (cyclic(2), cyclic(2)), (from_cycle_lengths([1, 2]), cyclic(2)),
    (from_cycle_lengths([1, 1]), from_cycle_lengths([1, 2])), (cyclic(3), cyclic(3)),
    (from_cycle_lengths([1, 1, 1], ["1/2", "1/3", "1/6"]), from_cycle_lengths([1, 1, 2], ["1/4", "1/4", "1/2"])),
    (from_cycle_lengths([2, 2]), cyclic(2)),
])
def test_extreme_joinings_match_brute_force(x, y):
    got = {_flat(m) for m in extreme_joinings(x, y)}
    assert got == _vertex_oracle(x, y)


def test_extreme_joinings_budget_and_ergodicity():
    x, y = from_cycle_lengths([1, 2]), from_cycle_lengths([2, 1, 3])
    v = extreme_joinings(x, y)
    assert len(v) == 7
    assert all(is_joining(m, x, y) for m in v)
    x, y = cyclic(6), cyclic(4)
    for m in extreme_joinings(x, y):
        assert coupling_support_orbits(m, x, y) == 1
    part = extreme_joinings(x, y, budget=1)
    assert part.partial and len(part) == 1
    with pytest.raises(InputError):
        extreme_joinings(cyclic(11), cyclic(2))


def test_markov_operators():
    x = cyclic(3)
    M = markov_from_joining(product_coupling(x, x), x, x)
    assert all(row == list(x.measure) for row in M)
    diag = [[x.measure[i] if i == j else Fraction(0) for j in range(3)] for i in range(3)]
    assert markov_from_joining(diag, x, x) == [[Fraction(int(i == j)) for i in range(3)] for j in range(3)]
    x, y = from_cycle_lengths([1, 2]), from_cycle_lengths([2, 1, 3])
    A, B = x.cycles()[0], y.cycles()[0]
    lam = footnote_coupling(x, y, A, B, Fraction(1, 6))
    M = markov_from_joining(lam, x, y)
    assert is_stochastic(M) and intertwines(M, x, y)
    with pytest.raises(InputError):
        markov_from_joining([[1, 0], [0, 0]], cyclic(2), cyclic(2))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(list(_systems(5))), st.sampled_from(list(_systems(5))))
def test_every_vertex_gives_intertwining_markov_operator(x, y):
    for lam in extreme_joinings(x, y):
        assert is_joining(lam, x, y)
        M = markov_from_joining(lam, x, y)
        assert is_stochastic(M) and intertwines(M, x, y)


def test_footnote_range_checks():
    x = from_cycle_lengths([1, 1])
    with pytest.raises(InputError):
        footnote_coupling(x, x, [0], [0], Fraction(3, 4))
    with pytest.raises(InputError):
        footnote_coupling(x, cyclic(2), [0], [0], Fraction(1, 4))
    assert footnote_coupling(x, x, [0], [0], Fraction(1, 4)) == product_coupling(x, x)


def test_finite_constants():
    assert finite_rigidity_constant(cyclic(4), 4) == 1
    assert finite_rigidity_constant(cyclic(4), 1) == 0
    assert finite_mixing_constant(cyclic(1), 3) == 1
    assert finite_mixing_constant(cyclic(3), 3) == 0
    assert finite_mixing_constant(cyclic(3), 1) is None


def test_rigid_plus_mixing_above_one_forces_disjointness():
    # exhaustive over systems of size <= 6 and residues k of their periods
    systems = list(_systems(6))
    ks = range(12)
    alpha = {(x, k): finite_rigidity_constant(x, k) for x in systems for k in ks}
    beta = {(y, k): finite_mixing_constant(y, k) for y in systems for k in ks}
    checked = 0
    for (y, k), b in beta.items():
        if b is None:
            continue
        for x in systems:
            if alpha[(x, k)] + b > 1:
                assert joining_polytope(x, y).dimension == 0
                checked += 1
    assert checked > 0


def test_serialization_is_exact():
    lam = footnote_coupling(from_cycle_lengths([1, 2]), from_cycle_lengths([2, 1]), [0], [0, 1], Fraction(1, 7))
    rows = coupling_to_json(lam)
    assert coupling_from_json(json.loads(json.dumps(rows))) == lam
    csv = coupling_to_csv(lam).splitlines()
    assert csv[0] == "i,j,mass,mass_float" and len(csv) == 1 + 9
