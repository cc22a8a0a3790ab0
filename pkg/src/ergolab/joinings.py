"""Exact joining theory for finite measure-preserving systems.

A finite system is a permutation of ``{0..n-1}`` with an invariant
probability vector of positive rationals.  An invariant coupling of two such
systems is constant on orbits of ``T x S``.  The orbits of the product of a
cycle of length ``a`` with one of length ``b`` number ``gcd(a, b)``, each of
size ``lcm(a, b)``, so the joining polytope is a transportation polytope
between the two cycle decompositions, with a simplex of orbits inside every
block.  Everything here is computed in exact rational arithmetic.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .exceptions import InputError

MAX_SIZE = 64
MAX_VERTEX_SIZE = 10

Coupling = list  # n_x rows of n_y Fractions


def _frac(v) -> Fraction:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)


@dataclass(frozen=True)
class FiniteSystem:
    map: tuple
    measure: tuple

    def __post_init__(self):
        n = len(self.map)
        if n < 1 or n > MAX_SIZE:
            raise InputError(f"size must be in 1..{MAX_SIZE}")
        if sorted(self.map) != list(range(n)):
            raise InputError("map must be a permutation of 0..n-1")
        object.__setattr__(self, "map", tuple(int(i) for i in self.map))
        meas = tuple(_frac(m) for m in self.measure)
        if len(meas) != n:
            raise InputError("measure length differs from map length")
        if any(m <= 0 for m in meas):
            raise InputError("measure must be strictly positive; restrict to the support first")
        if sum(meas) != 1:
            raise InputError(f"measure sums to {sum(meas)}, not 1")
        for i in range(n):
            if meas[self.map[i]] != meas[i]:
                raise InputError(f"measure is not invariant at state {i}")
        object.__setattr__(self, "measure", meas)

    @property
    def size(self) -> int:
        return len(self.map)

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for i in range(self.size):
            if i in seen:
                continue
            cyc, j = [], i
            while j not in seen:
                seen.add(j)
                cyc.append(j)
                j = self.map[j]
            out.append(tuple(cyc))
        return out

    @property
    def ergodic(self) -> bool:
        return len(self.cycles()) == 1

    def ergodic_components(self) -> list[FiniteSystem]:
        """Each cycle as a system of its own, relabelled ``0..len-1`` in orbit order."""
        return [cyclic(len(c)) for c in self.cycles()]

    def to_json(self) -> dict:
        return {"map": list(self.map), "measure": [str(m) for m in self.measure]}

    @classmethod
    def from_json(cls, obj) -> FiniteSystem:
        if "cyclic" in obj:
            return cyclic(int(obj["cyclic"]))
        if "cycle_lengths" in obj:
            return from_cycle_lengths(obj["cycle_lengths"], obj.get("weights"))
        try:
            perm = obj["map"]
        except KeyError as exc:
            raise InputError("finite system needs 'map', 'cyclic' or 'cycle_lengths'") from exc
        meas = obj.get("measure")
        if meas is None:
            meas = [Fraction(1, len(perm))] * len(perm)
        return cls(tuple(perm), tuple(meas))


def cyclic(n: int) -> FiniteSystem:
    """Rotation ``i -> i + 1 mod n`` with uniform measure."""
    n = int(n)
    return FiniteSystem(tuple((i + 1) % n for i in range(n)), tuple([Fraction(1, n)] * n))


def from_cycle_lengths(lengths: Sequence[int], weights: Sequence | None = None) -> FiniteSystem:
    """Disjoint union of cycles; ``weights`` are the cycle masses (uniform per point if omitted)."""
    lengths = [int(a) for a in lengths]
    n = sum(lengths)
    if weights is None:
        weights = [Fraction(a, n) for a in lengths]
    weights = [_frac(w) for w in weights]
    perm, meas, start = [], [], 0
    for a, w in zip(lengths, weights):
        perm.extend(start + (k + 1) % a for k in range(a))
        meas.extend([w / a] * a)
        start += a
    return FiniteSystem(tuple(perm), tuple(meas))


def product_coupling(x: FiniteSystem, y: FiniteSystem) -> Coupling:
    return [[mx * my for my in y.measure] for mx in x.measure]


def _check_pair(x, y, limit=MAX_SIZE):
    if not isinstance(x, FiniteSystem) or not isinstance(y, FiniteSystem):
        raise InputError("expected FiniteSystem arguments")
    if x.size > limit or y.size > limit:
        raise InputError(f"sizes must be <= {limit}")


# --------------------------------------------------------------------------
# orbit structure
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Block:
    p: int  # x-cycle index
    q: int  # y-cycle index
    orbits: tuple  # each orbit is a tuple of (i, j) cells


def _blocks(x: FiniteSystem, y: FiniteSystem) -> tuple[list, list, list[_Block]]:
    cx, cy = x.cycles(), y.cycles()
    blocks = []
    for p, C in enumerate(cx):
        for q, D in enumerate(cy):
            seen, orbits = set(), []
            for j0 in D:
                cell = (C[0], j0)
                if cell in seen:
                    continue
                orb = []
                while cell not in seen:
                    seen.add(cell)
                    orb.append(cell)
                    cell = (x.map[cell[0]], y.map[cell[1]])
                orbits.append(tuple(orb))
            blocks.append(_Block(p, q, tuple(orbits)))
    return cx, cy, blocks


def _zero(x, y) -> Coupling:
    return [[Fraction(0)] * y.size for _ in range(x.size)]


def _spread(mat, orbit, amount: Fraction):
    """Add ``amount`` of total mass uniformly over the cells of ``orbit``."""
    per = amount / len(orbit)
    for i, j in orbit:
        mat[i][j] += per


def _block_coupling(x, y, blocks, masses: dict, choice: dict | None = None) -> Coupling:
    """Coupling with block masses ``masses[(p, q)]``, spread over one orbit or all of them."""
    mat = _zero(x, y)
    for b in blocks:
        w = masses.get((b.p, b.q), Fraction(0))
        if w == 0:
            continue
        if choice is None:
            for orb in b.orbits:
                _spread(mat, orb, w / len(b.orbits))
        else:
            _spread(mat, b.orbits[choice[(b.p, b.q)]], w)
    return mat


# --------------------------------------------------------------------------
# polytope
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class JoiningPolytope:
    """Joining polytope as the affine hull of ``product`` and the ``basis`` couplings.

    Each basis element is itself a joining, ``product + eps_k d_k`` for an
    independent direction ``d_k``.  The product coupling is strictly
    positive, so the nonnegative part has the full affine dimension.
    """

    x: FiniteSystem
    y: FiniteSystem
    product: tuple
    basis: tuple
    directions: tuple
    orbit_count: int

    @property
    def dimension(self) -> int:
        return len(self.directions)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "orbit_count": self.orbit_count,
            "product": coupling_to_json(self.product),
            "basis": [coupling_to_json(b) for b in self.basis],
        }


def joining_polytope(x: FiniteSystem, y: FiniteSystem) -> JoiningPolytope:
    _check_pair(x, y)
    cx, cy, blocks = _blocks(x, y)
    basis = []
    # moves inside a block between orbits of equal size
    for b in blocks:
        for k in range(1, len(b.orbits)):
            d = _zero(x, y)
            _spread(d, b.orbits[0], Fraction(1))
            _spread(d, b.orbits[k], Fraction(-1))
            basis.append(d)
    # transportation moves on the cycle-by-cycle table
    by = {(b.p, b.q): b for b in blocks}
    for p in range(1, len(cx)):
        for q in range(1, len(cy)):
            d = _zero(x, y)
            for key, sign in (((0, 0), 1), ((p, q), 1), ((0, q), -1), ((p, 0), -1)):
                for orb in by[key].orbits:
                    _spread(d, orb, Fraction(sign, len(by[key].orbits)))
            basis.append(d)
    prod = product_coupling(x, y)
    floor = min(v for r in prod for v in r)
    points = []
    for d in basis:
        eps = floor / max(abs(v) for r in d for v in r)
        points.append(tuple(tuple(prod[i][j] + eps * d[i][j] for j in range(y.size)) for i in range(x.size)))
    return JoiningPolytope(x, y, tuple(tuple(r) for r in prod), tuple(points),
                           tuple(tuple(tuple(r) for r in d) for d in basis), sum(len(b.orbits) for b in blocks))


def is_disjoint(x: FiniteSystem, y: FiniteSystem) -> bool:
    return joining_polytope(x, y).dimension == 0


def is_joining(lam, x: FiniteSystem, y: FiniteSystem) -> bool:
    """Exact check of marginals, invariance and nonnegativity."""
    lam = [[_frac(v) for v in row] for row in lam]
    if len(lam) != x.size or any(len(r) != y.size for r in lam):
        return False
    if any(v < 0 for r in lam for v in r):
        return False
    if any(sum(lam[i]) != x.measure[i] for i in range(x.size)):
        return False
    if any(sum(lam[i][j] for i in range(x.size)) != y.measure[j] for j in range(y.size)):
        return False
    return all(lam[x.map[i]][y.map[j]] == lam[i][j] for i in range(x.size) for j in range(y.size))


# --------------------------------------------------------------------------
# Markov operators
# --------------------------------------------------------------------------

def markov_from_joining(lam, x: FiniteSystem, y: FiniteSystem) -> list[list[Fraction]]:
    """``M[j][i] = lambda(i, j) / nu(j)``: conditional expectation from functions on X to Y."""
    if not is_joining(lam, x, y):
        raise InputError("lambda is not a joining of x and y")
    lam = [[_frac(v) for v in row] for row in lam]
    return [[lam[i][j] / y.measure[j] for i in range(x.size)] for j in range(y.size)]


def koopman(x: FiniteSystem) -> list[list[Fraction]]:
    """``K[i][T i] = 1``, so ``(K f)(i) = f(T i)``."""
    return [[Fraction(int(x.map[i] == k)) for k in range(x.size)] for i in range(x.size)]


def _matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def intertwines(m, x: FiniteSystem, y: FiniteSystem) -> bool:
    """``M K_T == K_S M`` exactly."""
    return _matmul(m, koopman(x)) == _matmul(koopman(y), m)


def is_stochastic(m) -> bool:
    return all(v >= 0 for r in m for v in r) and all(sum(r) == 1 for r in m)


# --------------------------------------------------------------------------
# vertices
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremeJoinings:
    vertices: tuple
    partial: bool

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


def _tree_solve(cells, row_m, col_m):
    """Solve the transportation equations on a support set by leaf peeling; ``None`` if not a spanning tree."""
    rows = {p: set() for p in range(len(row_m))}
    cols = {q: set() for q in range(len(col_m))}
    for c in cells:
        rows[c[0]].add(c)
        cols[c[1]].add(c)
    rr, cr = list(row_m), list(col_m)
    sol = {}
    remaining = set(cells)
    while remaining:
        leaf = None
        for p, cs in rows.items():
            if len(cs) == 1:
                leaf = ("r", p, next(iter(cs)))
                break
        if leaf is None:
            for q, cs in cols.items():
                if len(cs) == 1:
                    leaf = ("c", q, next(iter(cs)))
                    break
        if leaf is None:
            return None
        kind, _, cell = leaf
        p, q = cell
        val = rr[p] if kind == "r" else cr[q]
        sol[cell] = val
        rr[p] -= val
        cr[q] -= val
        remaining.discard(cell)
        rows[p].discard(cell)
        cols[q].discard(cell)
    if any(v != 0 for v in rr) or any(v != 0 for v in cr):
        return None
    return sol


def _transportation_vertices(row_m, col_m, budget):
    P, Q = len(row_m), len(col_m)
    allcells = [(p, q) for p in range(P) for q in range(Q)]
    r = P + Q - 1
    found, tried = {}, 0
    for cells in itertools.combinations(allcells, r):
        tried += 1
        if tried > budget:
            return list(found.values()), True
        sol = _tree_solve(cells, row_m, col_m)
        if sol is None or any(v < 0 for v in sol.values()):
            continue
        key = tuple(sorted((c, v) for c, v in sol.items() if v != 0))
        found.setdefault(key, {c: v for c, v in sol.items() if v != 0})
    return list(found.values()), False


def extreme_joinings(x: FiniteSystem, y: FiniteSystem, budget: int = 200_000) -> ExtremeJoinings:
    """All vertices of the joining polytope, or a flagged partial list when ``budget`` runs out.

    A vertex puts each block's mass on a single orbit, and the block masses
    form a vertex of the transportation polytope between the cycle masses.
    """
    _check_pair(x, y, MAX_VERTEX_SIZE)
    cx, cy, blocks = _blocks(x, y)
    row_m = [sum(x.measure[i] for i in c) for c in cx]
    col_m = [sum(y.measure[j] for j in c) for c in cy]
    tverts, partial = _transportation_vertices(row_m, col_m, budget)
    by = {(b.p, b.q): b for b in blocks}
    out = []
    for masses in tverts:
        keys = sorted(masses)
        for pick in itertools.product(*(range(len(by[k].orbits)) for k in keys)):
            if len(out) >= budget:
                return ExtremeJoinings(tuple(out), True)
            choice = dict(zip(keys, pick))
            mat = _block_coupling(x, y, blocks, masses, choice)
            out.append(tuple(tuple(r) for r in mat))
    return ExtremeJoinings(tuple(out), partial)


def coupling_support_orbits(lam, x: FiniteSystem, y: FiniteSystem) -> int:
    """Number of ``T x S`` orbits carrying mass; 1 means the coupled system is ergodic."""
    _, _, blocks = _blocks(x, y)
    return sum(1 for b in blocks for orb in b.orbits if lam[orb[0][0]][orb[0][1]] != 0)


# --------------------------------------------------------------------------
# non-ergodic witness
# --------------------------------------------------------------------------

def invariant_subset(x: FiniteSystem) -> tuple[int, ...] | None:
    """A nontrivial invariant set (the first cycle), or ``None`` for ergodic ``x``."""
    cyc = x.cycles()
    return None if len(cyc) == 1 else cyc[0]


def footnote_coupling(x: FiniteSystem, y: FiniteSystem, A, B, t) -> Coupling:
    """``t mu_A x nu_B + (mu(A) - t) mu_A x nu_B^c + (nu(B) - t) mu_A^c x nu_B + (1 - mu(A) - nu(B) + t) mu_A^c x nu_B^c``.

    ``A`` and ``B`` are invariant sets and ``mu_A`` is ``mu`` conditioned on
    ``A``.  Any ``t`` in ``[max(0, mu(A) + nu(B) - 1), min(mu(A), nu(B))]``
    gives a joining; ``t = mu(A) nu(B)`` gives the product.
    """
    A, B = set(A), set(B)
    mA = sum(x.measure[i] for i in A)
    nB = sum(y.measure[j] for j in B)
    if not (0 < mA < 1 and 0 < nB < 1):
        raise InputError("A and B must have measure strictly between 0 and 1")
    if any(x.map[i] not in A for i in A) or any(y.map[j] not in B for j in B):
        raise InputError("A and B must be invariant")
    t = _frac(t)
    lo, hi = max(Fraction(0), mA + nB - 1), min(mA, nB)
    if not lo <= t <= hi:
        raise InputError(f"t must lie in [{lo}, {hi}]")
    wts = {(True, True): t, (True, False): mA - t, (False, True): nB - t, (False, False): 1 - mA - nB + t}
    mat = _zero(x, y)
    for i in range(x.size):
        inA = i in A
        px = x.measure[i] / (mA if inA else 1 - mA)
        for j in range(y.size):
            inB = j in B
            py = y.measure[j] / (nB if inB else 1 - nB)
            mat[i][j] = wts[(inA, inB)] * px * py
    return mat


def non_disjointness_witness(x: FiniteSystem, y: FiniteSystem) -> Coupling | None:
    """A non-product joining of two non-ergodic systems, at the midpoint of the admissible ``t`` range."""
    A, B = invariant_subset(x), invariant_subset(y)
    if A is None or B is None:
        return None
    mA = sum(x.measure[i] for i in A)
    nB = sum(y.measure[j] for j in B)
    lo, hi = max(Fraction(0), mA + nB - 1), min(mA, nB)
    t = (lo + hi) / 2
    if t == mA * nB:
        t = (t + hi) / 2
    return footnote_coupling(x, y, A, B, t)


# --------------------------------------------------------------------------
# rigidity and mixing constants at finite scale
# --------------------------------------------------------------------------

def _subsets(n):
    for mask in range(1, 2 ** n):
        yield [i for i in range(n) if mask >> i & 1]


def _power_map(x: FiniteSystem, k: int) -> list[int]:
    out = list(range(x.size))
    for _ in range(k % _period(x)):
        out = [x.map[i] for i in out]
    return out


def _period(x: FiniteSystem) -> int:
    p = 1
    for c in x.cycles():
        p = p * len(c) // gcd(p, len(c))
    return p


def finite_rigidity_constant(x: FiniteSystem, k: int) -> Fraction:
    """Largest ``alpha`` with ``mu(A & T^-k A) >= alpha mu(A)`` for every set ``A``.

    A finite system's powers are periodic, so a constant sequence ``T^k``
    stands for any sequence eventually in that residue class.
    """
    pm = _power_map(x, k)
    best = Fraction(1)
    for A in _subsets(x.size):
        sA = set(A)
        mA = sum(x.measure[i] for i in A)
        inter = sum(x.measure[i] for i in A if pm[i] in sA)
        best = min(best, inter / mA)
    return best


def finite_mixing_constant(y: FiniteSystem, k: int) -> Fraction | None:
    """The ``beta`` in ``[0, 1]`` with ``mu(A & T^-k B) = beta mu(A)mu(B) + (1 - beta) mu(A & B)`` for all ``A, B``.

    ``None`` when no single ``beta`` fits every pair.
    """
    pm = _power_map(y, k)
    sets = [[]] + list(_subsets(y.size))
    candidates = None
    for A in sets:
        mA = sum(y.measure[i] for i in A)
        for B in sets:
            sB = set(B)
            mB = sum(y.measure[j] for j in B)
            lhs = sum(y.measure[i] for i in A if pm[i] in sB)
            inter = sum(y.measure[i] for i in A if i in sB)
            # lhs - inter = beta (mA mB - inter)
            gap = mA * mB - inter
            if gap == 0:
                if lhs != inter:
                    return None
                continue
            beta = (lhs - inter) / gap
            if candidates is None:
                candidates = {beta}
            elif beta not in candidates:
                return None
    if candidates is None:
        return Fraction(1)  # every pair is degenerate: the one-point system
    (beta,) = candidates
    return beta if 0 <= beta <= 1 else None


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def coupling_to_json(lam) -> list[list[str]]:
    return [[str(_frac(v)) for v in row] for row in lam]


def coupling_from_json(rows) -> Coupling:
    return [[Fraction(v) for v in row] for row in rows]


def coupling_to_csv(lam) -> str:
    lines = ["i,j,mass,mass_float"]
    for i, row in enumerate(lam):
        for j, v in enumerate(row):
            v = _frac(v)
            lines.append(f"{i},{j},{v},{float(v)!r}")
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)
