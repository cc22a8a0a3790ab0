"""Sequence proxies for ultrafilter limits of correlation sequences.

A :class:`LimitScheme` names one way of "going to infinity" in Z:

``subsequence``    along explicit increasing indices, judged on the last quarter;
``folner_cesaro``  Cesaro averages of ``|c(n)|`` over ``[0, N)`` for growing N;
``ip_grid``        over all finite sums of distinct generators (IP-set proxy);
``tail_sup``       ``sup |c(n)|`` over the available lags ``n >= start``.

The module also carries the finitary van der Corput checks and the grid
constructions (sumsets, difference sets) used to compare schemes.
"""

from __future__ import annotations

import csv
import io
import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationSequence
from .exceptions import InputError
from .operators import as_complex_matrix, unitary_power

SCHEME_KINDS = ("subsequence", "folner_cesaro", "ip_grid", "tail_sup")
MAX_IP_GENERATORS = 20


@dataclass(frozen=True)
class LimitScheme:
    kind: str
    indices: tuple = ()
    windows: tuple = ()
    generators: tuple = ()
    depth: int = 0
    start: int = 0

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise InputError(f"unknown scheme kind {self.kind!r}")
        object.__setattr__(self, "indices", tuple(int(n) for n in self.indices))
        object.__setattr__(self, "windows", tuple(int(n) for n in self.windows))
        object.__setattr__(self, "generators", tuple(int(n) for n in self.generators))
        if self.kind == "subsequence":
            _strictly_increasing(self.indices, "indices", minimum=2)
        elif self.kind == "folner_cesaro":
            _strictly_increasing(self.windows, "windows", minimum=2)
            if self.windows[0] < 1:
                raise InputError("Folner windows must be positive lengths")
        elif self.kind == "ip_grid":
            if not 1 <= len(self.generators) <= MAX_IP_GENERATORS:
                raise InputError(f"ip_grid takes 1..{MAX_IP_GENERATORS} generators")
            depth = self.depth or len(self.generators)
            if not 1 <= depth <= len(self.generators):
                raise InputError("ip_grid depth must not exceed the generator count")
            object.__setattr__(self, "depth", depth)

    def lags(self) -> list[int]:
        """Every lag the scheme reads (tail_sup reads whatever is present)."""
        if self.kind == "subsequence":
            return list(_window(self.indices))
        if self.kind == "folner_cesaro":
            return list(range(self.windows[-1]))
        if self.kind == "ip_grid":
            return sorted(set(ip_sums(self.generators[: self.depth])))
        return []

    def to_json(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "subsequence":
            d["indices"] = list(self.indices)
        elif self.kind == "folner_cesaro":
            d["windows"] = list(self.windows)
        elif self.kind == "ip_grid":
            d.update(generators=list(self.generators), depth=self.depth)
        else:
            d["start"] = self.start
        return d

    @classmethod
    def from_json(cls, obj: Mapping) -> LimitScheme:
        obj = dict(obj)
        kind = obj.pop("kind", None)
        unknown = set(obj) - {"indices", "windows", "generators", "depth", "start"}
        if unknown:
            raise InputError(f"unknown scheme fields {sorted(unknown)}")
        return cls(kind=kind, **{k: tuple(v) if isinstance(v, list) else v for k, v in obj.items()})


def subsequence(indices) -> LimitScheme:
    return LimitScheme("subsequence", indices=tuple(indices))


def folner_cesaro(windows) -> LimitScheme:
    return LimitScheme("folner_cesaro", windows=tuple(windows))


def ip_grid(generators, depth: int | None = None) -> LimitScheme:
    return LimitScheme("ip_grid", generators=tuple(generators), depth=depth or 0)


def tail_sup(start: int = 0) -> LimitScheme:
    return LimitScheme("tail_sup", start=int(start))


def _strictly_increasing(seq, name, minimum):
    if len(seq) < minimum:
        raise InputError(f"{name} needs at least {minimum} entries")
    if any(b <= a for a, b in itertools.pairwise(seq)):
        raise InputError(f"{name} must be strictly increasing")


def _window(seq: Sequence[int]) -> Sequence[int]:
    return seq[-max(2, len(seq) // 4):]


@dataclass(frozen=True)
class LimitReport:
    value: complex | None
    converged: bool
    deviation: float
    samples_used: int
    tol: float
    scheme: str = ""

    def to_row(self) -> list:
        v = complex("nan") if self.value is None else self.value
        return [self.scheme, repr(v.real), repr(v.imag), self.converged, repr(self.deviation), self.samples_used, repr(self.tol)]

    CSV_HEADER = ("scheme", "re", "im", "converged", "deviation", "samples_used", "tol")

    def to_dict(self) -> dict:
        v = self.value
        return {
            "scheme": self.scheme,
            "value": None if v is None else [v.real, v.imag],
            "converged": self.converged,
            "deviation": self.deviation,
            "samples_used": self.samples_used,
            "tol": self.tol,
        }


def reports_to_csv(reports: Sequence[LimitReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LimitReport.CSV_HEADER)
    for r in reports:
        w.writerow(r.to_row())
    return buf.getvalue()


def evaluate_limit(c: CorrelationSequence, scheme: LimitScheme, tol: float = 1e-8) -> LimitReport:
    """Evaluate ``scheme`` on ``c``; raises InputError listing any missing lags."""
    if tol < 0:
        raise InputError("tol must be non-negative")
    name = scheme.kind
    if scheme.kind == "subsequence":
        win = list(_window(scheme.indices))
        vals = c.array(win)
        value = vals[-1]
        dev = float(np.max(np.abs(vals - value)))
        steps = float(np.max(np.abs(np.diff(vals)))) if vals.size > 1 else 0.0
        return LimitReport(complex(value), bool(dev <= tol and steps <= tol), dev, len(win), tol, name)
    if scheme.kind == "folner_cesaro":
        c.require(range(scheme.windows[-1]))
        absvals = np.abs(c.array(range(scheme.windows[-1])))
        csum = np.cumsum(absvals)
        avgs = np.array([csum[n - 1] / n for n in scheme.windows])
        win = _window(avgs)
        value = float(win[-1])
        dev = float(np.max(np.abs(win - value)))
        steps = float(np.max(np.abs(np.diff(win))))
        return LimitReport(complex(value), bool(steps <= tol), dev, int(scheme.windows[-1]), tol, name)
    if scheme.kind == "ip_grid":
        sums = ip_sums(scheme.generators[: scheme.depth])
        vals = c.array(sums)
        value = complex(vals.mean())
        dev = float(np.max(np.abs(vals - value)))
        return LimitReport(value, bool(dev <= tol), dev, len(sums), tol, name)
    tail = [n for n in c.lags if n >= scheme.start]
    if not tail:
        raise InputError(f"correlation sequence has no lags >= {scheme.start}")
    value = float(np.max(np.abs(c.array(tail))))
    return LimitReport(complex(value), True, 0.0, len(tail), tol, name)


def abs_sequence(c: CorrelationSequence) -> CorrelationSequence:
    return CorrelationSequence({n: abs(v) for n, v in c.values.items()}, mass=None if c.mass is None else abs(c.mass),
                               centered=c.centered, same_observable=False, label=f"|{c.label}|")


# --------------------------------------------------------------------------
# index grids
# --------------------------------------------------------------------------

def ip_sums(generators: Sequence[int]) -> list[int]:
    """All ``2**m - 1`` sums of non-empty subsets of distinct generators (with repeats)."""
    gens = [int(g) for g in generators]
    if len(gens) > MAX_IP_GENERATORS:
        raise InputError(f"at most {MAX_IP_GENERATORS} generators")
    sums = np.zeros(1, dtype=np.int64)
    for g in gens:
        sums = np.concatenate((sums, sums + g))
    return [int(s) for s in sums[1:]]


def sumset_grid(indices: Sequence[int], other: Sequence[int] | None = None) -> list[int]:
    """Sorted distinct sums ``n_j + m_k``; with one argument only ``j < k`` pairs."""
    a = [int(n) for n in indices]
    if other is None:
        sums = {a[j] + a[k] for j in range(len(a)) for k in range(j + 1, len(a))}
    else:
        sums = {x + int(y) for x in a for y in other}
    return sorted(sums)


def paired_sums(indices: Sequence[int], other: Sequence[int]) -> list[int]:
    """``n_k + m_k`` term by term: both summands go to infinity together."""
    out = [int(a) + int(b) for a, b in zip(indices, other)]
    _strictly_increasing(out, "paired sums", minimum=2)
    return out


def difference_grid(indices: Sequence[int]) -> list[int]:
    """Sorted distinct positive differences ``n_k - n_j`` with ``j < k``."""
    a = [int(n) for n in indices]
    return sorted({a[k] - a[j] for j in range(len(a)) for k in range(j + 1, len(a))})


# --------------------------------------------------------------------------
# zero limits of unitary matrix models
# --------------------------------------------------------------------------

def cyclic_shift(dim: int) -> np.ndarray:
    """Permutation matrix of ``e_i -> e_{i+1 mod dim}``; ``<S^n e_0, e_0> = 0`` for ``0 < n < dim``."""
    s = np.zeros((dim, dim), dtype=np.complex128)
    s[(np.arange(dim) + 1) % dim, np.arange(dim)] = 1.0
    return s


def probe_correlations(u, f, probes, lags) -> dict[int, float]:
    """``max_g |<U^n f, g>|`` over the probe vectors, for each lag."""
    a = as_complex_matrix(u, "u")
    f = np.asarray(f, dtype=np.complex128)
    P = np.atleast_2d(np.asarray(probes, dtype=np.complex128))
    out = {}
    for n in sorted({int(n) for n in lags}):
        v = unitary_power(a, n) @ f
        out[n] = float(np.max(np.abs(P.conj() @ v)))
    return out


def weak_zero_limit(u, f, indices, probes, tol: float = 1e-6) -> bool:
    """``U^{n_k} f -> 0`` tested against every probe vector along ``indices``."""
    vals = probe_correlations(u, f, probes, indices)
    c = CorrelationSequence(vals)
    rep = evaluate_limit(c, subsequence(indices), tol)
    return bool(rep.converged and abs(rep.value) <= tol)


def scheme_zero_equivalence(u, f, indices, probes, tol: float = 1e-6) -> dict[str, bool]:
    """Zero-limit verdicts along ``(n_k)``, its sumset grid and its difference grid."""
    return {
        "sequence": weak_zero_limit(u, f, indices, probes, tol),
        "sumset": weak_zero_limit(u, f, sumset_grid(indices), probes, tol),
        "difference": weak_zero_limit(u, f, difference_grid(indices), probes, tol),
    }


# --------------------------------------------------------------------------
# van der Corput
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VdcInequality:
    lhs: float
    rhs: float
    bound: float
    holds: bool


def vdc_probes(dim: int, count: int = 32, seed: int = 0) -> np.ndarray:
    """Standard basis plus ``count`` seeded random unit vectors in ``C^dim``."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return np.vstack((np.eye(dim, dtype=np.complex128), z))


def vdc_inequality_check(xs, probes: np.ndarray | None = None, seed: int = 0) -> VdcInequality:
    """Finitary core of the van der Corput chain for vectors ``x_1..x_N`` of norm <= 1.

    ``lhs = max_y |(1/N) sum_k <y, x_k>|^2`` over the unit probe vectors and
    ``rhs = Re (1/N^2) sum_{k,k'} <x_k, x_k'>``; Cauchy-Schwarz forces
    ``lhs <= rhs``.  ``bound = 1/N + (2/N^2) sum_{k<k'} Re <x_k, x_k'>`` is the
    next link of the chain and dominates ``rhs``.
    """
    X = np.atleast_2d(np.asarray(xs, dtype=np.complex128))
    N, d = X.shape
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms > 1 + 1e-12):
        raise InputError(f"vectors must have norm <= 1, max is {norms.max():.15g}")
    if probes is None:
        probes = vdc_probes(d, seed=seed)
    mean = X.mean(axis=0)
    # <y, x> is linear in y: sum_i y_i conj(x_i)
    lhs = float(np.max(np.abs(probes @ mean.conj()) ** 2))
    gram = X @ X.conj().T
    rhs = float(gram.sum().real) / N**2
    upper = np.triu(gram, 1).sum().real
    bound = 1.0 / N + 2.0 * float(upper) / N**2
    return VdcInequality(lhs, rhs, bound, bool(lhs <= rhs + 1e-12))


@dataclass(frozen=True)
class VdcConclusion:
    double_limit: complex
    double_deviation: float
    double_converged: bool
    single_limit: complex
    verdict: bool | None
    tol: float

    def __bool__(self):
        return bool(self.verdict)


def vdc_conclusion_check(c2, scheme: LimitScheme, y_pairings, tol: float = 0.05) -> VdcConclusion:
    """Quantitative form of "double limit zero implies weak limit zero".

    ``c2[r][t] = <x_r, x_t>`` and ``y_pairings[n] = <y, x_n>`` are indexed by
    position; ``scheme`` must be a subsequence scheme selecting positions.
    The double limit is proxied by the off-diagonal pairs ``r < t`` in the
    final quarter of the scheme; the single limit by the mean of
    ``<y, x_n>`` there.  When the double limit has modulus ``<= tol`` the
    verdict is whether the single limit has modulus ``<= sqrt(tol) + tol``;
    otherwise the implication holds vacuously.  A non-convergent double
    limit gives ``verdict=None``.
    """
    if scheme.kind != "subsequence":
        raise InputError("vdc_conclusion_check needs a subsequence scheme")
    G = np.asarray(c2, dtype=np.complex128)
    Y = np.asarray(y_pairings, dtype=np.complex128)
    win = list(_window(scheme.indices))
    if max(win) >= min(G.shape[0], G.shape[1], Y.shape[0]) or min(win) < 0:
        raise InputError("scheme indices exceed the supplied tables")
    pairs = np.array([G[r, t] for r, t in itertools.combinations(win, 2)])
    dbl = complex(pairs.mean())
    dev = float(np.max(np.abs(pairs - dbl)))
    converged = dev <= tol
    single = complex(Y[win].mean())
    if not converged:
        verdict = None
    elif abs(dbl) > tol:
        verdict = True
    else:
        verdict = bool(abs(single) <= np.sqrt(tol) + tol)
    return VdcConclusion(dbl, dev, converged, single, verdict, tol)
