"""Correlation sequences ``c(n) = <T^n f, g> = int f(T^n x) conj(g(x)) dmu``.

Exact evaluation is available for characters on rotations and on the skew
torus.  Everything else goes through orbit statistics: a single long orbit of
a generic point (symbolic fixed point, or ``x0 = sqrt(2) - 1``) after a
burn-in, averaged in batches so every value comes with a standard error.
The skew torus is not ergodic, so its empirical mode averages over i.i.d.
initial points instead of along one orbit.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .exceptions import CapabilityError, InputError
from .systems import (
    DEFAULT_BURN_IN,
    DEFAULT_X0,
    Observable,
    System,
    _skew_freqs,
    evaluate_points,
    evaluate_symbolic,
    exact_mean,
)

MIN_ORBIT = 10_000
#: Orbit statistics above this many extra steps switch to closed-form jumps.
MAX_SERIES_LAG = 4_000_000


@dataclass(frozen=True)
class Empirical:
    """Orbit-average quality setting."""

    orbit_length: int = 100_000
    burn_in: int = DEFAULT_BURN_IN
    batches: int = 20
    seed: int | None = None

    def __post_init__(self):
        if self.orbit_length < MIN_ORBIT:
            raise InputError(f"empirical correlations need orbit_length >= {MIN_ORBIT}")
        if self.batches < 2 or self.orbit_length % self.batches:
            raise InputError("batches must be >= 2 and divide orbit_length")


@dataclass(frozen=True)
class CorrelationSequence:
    """Lag -> complex correlation values.

    ``mass`` is the lag-0 value (``|f|^2`` integral when ``f = g``),
    ``same_observable`` records whether ``f = g`` (which makes the sequence
    positive definite), and ``stderr`` holds per-lag standard errors for
    empirical sequences.
    """

    values: Mapping[int, complex]
    mass: complex | None = None
    centered: bool = False
    same_observable: bool = False
    stderr: Mapping[int, float] | None = None
    label: str = ""

    def __post_init__(self):
        vals = {int(k): complex(v) for k, v in self.values.items()}
        object.__setattr__(self, "values", vals)
        if self.mass is None and 0 in vals:
            object.__setattr__(self, "mass", vals[0])
        if self.stderr is not None:
            object.__setattr__(self, "stderr", {int(k): float(v) for k, v in self.stderr.items()})

    def __getitem__(self, n: int) -> complex:
        return self.values[int(n)]

    def __contains__(self, n) -> bool:
        return int(n) in self.values

    def __len__(self) -> int:
        return len(self.values)

    @property
    def lags(self) -> list[int]:
        return sorted(self.values)

    def missing(self, lags: Iterable[int]) -> list[int]:
        return sorted({int(n) for n in lags} - set(self.values))

    def require(self, lags: Iterable[int]) -> None:
        miss = self.missing(lags)
        if miss:
            shown = ", ".join(str(n) for n in miss[:20]) + (" ..." if len(miss) > 20 else "")
            raise InputError(f"correlation sequence lacks {len(miss)} lags: {shown}")

    def array(self, lags: Iterable[int]) -> np.ndarray:
        lags = list(lags)
        self.require(lags)
        return np.array([self.values[int(n)] for n in lags], dtype=np.complex128)

    def symmetric_range(self) -> int:
        """Largest L with every lag in -L..L present (-1 if lag 0 is absent)."""
        L = -1
        while (L + 1) in self.values and -(L + 1) in self.values:
            L += 1
        return L

    @classmethod
    def from_function(cls, fn, lags: Iterable[int], **kwargs) -> CorrelationSequence:
        return cls({int(n): fn(int(n)) for n in lags}, **kwargs)

    @classmethod
    def from_array(cls, values, start: int = 0, **kwargs) -> CorrelationSequence:
        return cls({start + i: v for i, v in enumerate(np.asarray(values))}, **kwargs)

    def with_symmetric_extension(self) -> CorrelationSequence:
        """Fill ``c(-n) = conj c(n)``; valid when ``f = g``."""
        if not self.same_observable:
            raise InputError("Hermitian extension needs f = g")
        vals = dict(self.values)
        for n, v in self.values.items():
            vals.setdefault(-n, np.conj(v))
        se = None
        if self.stderr is not None:
            se = dict(self.stderr)
            for n, v in self.stderr.items():
                se.setdefault(-n, v)
        return CorrelationSequence(vals, self.mass, self.centered, True, se, self.label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lag", "re", "im", "stderr"])
        for n in self.lags:
            v = self.values[n]
            se = "" if self.stderr is None else repr(self.stderr.get(n, float("nan")))
            w.writerow([n, repr(v.real), repr(v.imag), se])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, **kwargs) -> CorrelationSequence:
        rows = list(csv.DictReader(io.StringIO(text)))
        vals = {int(r["lag"]): complex(float(r["re"]), float(r["im"])) for r in rows}
        se = {int(r["lag"]): float(r["stderr"]) for r in rows if r.get("stderr")}
        return cls(vals, stderr=se or None, **kwargs)


def _lag_list(lags) -> list[int]:
    out = sorted({int(n) for n in lags})
    if not out:
        raise InputError("no lags requested")
    return out


# --------------------------------------------------------------------------
# exact formulas
# --------------------------------------------------------------------------

def _exact_values(system: System, f: Observable, g: Observable, lags: list[int]) -> np.ndarray:
    if f.kind != "character" or g.kind != "character":
        raise CapabilityError(f"exact correlations need characters, got {f.kind}/{g.kind}")
    n = np.asarray(lags, dtype=np.int64)
    if system.family == "rotation":
        (k,), (j,) = f.frequencies, g.frequencies
        if k != j:
            return np.zeros(n.size, dtype=np.complex128)
        # phase reduced modulo 1 before exponentiation
        return np.exp(2j * np.pi * np.mod(k * n * system.alpha, 1.0))
    if system.family == "skew_torus":
        # T^n e_{d,c} = e_{d+cn, c}; the y-integral forces c = b and the
        # x-integral is int exp(2 pi i (d + c n - a) x) dsigma = sigma^(a - d - c n)
        d, c = _skew_freqs(f)
        a, b = _skew_freqs(g)
        if c != b:
            return np.zeros(n.size, dtype=np.complex128)
        return system.base.fourier_array(a - d - c * n)
    raise CapabilityError(f"exact correlations are not available for {system.family}")


def _mean_or_none(system, obs):
    if obs.mean is not None:
        return complex(obs.mean)
    return exact_mean(system, obs)


def exact_correlation(system: System, f: Observable, g: Observable, lags) -> CorrelationSequence:
    lags = _lag_list(lags)
    vals = _exact_values(system, f, g, lags)
    centered = f.centered or g.centered
    if centered:
        # <T^n (f - m_f), g> = <T^n f, g - m_g> = <T^n f, g> - m_f conj(m_g)
        vals = vals - _mean_or_none(system, f) * np.conj(_mean_or_none(system, g))
    mass = None
    if f == g:
        v0 = _exact_values(system, f, g, [0])[0]
        mass = v0 - (abs(_mean_or_none(system, f)) ** 2 if f.centered else 0)
    return CorrelationSequence(
        dict(zip(lags, vals)), mass=mass, centered=centered, same_observable=(f == g),
        label=f"<T^n {f.name}, {g.name}>",
    )


# --------------------------------------------------------------------------
# empirical estimates
# --------------------------------------------------------------------------

def _batched_correlation(F: np.ndarray, G: np.ndarray, lags: list[int], N: int, batches: int):
    """Batch means of ``F[t + n] * conj(G[t])`` over ``t < N`` for each lag ``n >= 0``."""
    B = N // batches
    L = max(lags)
    idx = np.asarray(lags)
    per = np.empty((batches, idx.size), dtype=np.complex128)
    dense = idx.size > 32
    for b in range(batches):
        t0 = b * B
        if dense:
            size = 1 << int(np.ceil(np.log2(B + L + 1)))
            fs = np.fft.fft(F[t0:t0 + B + L], size)
            gs = np.fft.fft(G[t0:t0 + B], size)
            full = np.fft.ifft(fs * np.conj(gs))
            per[b] = full[idx] / B
        else:
            g = np.conj(G[t0:t0 + B])
            for j, n in enumerate(lags):
                per[b, j] = np.dot(F[t0 + n:t0 + n + B], g) / B
    mean = per.mean(axis=0)
    se = np.sqrt(per.real.var(axis=0, ddof=1) + per.imag.var(axis=0, ddof=1)) / np.sqrt(batches)
    return mean, se


def _series(system: System, obs: Observable, length: int, q: Empirical, cache: dict):
    """``obs(T^t x0)`` for ``t < length`` along the generic orbit."""
    if system.symbolic:
        key = ("word", length)
        if key not in cache:
            pad = q.burn_in + 64
            cache[key] = system.word(length + 2 * pad)
        word = cache[key]
        return evaluate_symbolic(system, obs, word, q.burn_in, length)
    if system.family in ("rotation", "iet"):
        key = ("orbit", length)
        if key not in cache:
            cache[key] = system.orbit(_start_point(system, q), length)
        return evaluate_points(system, obs, cache[key])
    raise CapabilityError(f"no orbit series for {system.family}")


def _start_point(system: System, q: Empirical) -> float:
    x0 = DEFAULT_X0 if q.seed is None else float(np.random.default_rng(q.seed).random())
    if system.family == "iet":
        return float(system.orbit(x0, q.burn_in + 1)[-1])
    return float(system.jump(x0, q.burn_in))


def _with_empirical_means(system, f, g, q, cache):
    """Fill in unknown means of centered observables from the orbit itself."""
    out = []
    for obs in (f, g):
        if obs.centered and obs.mean is None:
            m = exact_mean(system, obs)
            if m is None:
                raw = Observable(**{**obs.__dict__, "centered": False})
                m = complex(_series(system, raw, q.orbit_length, q, cache).mean())
            obs = obs.centered_version(m)
        out.append(obs)
    return out


def _empirical_nonneg(system, f, g, lags, q, cache):
    if system.family == "skew_torus":
        rng = np.random.default_rng(0 if q.seed is None else q.seed)
        xs = system.base.sample(q.orbit_length, rng)
        ys = rng.random(q.orbit_length)
        gv = np.conj(evaluate_points(system, g, (xs, ys))).reshape(q.batches, -1)
        per = np.empty((q.batches, len(lags)), dtype=np.complex128)
        for j, n in enumerate(lags):
            fv = evaluate_points(system, f, system.jump((xs, ys), n)).reshape(q.batches, -1)
            per[:, j] = (fv * gv).mean(axis=1)
        mean = per.mean(axis=0)
        se = np.sqrt(per.real.var(axis=0, ddof=1) + per.imag.var(axis=0, ddof=1)) / np.sqrt(q.batches)
        return mean, se
    L = max(lags)
    if L > MAX_SERIES_LAG:
        if system.family != "rotation":
            raise InputError(f"lag {L} exceeds the orbit budget {MAX_SERIES_LAG}")
        xs = system.orbit(_start_point(system, q), q.orbit_length)
        gv = np.conj(evaluate_points(system, g, xs)).reshape(q.batches, -1)
        per = np.empty((q.batches, len(lags)), dtype=np.complex128)
        for j, n in enumerate(lags):
            per[:, j] = (evaluate_points(system, f, system.jump(xs, n)).reshape(q.batches, -1) * gv).mean(axis=1)
        mean = per.mean(axis=0)
        se = np.sqrt(per.real.var(axis=0, ddof=1) + per.imag.var(axis=0, ddof=1)) / np.sqrt(q.batches)
        return mean, se
    F = _series(system, f, q.orbit_length + L, q, cache)
    G = F if f == g else _series(system, g, q.orbit_length + L, q, cache)
    return _batched_correlation(F, G, lags, q.orbit_length, q.batches)


def empirical_correlation(system: System, f: Observable, g: Observable, lags, quality: Empirical | int | None = None,
                          _cache: dict | None = None) -> CorrelationSequence:
    if quality is None:
        quality = Empirical()
    elif isinstance(quality, int):
        quality = Empirical(orbit_length=quality)
    lags = _lag_list(lags)
    cache = {} if _cache is None else _cache
    f, g = _with_empirical_means(system, f, g, quality, cache)
    same = f == g
    pos = [n for n in lags if n >= 0]
    neg = [-n for n in lags if n < 0]
    vals, errs = {}, {}
    need_pos = sorted(set(pos) | ({0} if same else set()) | (set(neg) if same else set()))
    if need_pos:
        m, s = _empirical_nonneg(system, f, g, need_pos, quality, cache)
        vals.update(zip(need_pos, m))
        errs.update(zip(need_pos, s))
    if neg:
        if same:
            for n in neg:
                vals[-n] = np.conj(vals[n])
                errs[-n] = errs[n]
        else:
            # <T^{-n} f, g> = conj <T^n g, f>
            m, s = _empirical_nonneg(system, g, f, sorted(set(neg)), quality, cache)
            for n, v, e in zip(sorted(set(neg)), m, s):
                vals[-n] = np.conj(v)
                errs[-n] = e
    keep = set(lags)
    mass = vals.get(0) if same else None
    return CorrelationSequence(
        {n: v for n, v in vals.items() if n in keep}, mass=mass, centered=f.centered or g.centered,
        same_observable=same, stderr={n: e for n, e in errs.items() if n in keep},
        label=f"<T^n {f.name}, {g.name}>",
    )


def correlation(system: System, f: Observable, g: Observable | None = None, lags=(0,), quality="exact",
                **kwargs) -> CorrelationSequence:
    """Correlation sequence ``<T^n f, g>`` over ``lags``.

    ``quality`` is ``"exact"`` (rotation or skew torus with characters),
    an :class:`Empirical` setting, or an integer orbit length.
    """
    g = f if g is None else g
    if quality == "exact":
        if system.family not in ("rotation", "skew_torus"):
            raise CapabilityError(f"exact correlations are not available for {system.family}")
        return exact_correlation(system, f, g, lags)
    return empirical_correlation(system, f, g, lags, quality, **kwargs)
