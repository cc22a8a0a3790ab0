"""Concrete measure-preserving systems over Z and the observables evaluated on them.

Families
--------
``rotation``      x -> x + alpha (mod 1) on [0, 1) with Lebesgue measure.
``skew_torus``    (x, y) -> (x, y + x) on [0, 1)^2 with ``base (x) Lebesgue``.
``chacon``        subshift of the fixed point of 0 -> 0010, 1 -> 1.
``rudin_shapiro`` four-letter substitution a->ab, b->ac, c->db, d->dc; the
                  +-1 Rudin-Shapiro sequence is the coding a,b -> +1, c,d -> -1.
``iet``           interval exchange, right-continuous branches.
``bernoulli``     i.i.d. symbols (a strongly mixing surrogate).

All descriptors are frozen dataclasses and serialize to plain JSON objects.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import InputError

FAMILIES = ("rotation", "skew_torus", "chacon", "rudin_shapiro", "iet", "bernoulli")
SYMBOLIC = ("chacon", "rudin_shapiro", "bernoulli")

#: Seed point for orbit-based systems.
DEFAULT_X0 = math.sqrt(2.0) - 1.0
DEFAULT_BURN_IN = 1000
DEFAULT_CANTOR_DEPTH = 40

RS_ALPHABET = "abcd"
_RS_FIRST = np.array([0, 0, 3, 3], dtype=np.int8)
_RS_SECOND = np.array([1, 2, 1, 2], dtype=np.int8)
_RS_SIGN = np.array([1, 1, -1, -1], dtype=np.int8)


# --------------------------------------------------------------------------
# Cantor measure on base-4 digits {0, 1}
# --------------------------------------------------------------------------

def _lowest_nonzero_base4_digit(n: int) -> tuple[int, int]:
    """(digit, position) of the least significant nonzero base-4 digit of n != 0."""
    n = abs(int(n))
    pos = 0
    while n % 4 == 0:
        n //= 4
        pos += 1
    return n % 4, pos


def cantor_zero(n: int, K: int = DEFAULT_CANTOR_DEPTH) -> bool:
    """Digit rule: the truncated transform vanishes iff the first nonzero digit is 2."""
    if n == 0:
        return False
    digit, pos = _lowest_nonzero_base4_digit(n)
    return digit == 2 and pos < K


def cantor_fourier(n: int, K: int = DEFAULT_CANTOR_DEPTH) -> complex:
    """Fourier coefficient ``int exp(-2 pi i n x) dmu(x)`` of the base-4 Cantor measure.

    ``mu`` is the law of ``sum_k d_k 4**-k`` with i.i.d. fair digits in {0, 1},
    truncated to ``K`` digits.  Phases are reduced modulo 1 in exact integer
    arithmetic, and zeros given by the digit rule are returned as exact 0.
    """
    K = int(K)
    if K < 8:
        raise InputError("Cantor truncation depth K must be >= 8")
    n = int(n)
    if cantor_zero(n, K):
        return 0j
    val = 1.0 + 0j
    for k in range(1, K + 1):
        mod = 4**k
        phase = (n % mod) / mod
        val *= (1.0 + np.exp(-2j * np.pi * phase)) / 2.0
    return complex(val)


def cantor_fourier_array(ns, K: int = DEFAULT_CANTOR_DEPTH) -> np.ndarray:
    """Vectorized :func:`cantor_fourier` for integer arrays with ``|n| < 2**62``."""
    K = int(K)
    if K < 8:
        raise InputError("Cantor truncation depth K must be >= 8")
    n = np.asarray(ns, dtype=np.int64)
    out = np.ones(n.shape, dtype=np.complex128)
    zero = np.zeros(n.shape, dtype=bool)
    for k in range(1, K + 1):
        if k <= 31:
            mod = np.int64(4) ** k
            phase = np.mod(n, mod).astype(np.float64) / float(mod)
            # factor k vanishes exactly when n = 2 * 4**(k-1) * odd
            zero |= np.mod(n, mod) * 2 == mod
        else:
            phase = np.mod(n.astype(np.float64) * 4.0 ** (-k), 1.0)
        out *= np.exp(-1j * np.pi * phase) * np.cos(np.pi * phase)
    out[zero] = 0.0
    return out


def sample_cantor(size: int, rng, K: int = DEFAULT_CANTOR_DEPTH) -> np.ndarray:
    """Draw points of the truncated base-4 Cantor measure (precision-limited to ~26 digits)."""
    rng = np.random.default_rng(rng)
    depth = min(K, 26)
    digits = rng.integers(0, 2, size=(size, depth))
    weights = 4.0 ** -np.arange(1, depth + 1)
    return digits @ weights


@dataclass(frozen=True)
class BaseMeasure:
    """Base measure of the skew torus: ``lebesgue`` or ``cantor4`` with depth ``K``."""

    kind: str = "lebesgue"
    K: int = DEFAULT_CANTOR_DEPTH

    def __post_init__(self):
        if self.kind not in ("lebesgue", "cantor4"):
            raise InputError(f"unknown base measure {self.kind!r}")
        if self.kind == "cantor4" and self.K < 8:
            raise InputError("cantor4 truncation K must be >= 8")

    def fourier(self, n: int) -> complex:
        """``int exp(-2 pi i n x) d(base)``."""
        if self.kind == "lebesgue":
            return 1.0 + 0j if n == 0 else 0j
        return cantor_fourier(n, self.K)

    def fourier_array(self, ns) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        if self.kind == "lebesgue":
            return (ns == 0).astype(np.complex128)
        return cantor_fourier_array(ns, self.K)

    def sample(self, size: int, rng) -> np.ndarray:
        if self.kind == "lebesgue":
            return np.random.default_rng(rng).random(size)
        return sample_cantor(size, rng, self.K)

    def to_json(self) -> dict:
        return {"kind": self.kind, "K": self.K} if self.kind == "cantor4" else {"kind": self.kind}


# --------------------------------------------------------------------------
# Symbolic sequences
# --------------------------------------------------------------------------

def chacon_heights(count: int) -> list[int]:
    """Tower heights ``h_0 = 1``, ``h_{k+1} = 3 h_k + 1`` (lengths of iterated 0 -> 0010)."""
    count = int(count)
    if count < 1:
        raise InputError("count must be positive")
    if count > 40:
        raise InputError("count capped at 40 so heights fit in 64 bits")
    hs = [1]
    while len(hs) < count:
        hs.append(3 * hs[-1] + 1)
    return hs


def chacon_word(length: int) -> np.ndarray:
    """Prefix of the one-sided fixed point of 0 -> 0010, 1 -> 1 (as int8 array)."""
    seq = np.zeros(1, dtype=np.int8)
    while seq.size < length:
        sizes = np.where(seq == 0, 4, 1)
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        out = np.empty(int(sizes.sum()), dtype=np.int8)
        s0 = starts[seq == 0]
        out[s0] = 0
        out[s0 + 1] = 0
        out[s0 + 2] = 1
        out[s0 + 3] = 0
        out[starts[seq == 1]] = 1
        seq = out
    return seq[:length]


def rudin_shapiro_word(length: int) -> np.ndarray:
    """Prefix of the four-letter Rudin-Shapiro fixed point (letters 0..3 = a..d)."""
    seq = np.zeros(1, dtype=np.int8)
    while seq.size < length:
        out = np.empty(2 * seq.size, dtype=np.int8)
        out[0::2] = _RS_FIRST[seq]
        out[1::2] = _RS_SECOND[seq]
        seq = out
    return seq[:length]


def rudin_shapiro_sequence(N: int) -> np.ndarray:
    """``r_n = (-1)**(number of '11' blocks in binary n)`` for ``0 <= n < N``."""
    N = int(N)
    if N < 1:
        raise InputError("N must be positive")
    if N > 2**26:
        raise InputError("N capped at 2**26")
    n = np.arange(N, dtype=np.uint32)
    pairs = np.bitwise_count(n & (n >> 1)).astype(np.int64)
    return np.where(pairs % 2 == 0, 1, -1).astype(np.int8)


# --------------------------------------------------------------------------
# Interval exchanges
# --------------------------------------------------------------------------

def _iet_tables(lengths, permutation) -> tuple[np.ndarray, np.ndarray]:
    lam = np.asarray(lengths, dtype=np.float64)
    perm = [int(p) for p in permutation]
    d = lam.size
    if d < 1 or np.any(lam <= 0):
        raise InputError("IET lengths must be positive")
    if abs(lam.sum() - 1.0) > 1e-12:
        raise InputError(f"IET lengths must sum to 1, got {lam.sum()!r}")
    if sorted(perm) != list(range(1, d + 1)):
        raise InputError(f"permutation must be a bijection of 1..{d}, got {perm}")
    starts = np.concatenate(([0.0], np.cumsum(lam)[:-1]))
    # perm lists the intervals (1-based) in their order after the exchange
    new_starts = np.empty(d)
    pos = 0.0
    for label in perm:
        new_starts[label - 1] = pos
        pos += lam[label - 1]
    return starts, new_starts - starts


def iet_apply(lengths, permutation, x):
    """Apply the interval exchange to ``x`` (scalar or array) in ``[0, 1)``.

    ``permutation`` lists the 1-based interval labels in their order after the
    exchange, so ``(2, 1)`` swaps two intervals.  A point on a discontinuity
    belongs to the interval on its right.
    """
    starts, shifts = _iet_tables(lengths, permutation)
    xs = np.asarray(x, dtype=np.float64)
    if np.any((xs < 0) | (xs >= 1)):
        raise InputError("IET points must lie in [0, 1)")
    i = np.searchsorted(starts, xs, side="right") - 1
    out = np.mod(xs + shifts[i], 1.0)
    return float(out) if np.ndim(x) == 0 else out


# --------------------------------------------------------------------------
# Descriptors
# --------------------------------------------------------------------------

def _looks_rational(alpha: float, max_den: int = 10**6) -> bool:
    frac = Fraction(alpha).limit_denominator(max_den)
    return abs(float(frac) - alpha) < 1e-13


def convergent_denominators(alpha: float, count: int) -> list[int]:
    """Denominators ``q_k`` of the continued-fraction convergents of ``alpha``.

    Float input limits this to ``q_k`` below roughly ``1e7``; beyond that the
    partial quotients are rounding noise and the list stops early.
    """
    x = float(alpha) % 1.0
    qs: list[int] = []
    q_prev, q = 0, 1
    while len(qs) < count and x > 1e-15:
        x = 1.0 / x
        a = math.floor(x)
        x -= a
        q_prev, q = q, a * q + q_prev
        if q > 10**7:
            break
        if not qs or q > qs[-1]:
            qs.append(q)
    return qs


@dataclass(frozen=True)
class System:
    """A named measure-preserving transformation with family-specific parameters."""

    family: str
    name: str = ""
    alpha: float | None = None
    irrational: bool | None = None
    base: BaseMeasure | None = None
    lengths: tuple | None = None
    permutation: tuple | None = None
    probs: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown system family {self.family!r}")
        if not self.name:
            object.__setattr__(self, "name", self.family)
        if self.family == "rotation":
            if self.alpha is None or not (0.0 <= self.alpha < 1.0):
                raise InputError("rotation needs alpha in [0, 1)")
            if self.irrational is None:
                object.__setattr__(self, "irrational", not _looks_rational(self.alpha))
        elif self.family == "skew_torus":
            if self.base is None:
                object.__setattr__(self, "base", BaseMeasure())
        elif self.family == "iet":
            _iet_tables(self.lengths, self.permutation)
        elif self.family == "bernoulli":
            p = np.asarray(self.probs if self.probs is not None else (0.5, 0.5), dtype=float)
            if p.size < 2 or p.size > 10 or np.any(p <= 0) or abs(p.sum() - 1) > 1e-12:
                raise InputError("bernoulli needs 2..10 positive probabilities summing to 1")
            object.__setattr__(self, "probs", tuple(float(v) for v in p))

    # -- structure --------------------------------------------------------
    @property
    def symbolic(self) -> bool:
        return self.family in SYMBOLIC

    @property
    def alphabet(self) -> str:
        if self.family == "chacon":
            return "01"
        if self.family == "rudin_shapiro":
            return RS_ALPHABET
        if self.family == "bernoulli":
            return "0123456789"[: len(self.probs)]
        raise InputError(f"{self.family} is not symbolic")

    @property
    def ergodic(self) -> bool:
        if self.family == "rotation":
            return bool(self.irrational)
        return self.family != "skew_torus"

    def word(self, length: int) -> np.ndarray:
        """Prefix of the generic symbolic point used for orbit statistics."""
        if self.family == "chacon":
            return chacon_word(length)
        if self.family == "rudin_shapiro":
            return rudin_shapiro_word(length)
        if self.family == "bernoulli":
            rng = np.random.default_rng(self.seed)
            return rng.choice(len(self.probs), size=length, p=self.probs).astype(np.int8)
        raise InputError(f"{self.family} is not symbolic")

    def apply(self, x):
        """One step of the map on points (rotation, iet: scalars/arrays; skew_torus: (x, y))."""
        return self.jump(x, 1)

    def jump(self, x, n: int):
        """``T**n`` in closed form where one exists (rotation, skew_torus); iterates an iet."""
        if self.family == "rotation":
            return np.mod(np.asarray(x) + n * self.alpha, 1.0)
        if self.family == "skew_torus":
            xs, ys = x
            return xs, np.mod(ys + n * np.asarray(xs), 1.0)
        if self.family == "iet":
            if n < 0:
                raise InputError("inverse iet iteration is not provided")
            pts = np.asarray(x, dtype=float)
            for _ in range(n):
                pts = iet_apply(self.lengths, self.permutation, pts)
            return pts
        raise InputError(f"{self.family} has no point dynamics; use word()")

    def orbit(self, x0: float, length: int) -> np.ndarray:
        """Orbit ``x0, T x0, ...`` of a one-dimensional system."""
        if self.family == "rotation":
            return np.mod(x0 + np.arange(length, dtype=np.float64) * self.alpha, 1.0)
        if self.family == "iet":
            starts, shifts = _iet_tables(self.lengths, self.permutation)
            out = np.empty(length)
            x = float(x0)
            for t in range(length):
                out[t] = x
                x = x + shifts[np.searchsorted(starts, x, side="right") - 1]
                if x >= 1.0:
                    x -= 1.0
            return out
        raise InputError(f"{self.family} has no one-dimensional orbit")

    def to_json(self) -> dict:
        d: dict = {"family": self.family, "name": self.name}
        if self.family == "rotation":
            d.update(alpha=self.alpha, irrational=self.irrational)
        elif self.family == "skew_torus":
            d["base"] = self.base.to_json()
        elif self.family == "iet":
            d.update(lengths=list(self.lengths), permutation=list(self.permutation))
        elif self.family == "bernoulli":
            d.update(probs=list(self.probs), seed=self.seed)
        return d

    @classmethod
    def from_json(cls, obj: Mapping) -> System:
        obj = dict(obj)
        family = obj.pop("family", None)
        if family not in FAMILIES:
            raise InputError(f"unknown system family {family!r}")
        if "base" in obj and obj["base"] is not None:
            obj["base"] = BaseMeasure(**obj["base"])
        for key in ("lengths", "permutation", "probs"):
            if key in obj and obj[key] is not None:
                obj[key] = tuple(obj[key])
        allowed = {"name", "alpha", "irrational", "base", "lengths", "permutation", "probs", "seed"}
        unknown = set(obj) - allowed
        if unknown:
            raise InputError(f"unknown system fields {sorted(unknown)}")
        return cls(family=family, **obj)


def rotation(alpha: float, irrational: bool | None = None) -> System:
    return System("rotation", alpha=float(alpha) % 1.0, irrational=irrational)


def skew_torus(base: BaseMeasure | str = "lebesgue", K: int = DEFAULT_CANTOR_DEPTH) -> System:
    if isinstance(base, str):
        base = BaseMeasure(base, K)
    return System("skew_torus", base=base, name=f"skew_torus[{base.kind}]")


def chacon() -> System:
    return System("chacon")


def rudin_shapiro() -> System:
    return System("rudin_shapiro")


def iet(lengths: Sequence[float], permutation: Sequence[int]) -> System:
    return System("iet", lengths=tuple(float(v) for v in lengths), permutation=tuple(int(p) for p in permutation))


def bernoulli(probs: Sequence[float] = (0.5, 0.5), seed: int = 0) -> System:
    return System("bernoulli", probs=tuple(probs), seed=seed)


# --------------------------------------------------------------------------
# Observables
# --------------------------------------------------------------------------

OBSERVABLE_KINDS = ("character", "cylinder", "interval_indicator", "symbol_map")


@dataclass(frozen=True)
class Observable:
    """A function on a system's phase space.

    ``character``           exp(2 pi i k.x) with integer frequencies k.
    ``cylinder``            indicator of the union of the cylinders ``[w]`` at ``offset``.
    ``interval_indicator``  indicator of [a, b) in the first coordinate.
    ``symbol_map``          ``values[x_0]`` for a symbolic point x.

    When ``centered`` is set, ``mean`` is subtracted on evaluation (``mean``
    may be left ``None`` and estimated from the orbit).
    """

    kind: str
    name: str = ""
    frequencies: tuple = ()
    words: tuple = ()
    offset: int = 0
    a: float = 0.0
    b: float = 1.0
    values: tuple = ()
    mean: complex | None = None
    centered: bool = False

    def __post_init__(self):
        if self.kind not in OBSERVABLE_KINDS:
            raise InputError(f"unknown observable kind {self.kind!r}")
        if self.kind == "character":
            if not self.frequencies or any(int(k) != k for k in self.frequencies):
                raise InputError("character needs integer frequencies")
        elif self.kind == "cylinder":
            if not self.words or any(not w for w in self.words):
                raise InputError("cylinder needs at least one non-empty word")
            if len({len(w) for w in self.words}) != 1:
                raise InputError("cylinder words must share one length")
        elif self.kind == "interval_indicator":
            if not (0.0 <= self.a < self.b <= 1.0):
                raise InputError("interval indicator needs 0 <= a < b <= 1")
        elif self.kind == "symbol_map" and not self.values:
            raise InputError("symbol_map needs a value per symbol")
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    def _default_name(self) -> str:
        if self.kind == "character":
            return "e" + ",".join(str(k) for k in self.frequencies)
        if self.kind == "cylinder":
            return "[" + "|".join(self.words) + f"]@{self.offset}"
        if self.kind == "interval_indicator":
            return f"1[{self.a:g},{self.b:g})"
        return "map(" + ",".join(f"{complex(v):g}" for v in self.values) + ")"

    @property
    def is_indicator(self) -> bool:
        return self.kind in ("cylinder", "interval_indicator")

    def centered_version(self, mean: complex | None = None) -> Observable:
        return Observable(
            kind=self.kind, name=self.name + "~", frequencies=self.frequencies, words=self.words,
            offset=self.offset, a=self.a, b=self.b, values=self.values,
            mean=self.mean if mean is None else mean, centered=True,
        )

    def with_offset(self, offset: int) -> Observable:
        if self.kind != "cylinder":
            raise InputError("only cylinders carry an offset")
        return Observable(kind="cylinder", words=self.words, offset=offset, mean=self.mean, centered=self.centered)

    def to_json(self) -> dict:
        d: dict = {"kind": self.kind, "name": self.name, "centered": self.centered}
        if self.kind == "character":
            d["frequencies"] = list(self.frequencies)
        elif self.kind == "cylinder":
            d.update(words=list(self.words), offset=self.offset)
        elif self.kind == "interval_indicator":
            d.update(a=self.a, b=self.b)
        else:
            d["values"] = [[complex(v).real, complex(v).imag] for v in self.values]
        if self.mean is not None:
            d["mean"] = [complex(self.mean).real, complex(self.mean).imag]
        return d

    @classmethod
    def from_json(cls, obj: Mapping) -> Observable:
        obj = dict(obj)
        kind = obj.pop("kind", None)
        if "mean" in obj and obj["mean"] is not None:
            re, im = obj["mean"]
            obj["mean"] = complex(re, im)
        if "values" in obj:
            obj["values"] = tuple(complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in obj["values"])
        for key in ("frequencies", "words"):
            if key in obj:
                obj[key] = tuple(obj[key])
        if "word" in obj:
            obj["words"] = (obj.pop("word"),)
        return cls(kind=kind, **obj)


def character(*frequencies: int) -> Observable:
    return Observable("character", frequencies=tuple(int(k) for k in frequencies))


def cylinder(word: str | Sequence[str], offset: int = 0) -> Observable:
    words = (word,) if isinstance(word, str) else tuple(word)
    return Observable("cylinder", words=words, offset=int(offset))


def interval_indicator(a: float, b: float) -> Observable:
    return Observable("interval_indicator", a=float(a), b=float(b))


def symbol_map(values: Sequence[complex]) -> Observable:
    return Observable("symbol_map", values=tuple(complex(v) for v in values))


def rudin_shapiro_sign() -> Observable:
    """The +-1 Rudin-Shapiro coding of the four-letter system."""
    return Observable("symbol_map", name="rs_sign", values=tuple(complex(v) for v in _RS_SIGN))


def exact_mean(system: System, obs: Observable) -> complex | None:
    """``int f dmu`` when it is known in closed form, else ``None``."""
    if obs.kind == "character":
        if system.family == "rotation" or (system.family == "iet"):
            return complex(all(k == 0 for k in obs.frequencies))
        if system.family == "skew_torus":
            d, c = _skew_freqs(obs)
            return system.base.fourier(-d) if c == 0 else 0j
    if obs.kind == "interval_indicator" and system.family in ("rotation", "iet"):
        return complex(obs.b - obs.a)
    if system.family == "bernoulli":
        p = np.asarray(system.probs)
        if obs.kind == "symbol_map":
            return complex(np.dot(p, np.asarray(obs.values[: p.size])))
        if obs.kind == "cylinder":
            alpha = system.alphabet
            return complex(sum(math.prod(p[alpha.index(ch)] for ch in w) for w in obs.words))
    return None


def _skew_freqs(obs: Observable) -> tuple[int, int]:
    if len(obs.frequencies) != 2:
        raise InputError("skew-torus characters need frequencies (d, c) for exp(2 pi i (d x + c y))")
    d, c = obs.frequencies
    return int(d), int(c)


# --------------------------------------------------------------------------
# Evaluation on symbolic words and point clouds
# --------------------------------------------------------------------------

def evaluate_symbolic(system: System, obs: Observable, word: np.ndarray, start: int, length: int) -> np.ndarray:
    """Series ``f(T^t x)`` for ``t = 0..length-1`` where x is ``word`` shifted by ``start``."""
    if obs.kind == "symbol_map":
        table = np.zeros(len(system.alphabet), dtype=np.complex128)
        vals = np.asarray(obs.values, dtype=np.complex128)
        if vals.size < table.size:
            raise InputError(f"symbol_map needs {table.size} values for alphabet {system.alphabet!r}")
        table[:] = vals[: table.size]
        series = table[word[start:start + length]]
    elif obs.kind == "cylinder":
        alpha = system.alphabet
        series = np.zeros(length, dtype=bool)
        for w in obs.words:
            try:
                codes = [alpha.index(ch) for ch in w]
            except ValueError as exc:
                raise InputError(f"word {w!r} uses symbols outside alphabet {alpha!r}") from exc
            s = start + obs.offset
            if s < 0 or s + length + len(codes) - 1 > word.size:
                raise InputError("symbolic word too short for cylinder offset")
            hit = np.ones(length, dtype=bool)
            for j, code in enumerate(codes):
                hit &= word[s + j:s + j + length] == code
            series |= hit
        series = series.astype(np.complex128)
    else:
        raise InputError(f"{obs.kind} observables are not defined on symbolic systems")
    if obs.centered and obs.mean is not None:
        series = series - obs.mean
    return series


def evaluate_points(system: System, obs: Observable, pts) -> np.ndarray:
    """Evaluate ``obs`` on points (1-D array, or (x, y) arrays for the skew torus)."""
    if system.family == "skew_torus":
        xs, ys = pts
        if obs.kind == "character":
            d, c = _skew_freqs(obs)
            vals = np.exp(2j * np.pi * (d * np.asarray(xs) + c * np.asarray(ys)))
        elif obs.kind == "interval_indicator":
            xs = np.asarray(xs)
            vals = ((xs >= obs.a) & (xs < obs.b)).astype(np.complex128)
        else:
            raise InputError(f"{obs.kind} observables are not defined on the skew torus")
    else:
        xs = np.asarray(pts, dtype=np.float64)
        if obs.kind == "character":
            if len(obs.frequencies) != 1:
                raise InputError("characters on one-dimensional systems take one frequency")
            vals = np.exp(2j * np.pi * obs.frequencies[0] * xs)
        elif obs.kind == "interval_indicator":
            vals = ((xs >= obs.a) & (xs < obs.b)).astype(np.complex128)
        else:
            raise InputError(f"{obs.kind} observables need a symbolic system")
    if obs.centered and obs.mean is not None:
        vals = vals - obs.mean
    return vals
