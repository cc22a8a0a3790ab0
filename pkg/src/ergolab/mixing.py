"""Mixing and rigidity diagnostics built on correlation sequences and limit schemes.

Verdicts are evidence at finite resolution: weak mixing is read from
Cesaro averages of ``|c|``, the mild-mixing proxy from IP grids over seeded
generator families, and the strong-mixing proxy from tail suprema.
Empirical tests use tolerance 0.05, exact ones 1e-8, and every verdict
records the tolerance it was judged at.
"""

from __future__ import annotations

import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .correlation import CorrelationSequence, Empirical, correlation
from .exceptions import ConvergenceError, InputError
from .operators import (
    OrthogonalDecomposition,
    as_complex_matrix,
    cesaro_limit_operator,
    check_normal,
    sequence_limit_operator,
)
from .schemes import (
    LimitScheme,
    abs_sequence,
    evaluate_limit,
    folner_cesaro,
    ip_grid,
    tail_sup,
)
from .systems import Observable, System, exact_mean

EMPIRICAL_TOL = 0.05
EXACT_TOL = 1e-8
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def _is_exact(system: System, observables) -> bool:
    return system.family in ("rotation", "skew_torus") and all(o.kind == "character" for o in observables)


@dataclass(frozen=True)
class Budget:
    max_lag: int = 10_000
    orbit_length: int = 200_000
    ip_families: int = 3
    ip_generators: int = 8
    max_seconds: float = 600.0
    seed: int = 0


@dataclass
class MixingVerdict:
    weak: str
    mild_proxy: str
    strong_proxy: str
    tolerance: float
    evidence: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "weak": self.weak,
            "mild_proxy": self.mild_proxy,
            "strong_proxy": self.strong_proxy,
            "tolerance": self.tolerance,
            "evidence": {k: [r.to_dict() for r in v] for k, v in self.evidence.items()},
            "diagnostics": list(self.diagnostics),
        }


def _combine(outcomes: Sequence[str]) -> str:
    if any(o == FAIL for o in outcomes):
        return FAIL
    if outcomes and all(o == PASS for o in outcomes):
        return PASS
    return INCONCLUSIVE


def enforce_hierarchy(weak: str, mild: str, strong: str) -> tuple[str, str, str]:
    """Strong implies mild implies weak: failures propagate up the chain, passes down."""
    if weak == FAIL:
        mild = strong = FAIL
    if mild == FAIL:
        strong = FAIL
    if strong == PASS:
        mild = weak = PASS
    if mild == PASS:
        weak = PASS
    return weak, mild, strong


def _tests_for(c: CorrelationSequence, budget: Budget, tol: float, rng) -> dict[str, list]:
    L = budget.max_lag
    windows = sorted({max(1, L // 8), max(2, L // 4), max(3, L // 2), L})
    weak = evaluate_limit(c, folner_cesaro(windows), tol)
    ca = abs_sequence(c)
    top = max(2, L // budget.ip_generators)
    mild = []
    for _ in range(budget.ip_families):
        gens = sorted(int(g) for g in rng.integers(max(1, top // 10), top + 1, size=budget.ip_generators))
        mild.append(evaluate_limit(ca, ip_grid(gens), tol))
    strong = evaluate_limit(c, tail_sup(max(1, L // 10)), tol)
    return {"weak": [weak], "mild": mild, "strong": [strong]}


def _outcome(reports, tol) -> str:
    return PASS if all(abs(r.value) <= tol for r in reports) else FAIL


def classify(system: System, observables: Sequence[Observable], budget: Budget | None = None) -> MixingVerdict:
    """Place ``system`` in the weak/mild/strong mixing hierarchy.

    Observables must be centered.  Empirical evidence is collected at the
    budget's orbit length and at half of it; an observable whose verdicts
    disagree between the two resolutions is marked inconclusive.
    """
    budget = budget or Budget()
    if not observables:
        raise InputError("classify needs at least one observable")
    for o in observables:
        if not o.centered and not (o.kind == "character" and exact_mean(system, o) == 0):
            raise InputError(f"observable {o.name} is not mean-centered")
    exact = _is_exact(system, observables)
    tol = EXACT_TOL if exact else EMPIRICAL_TOL
    t0 = time.monotonic()
    lags = range(budget.max_lag + 1)
    per_obs = {"weak": [], "mild": [], "strong": []}
    evidence: dict = {}
    diagnostics = []
    cache: dict = {}
    for obs in observables:
        if time.monotonic() - t0 > budget.max_seconds:
            diagnostics.append(f"budget exhausted before {obs.name}")
            for outcomes in per_obs.values():
                outcomes.append(INCONCLUSIVE)
            continue
        if exact:
            runs = [correlation(system, obs, obs, lags, "exact")]
        else:
            runs = []
            for n in (budget.orbit_length, budget.orbit_length // 2):
                q = Empirical(orbit_length=n - n % 20)
                runs.append(correlation(system, obs, obs, lags, q, _cache=cache))
        results = [_tests_for(c, budget, tol, np.random.default_rng(budget.seed)) for c in runs]
        for key, outcomes in per_obs.items():
            outs = {_outcome(r[key], tol) for r in results}
            outcomes.append(outs.pop() if len(outs) == 1 else INCONCLUSIVE)
            evidence.setdefault(f"{obs.name}:{key}", []).extend(results[0][key])
    weak, mild, strong = (_combine(per_obs[k]) for k in ("weak", "mild", "strong"))
    weak, mild, strong = enforce_hierarchy(weak, mild, strong)
    return MixingVerdict(weak, mild, strong, tol, evidence, diagnostics)


# --------------------------------------------------------------------------
# rigidity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RigidityProfile:
    """Best partial-rigidity evidence for one indicator observable.

    ``alpha_hat`` is ``liminf mu(A & T^n A) / mu(A)``; ``rigid_fraction`` is the
    centered ratio ``(liminf mu(A & T^n A) - mu(A)^2) / (mu(A)(1 - mu(A)))``,
    which vanishes for sequences along which ``A`` mixes.  ``kind`` is read
    from ``rigid_fraction``.
    """

    alpha_hat: float
    sequence: tuple
    kind: str
    rigid_fraction: float
    stderr: float
    candidate: str = ""
    table: tuple = ()

    def to_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "sequence": list(self.sequence),
            "kind": self.kind,
            "rigid_fraction": self.rigid_fraction,
            "stderr": self.stderr,
            "candidate": self.candidate,
            "table": [list(row) for row in self.table],
        }


def _indicator_mass(system: System, f: Observable, quality) -> float:
    m = f.mean if f.mean is not None else exact_mean(system, f)
    if m is None:
        c0 = correlation(system, f, f, [0], quality)
        m = c0[0]  # an indicator satisfies int 1_A^2 = mu(A)
    return float(np.real(m))


def rigidity_search(system: System, f: Observable, candidate_sequences: Mapping[str, Sequence[int]] | Sequence[Sequence[int]],
                    depth: int | None = None, quality=None) -> RigidityProfile:
    """Search candidate sequences for partial rigidity of the indicator ``f``.

    ``depth`` truncates each candidate to its first ``depth`` terms; the
    liminf is the minimum over the final quarter of those terms.
    """
    if not f.is_indicator or f.centered:
        raise InputError("rigidity_search needs an uncentered indicator observable")
    if quality is None:
        quality = Empirical()
    if not isinstance(candidate_sequences, Mapping):
        candidate_sequences = {f"candidate{i}": s for i, s in enumerate(candidate_sequences)}
    mu = _indicator_mass(system, f, quality)
    if not 0.0 < mu < 1.0:
        raise InputError(f"indicator has degenerate measure {mu}")
    var = mu * (1.0 - mu)
    best = None
    table = []
    cache: dict = {}
    for name, seq in candidate_sequences.items():
        seq = [int(n) for n in seq][: depth or None]
        if len(seq) < 4:
            raise InputError(f"candidate {name} needs at least 4 terms")
        win = seq[-max(2, len(seq) // 4):]
        c = correlation(system, f, f, win, quality, _cache=cache) if quality != "exact" else correlation(system, f, f, win, quality)
        vals = np.real(c.array(win))
        j = int(np.argmin(vals))
        liminf = float(vals[j])
        se = float(c.stderr[win[j]]) if c.stderr else 0.0
        alpha = float(np.clip(liminf / mu, 0.0, 1.0))
        frac = float(np.clip((liminf - mu * mu) / var, 0.0, 1.0))
        table.append((name, alpha, frac, se / mu))
        if best is None or alpha > best[0]:
            best = (alpha, frac, se / mu, name, tuple(seq))
    alpha, frac, se, name, seq = best
    if frac <= 0.01:
        kind = "none_found"
    elif frac >= 0.99:
        kind = "rigid"
    else:
        kind = "alpha_rigid"
    return RigidityProfile(alpha, seq, kind, frac, se, name, tuple(table))


# --------------------------------------------------------------------------
# Chacon weak limits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WeakLimitFit:
    weights: tuple
    powers: tuple
    residual: float
    theta_residual: float
    targets: tuple

    @property
    def support(self) -> tuple:
        return tuple(b for a, b in zip(self.weights, self.powers) if a > 1e-3)

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "powers": list(self.powers),
            "support": list(self.support),
            "residual": self.residual,
            "theta_residual": self.theta_residual,
        }


def default_chacon_basis() -> list[Observable]:
    from .systems import cylinder

    words = [("0",), ("00",), ("01",), ("10",), ("001",), ("010",), ("100",), ("0001", "0100", "1000")]
    return [cylinder(w).centered_version() for w in words]


def chacon_weak_limit_fit(max_power: int, sequence: Sequence[int], basis: Sequence[Observable] | None = None,
                          system: System | None = None, quality=None) -> WeakLimitFit:
    """Fit ``lim c_{f,g}(n_k) = sum_j a_j <T^{b_j} f, g>`` with ``a >= 0`` and ``sum a = 1``.

    ``b_j`` ranges over ``-max_power..max_power``; the limit is proxied by the
    mean over the last quarter of ``sequence``.  ``theta_residual`` is the
    misfit of the mixing model ``T^p = Theta`` (all centered correlations
    vanish), for comparison.
    """
    from .systems import chacon

    B = int(max_power)
    if not 0 <= B <= 8:
        raise InputError("max_power must be in 0..8")
    system = system or chacon()
    basis = list(basis) if basis is not None else default_chacon_basis()
    quality = quality or Empirical(orbit_length=1_000_000)
    seq = [int(n) for n in sequence]
    win = seq[-max(1, len(seq) // 4):]
    powers = list(range(-B, B + 1))
    rows, targets = [], []
    cache: dict = {}
    for f in basis:
        for g in basis:
            lags = sorted(set(powers) | set(win))
            c = correlation(system, f, g, lags, quality, _cache=cache)
            rows.append([c[b] for b in powers])
            targets.append(np.mean([c[n] for n in win]))
    X = np.array(rows)
    y = np.array(targets)
    # complex least squares as a stacked real problem; the simplex constraint
    # enters as one heavily weighted row
    w = 1e3
    A = np.vstack((X.real, X.imag, w * np.ones((1, len(powers)))))
    rhs = np.concatenate((y.real, y.imag, [w]))
    a, _ = nnls(A, rhs)
    a = a / a.sum() if a.sum() > 0 else a
    fit = X @ a
    residual = float(np.max(np.abs(fit - y)))
    theta_residual = float(np.max(np.abs(y)))
    return WeakLimitFit(tuple(float(v) for v in a), tuple(powers), residual, theta_residual, tuple(complex(v) for v in y))


# --------------------------------------------------------------------------
# U-split
# --------------------------------------------------------------------------

def limit_operator(u, scheme: LimitScheme, tol: float):
    if scheme.kind == "subsequence":
        return sequence_limit_operator(u, scheme.indices, tol)
    if scheme.kind == "folner_cesaro":
        return cesaro_limit_operator(u, scheme.windows, tol)
    raise InputError(f"no operator limit for {scheme.kind} schemes")


def split_from_limits(limits: Sequence, tol: float = 1e-8) -> OrthogonalDecomposition:
    """``p_kernel`` projects onto the common kernel of the (normal) limit operators."""
    mats = [as_complex_matrix(m, "limit") for m in limits]
    if not mats:
        raise InputError("need at least one limit operator")
    for m in mats:
        if not check_normal(m, max(10 * tol, 1e-9)):
            raise InputError("limit operators must be normal")
    stacked = np.vstack(mats)
    _, s, vh = np.linalg.svd(stacked)
    s_full = np.zeros(vh.shape[0])
    s_full[: s.size] = s
    null = vh[s_full <= tol].conj().T
    p_ker = null @ null.conj().T
    p_ker = 0.5 * (p_ker + p_ker.conj().T)
    dim = mats[0].shape[0]
    return OrthogonalDecomposition(np.eye(dim) - p_ker, p_ker, max(tol, 1e-12) * dim)


def u_split(u, schemes: Sequence[LimitScheme], tol: float = 1e-6) -> OrthogonalDecomposition:
    """Split ``C^d`` into the part seen by the limit operators and their common kernel.

    Subsequence schemes give unitary-limit operators (trivial kernel in finite
    dimension); Folner-Cesaro schemes give the mean-ergodic projection.
    """
    limits = []
    for i, sch in enumerate(schemes):
        rep = limit_operator(u, sch, tol)
        if not rep.converged:
            raise ConvergenceError(f"scheme #{i} ({sch.kind}) did not converge: residual {rep.residual:.3e}")
        limits.append(rep.limit)
    return split_from_limits(limits, tol)


# --------------------------------------------------------------------------
# alpha-weak mixing along a sequence
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaMixingResult:
    verdict: bool | None
    pairs: tuple

    def __bool__(self):
        return bool(self.verdict)


def alpha_weak_mixing_check(system: System, pairs: Sequence[tuple[Observable, Observable]], sequence: Sequence[int],
                            alpha: float, tol: float = EMPIRICAL_TOL, quality=None) -> AlphaMixingResult:
    """Is ``lim mu(A & T^-n B) = alpha mu(A) mu(B) + (1 - alpha) mu(A & B)`` for every pair?

    Each limit is the final-quarter value of ``<T^n 1_B, 1_A>``; a pair whose
    window spreads by more than ``tol`` is inconclusive, which makes the
    overall verdict ``None`` unless another pair already fails.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InputError("alpha must lie in [0, 1]")
    quality = quality or Empirical()
    seq = [int(n) for n in sequence]
    win = seq[-max(2, len(seq) // 4):]
    rows = []
    verdicts = []
    cache: dict = {}
    for A, B in pairs:
        if not (A.is_indicator and B.is_indicator) or A.centered or B.centered:
            raise InputError("pairs must be uncentered indicators")
        c = correlation(system, B, A, sorted(set(win) | {0}), quality, _cache=cache)
        mu_a = _indicator_mass(system, A, quality)
        mu_b = _indicator_mass(system, B, quality)
        mu_ab = float(np.real(c[0]))
        target = alpha * mu_a * mu_b + (1 - alpha) * mu_ab
        vals = np.real(c.array(win))
        spread = float(np.max(vals) - np.min(vals))
        lim = float(vals[-1])
        if spread > tol:
            ok = None
        else:
            ok = bool(abs(lim - target) <= tol)
        verdicts.append(ok)
        rows.append({"A": A.name, "B": B.name, "limit": lim, "target": target, "spread": spread, "ok": ok})
    if any(v is False for v in verdicts):
        verdict = False
    elif all(v is True for v in verdicts):
        verdict = True
    else:
        verdict = None
    return AlphaMixingResult(verdict, tuple(rows))
