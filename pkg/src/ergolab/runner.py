"""Scenario files: validation, the operation registry and deterministic execution.

A scenario is a JSON object::

    {"name": "...", "seed": 0,
     "steps": [{"op": "cantor_identities", "params": {...},
                "assert": [{"path": "max_scaling_error", "op": "<=", "value": 1e-8}]}]}

Every step writes its summary into one JSON document and, when it has a
table, a CSV file named ``NN_<op>.csv``.  Identical scenario and seed give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import operator
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import joinings as fj
from .correlation import CorrelationSequence, Empirical, correlation
from .exceptions import ErgolabError, InputError
from .mixing import (
    Budget,
    alpha_weak_mixing_check,
    chacon_weak_limit_fit,
    classify,
    rigidity_search,
    u_split,
)
from .operators import (
    MAX_DIM,
    assert_projection_from_idempotent_contraction,
    image_kernel_decomposition,
    kernel_power_invariance,
    random_normal,
)
from .schemes import (
    LimitScheme,
    cyclic_shift,
    scheme_zero_equivalence,
    subsequence,
    vdc_conclusion_check,
    vdc_inequality_check,
)
from .spectral import (
    convolve_coefficients,
    fejer_estimate,
    rajchman_report,
    wiener_atom_mass,
)
from .systems import (
    FAMILIES,
    Observable,
    System,
    cantor_fourier,
    cantor_zero,
    chacon_heights,
    convergent_denominators,
    rudin_shapiro_sequence,
)

EXIT_OK, EXIT_ASSERT, EXIT_INPUT = 0, 1, 2


class ScenarioError(ErgolabError):
    """Malformed scenario; ``location`` points at the offending part."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


# --------------------------------------------------------------------------
# schema fragments
# --------------------------------------------------------------------------

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_POS = {"type": "integer", "minimum": 1}

SYSTEM_SCHEMA = {
    "oneOf": [
        {"type": "string", "enum": list(FAMILIES)},
        {
            "type": "object",
            "required": ["family"],
            "properties": {
                "family": {"enum": list(FAMILIES)},
                "name": {"type": "string"},
                "alpha": _NUM,
                "irrational": {"type": "boolean"},
                "base": {"type": "object"},
                "lengths": {"type": "array", "items": _NUM},
                "permutation": {"type": "array", "items": _INT},
                "probs": {"type": "array", "items": _NUM},
                "seed": _INT,
            },
            "additionalProperties": False,
        },
    ]
}

OBSERVABLE_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["character", "cylinder", "interval_indicator", "symbol_map"]},
        "name": {"type": "string"},
        "centered": {"type": "boolean"},
        "frequencies": {"type": "array", "items": _INT},
        "words": {"type": "array", "items": {"type": "string"}},
        "word": {"type": "string"},
        "offset": _INT,
        "a": _NUM,
        "b": _NUM,
        "values": {"type": "array"},
        "mean": {"type": "array"},
    },
    "additionalProperties": False,
}

SEQUENCE_SCHEMA = {
    "oneOf": [
        {"type": "array", "items": _INT, "minItems": 1},
        {
            "type": "object",
            "properties": {
                "powers": {"type": "integer", "minimum": 2},
                "chacon_heights": _POS,
                "convergents": _NUM,
                "start": {"type": "integer", "minimum": 0},
                "count": _POS,
            },
            "additionalProperties": False,
            "minProperties": 1,
        },
    ]
}

QUALITY_SCHEMA = {
    "oneOf": [
        {"const": "exact"},
        _POS,
        {
            "type": "object",
            "properties": {"orbit_length": _POS, "burn_in": {"type": "integer", "minimum": 0}, "batches": _POS},
            "additionalProperties": False,
        },
    ]
}

LAGS_SCHEMA = {
    "oneOf": [
        {"type": "array", "items": _INT, "minItems": 1},
        {
            "type": "object",
            "required": ["stop"],
            "properties": {"start": _INT, "stop": _INT, "step": _POS},
            "additionalProperties": False,
        },
    ]
}

FINITE_SCHEMA = {
    "type": "object",
    "properties": {
        "cyclic": _POS,
        "cycle_lengths": {"type": "array", "items": _POS, "minItems": 1},
        "weights": {"type": "array"},
        "map": {"type": "array", "items": _INT},
        "measure": {"type": "array"},
    },
    "additionalProperties": False,
    "minProperties": 1,
}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------

def parse_system(obj) -> System:
    if isinstance(obj, str):
        if obj not in FAMILIES:
            raise InputError(f"unknown system {obj!r}")
        obj = {"family": obj}
        if obj["family"] == "rotation":
            raise InputError("rotation needs an object with 'alpha'")
    return System.from_json(obj)


def parse_observable(obj) -> Observable:
    return Observable.from_json(obj)


def parse_sequence(obj) -> list[int]:
    if isinstance(obj, list):
        return [int(n) for n in obj]
    start = int(obj.get("start", 0))
    count = int(obj.get("count", 12))
    if "powers" in obj:
        return [int(obj["powers"]) ** k for k in range(start, start + count)]
    if "chacon_heights" in obj:
        return chacon_heights(int(obj["chacon_heights"]))[start:]
    if "convergents" in obj:
        return convergent_denominators(float(obj["convergents"]), start + count)[start:]
    raise InputError(f"cannot build a sequence from {obj}")


def parse_quality(obj, default_length: int = 100_000):
    if obj is None:
        return Empirical(orbit_length=default_length)
    if obj == "exact":
        return "exact"
    if isinstance(obj, int):
        return Empirical(orbit_length=obj)
    return Empirical(**obj)


def parse_lags(obj) -> list[int]:
    if isinstance(obj, list):
        return [int(n) for n in obj]
    return list(range(int(obj.get("start", 0)), int(obj["stop"]), int(obj.get("step", 1))))


def parse_finite(obj) -> fj.FiniteSystem:
    return fj.FiniteSystem.from_json(obj)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _clean(v):
    """JSON-safe, deterministic view of results."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_clean(float(v.real)), _clean(float(v.imag))]
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f) or math.isinf(f):
            return str(f)
        return f
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    return v


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


@dataclass
class StepResult:
    summary: dict
    table: str | None = None


@dataclass
class Operation:
    name: str
    description: str
    schema: dict
    fn: Callable[[dict, int], StepResult]


REGISTRY: dict[str, Operation] = {}


def operation(name: str, description: str, props: dict, required=()):
    def deco(fn):
        REGISTRY[name] = Operation(name, description, _obj(props, required), fn)
        return fn
    return deco


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def _base4_rule(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    while n % 4 == 0:
        n //= 4
    return n % 4 == 2


@operation("cantor_identities", "zero set, 4-scaling and factorization of the Cantor measure's Fourier coefficients",
           {"max_n": _POS, "j": _POS, "m_range": _POS, "K": {"type": "integer", "minimum": 8}})
def _op_cantor(p, seed):
    N, j, R, K = p.get("max_n", 4096), p.get("j", 12), p.get("m_range", 16), p.get("K", 40)
    rows, zero_mismatch, scale_err = [], 0, 0.0
    for n in range(-N, N + 1):
        v = cantor_fourier(n, K)
        rule = _base4_rule(n)
        exact_zero = v == 0
        zero_mismatch += int(exact_zero != rule or cantor_zero(n, K) != rule)
        # the same depth on both sides: 4n at depth K+1 is n at depth K
        scale_err = max(scale_err, abs(cantor_fourier(4 * n, K + 1) - v))
        rows.append((n, float(v.real), float(v.imag), int(exact_zero), int(rule)))
    fac_err = 0.0
    for m in range(-R, R + 1):
        for n in range(-R, R + 1):
            lhs = cantor_fourier(m * 4**j + n, K)
            fac_err = max(fac_err, abs(lhs - cantor_fourier(n, K) * cantor_fourier(m, K)))
    summary = {"checked": 2 * N + 1, "zero_rule_mismatches": zero_mismatch,
               "max_scaling_error": scale_err, "max_factorization_error": fac_err}
    return StepResult(summary, _table(["n", "re", "im", "is_zero", "digit_rule"], rows))


@operation("skew_torus_limits", "exact correlations of the skew torus along powers of 4 against their limits",
           {"base": {"enum": ["lebesgue", "cantor4"]}, "max_freq": _POS, "k": _POS})
def _op_skew(p, seed):
    from .systems import character, skew_torus

    base = p.get("base", "cantor4")
    F, k = p.get("max_freq", 3), p.get("k", 14)
    sys_ = skew_torus(base)
    mu = sys_.base
    rng = range(-F, F + 1)
    rows, max_err, mix_max = [], 0.0, 0.0
    n = 4**k
    for a in rng:
        for b in rng:
            for c in rng:
                for d in rng:
                    val = correlation(sys_, character(d, c), character(a, b), [n], "exact")[n]
                    lim = (b == c) * mu.fourier(a - d) * mu.fourier(-c)
                    err = abs(val - lim)
                    max_err = max(max_err, err)
                    if c % 4 == 2:
                        mix_max = max(mix_max, abs(val))
                    rows.append((a, b, c, d, float(val.real), float(val.imag), float(np.real(lim)),
                                 float(np.imag(lim)), err))
    return StepResult({"n": n, "max_error": max_err, "max_c2mod4": mix_max, "count": len(rows)},
                      _table(["a", "b", "c", "d", "re", "im", "limit_re", "limit_im", "error"], rows))


@operation("correlation", "correlation sequence <T^n f, g>",
           {"system": SYSTEM_SCHEMA, "f": OBSERVABLE_SCHEMA, "g": OBSERVABLE_SCHEMA, "lags": LAGS_SCHEMA,
            "quality": QUALITY_SCHEMA}, ["system", "f", "lags"])
def _op_correlation(p, seed):
    sys_ = parse_system(p["system"])
    f = parse_observable(p["f"])
    g = parse_observable(p["g"]) if "g" in p else f
    c = correlation(sys_, f, g, parse_lags(p["lags"]), parse_quality(p.get("quality")))
    mags = np.abs(c.array(c.lags))
    return StepResult({"lags": len(c.lags), "max_abs": float(mags.max()), "mean_abs": float(mags.mean())}, c.to_csv())


@operation("classify", "weak / mild / strong mixing verdicts",
           {"system": SYSTEM_SCHEMA, "observables": {"type": "array", "items": OBSERVABLE_SCHEMA, "minItems": 1},
            "max_lag": _POS, "orbit_length": _POS, "ip_families": _POS},
           ["system", "observables"])
def _op_classify(p, seed):
    sys_ = parse_system(p["system"])
    obs = [parse_observable(o) for o in p["observables"]]
    b = Budget(max_lag=p.get("max_lag", 10_000), orbit_length=p.get("orbit_length", 200_000),
               ip_families=p.get("ip_families", 3), seed=seed)
    v = classify(sys_, obs, b)
    rows = [(k, r.scheme, float(abs(r.value)), r.deviation, int(r.converged)) for k, rs in sorted(v.evidence.items())
            for r in rs]
    return StepResult({"weak": v.weak, "mild_proxy": v.mild_proxy, "strong_proxy": v.strong_proxy,
                       "tolerance": v.tolerance, "diagnostics": v.diagnostics},
                      _table(["test", "scheme", "value", "deviation", "converged"], rows))


@operation("rigidity_search", "partial rigidity constant along candidate sequences",
           {"system": SYSTEM_SCHEMA, "f": OBSERVABLE_SCHEMA,
            "candidates": {"type": "object", "additionalProperties": SEQUENCE_SCHEMA, "minProperties": 1},
            "depth": _POS, "quality": QUALITY_SCHEMA}, ["system", "f", "candidates"])
def _op_rigidity(p, seed):
    sys_ = parse_system(p["system"])
    f = parse_observable(p["f"])
    cands = {k: parse_sequence(v) for k, v in sorted(p["candidates"].items())}
    prof = rigidity_search(sys_, f, cands, p.get("depth"), parse_quality(p.get("quality")))
    d = prof.to_dict()
    table = _table(["candidate", "alpha_hat", "rigid_fraction", "stderr"], d.pop("table"))
    return StepResult(d, table)


@operation("chacon_weak_limit_fit", "nonnegative fit of the weak limit of T^n along a sequence",
           {"max_power": {"type": "integer", "minimum": 0, "maximum": 8}, "sequence": SEQUENCE_SCHEMA,
            "quality": QUALITY_SCHEMA}, ["sequence"])
def _op_chacon_fit(p, seed):
    fit = chacon_weak_limit_fit(p.get("max_power", 3), parse_sequence(p["sequence"]),
                                quality=parse_quality(p.get("quality"), 1_000_000))
    rows = list(zip(fit.powers, fit.weights))
    return StepResult(fit.to_dict(), _table(["power", "weight"], rows))


@operation("rudin_shapiro_autocorrelation", "autocorrelation of the +-1 Rudin-Shapiro sequence",
           {"log2_N": {"type": "integer", "minimum": 4, "maximum": 24}, "max_lag": _POS})
def _op_rs(p, seed):
    N = 2 ** p.get("log2_N", 20)
    L = p.get("max_lag", 64)
    r = rudin_shapiro_sequence(N + L).astype(np.float64)
    vals = [(n, float(np.dot(r[n:n + N], r[:N]) / N)) for n in range(L + 1)]
    return StepResult({"N": N, "max_abs_nonzero_lag": max(abs(v) for n, v in vals if n > 0)},
                      _table(["lag", "autocorrelation"], vals))


@operation("fejer", "Fejer spectral estimate with atoms",
           {"system": SYSTEM_SCHEMA, "f": OBSERVABLE_SCHEMA, "L": _POS, "M": _POS, "quality": QUALITY_SCHEMA,
            "thresholds": {"type": "array", "items": _NUM}}, ["system", "f", "L"])
def _op_fejer(p, seed):
    sys_ = parse_system(p["system"])
    f = parse_observable(p["f"])
    L = p["L"]
    c = correlation(sys_, f, f, range(-L, L + 1), parse_quality(p.get("quality")))
    est = fejer_estimate(c, p.get("M"), L)
    summary = {"total_mass": est.total_mass, "continuous_mass": est.continuous_mass(), "atom_mass": est.atom_mass(),
               "min_density": float(est.raw_density.min()),
               "mass_defect": abs(est.raw_density.sum() / est.M - est.total_mass),
               "atoms": [list(a) for a in est.atoms],
               "wiener": wiener_atom_mass(c, L)}
    if "thresholds" in p:
        summary["rajchman"] = {repr(k): v for k, v in rajchman_report(c, p["thresholds"]).items()}
    return StepResult(summary, est.to_csv())


@operation("wiener_atoms", "Wiener's lemma on a measure with prescribed atoms plus Lebesgue part",
           {"atoms": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}},
            "lebesgue_mass": {"type": "number", "minimum": 0}, "N": _POS}, ["atoms"])
def _op_wiener(p, seed):
    atoms = [(float(t), float(m)) for t, m in p["atoms"]]
    leb = float(p.get("lebesgue_mass", 0.0))
    N = p.get("N", 100_000)
    n = np.arange(-N, N + 1)
    vals = sum(m * np.exp(2j * np.pi * n * t) for t, m in atoms) + leb * (n == 0)
    c = CorrelationSequence.from_array(vals, start=-N, same_observable=True)
    got = wiener_atom_mass(c, N)
    want = sum(m * m for _, m in atoms)
    c2 = convolve_coefficients(c, c)
    conv_ok = all(c2[k] == c[k] * c[k] for k in (-N, -1, 0, 1, N))
    return StepResult({"estimate": got, "expected": want, "relative_error": abs(got - want) / want if want else got,
                       "convolution_exact": conv_ok})


@operation("vdc_inequality", "van der Corput chain on random bounded vector sequences",
           {"trials": _POS, "dim": _POS, "length": _POS})
def _op_vdc(p, seed):
    rng = np.random.default_rng(seed)
    worst, rows = -np.inf, []
    for t in range(p.get("trials", 1000)):
        d = int(rng.integers(1, p.get("dim", 8) + 1))
        N = int(rng.integers(1, p.get("length", 64) + 1))
        X = rng.standard_normal((N, d)) + 1j * rng.standard_normal((N, d))
        X /= np.maximum(1.0, np.linalg.norm(X, axis=1, keepdims=True)) * rng.uniform(1.0, 2.0, size=(N, 1))
        r = vdc_inequality_check(X, seed=t)
        worst = max(worst, r.lhs - r.rhs)
        rows.append((t, d, N, r.lhs, r.rhs, r.bound))
    return StepResult({"max_violation": float(worst), "violated": bool(worst > 1e-12)},
                      _table(["trial", "dim", "length", "lhs", "rhs", "bound"], rows))


def adversarial_vdc_example(count: int = 64):
    """Gram matrix ``(1 + |r - t|)^(-1/2)`` realized by a Cholesky factor, sampled at squares."""
    idx = np.arange(count) ** 2
    M = idx[-1] + 1
    G = (1.0 + np.abs(idx[:, None] - idx[None, :])) ** -0.5
    X = np.linalg.cholesky(G + 1e-12 * np.eye(count))
    return G, X, M


@operation("vdc_conclusion", "double-limit-zero implies single-limit-zero on explicit examples",
           {"example": {"enum": ["adversarial", "random_phase"]}, "tol": {"type": "number", "exclusiveMinimum": 0}})
def _op_vdc_conclusion(p, seed):
    tol = p.get("tol", 0.1 if p.get("example", "adversarial") == "adversarial" else 0.05)
    if p.get("example", "adversarial") == "adversarial":
        G, X, _ = adversarial_vdc_example()
        n = G.shape[0]
        win = list(range(n))[-max(2, n // 4):]
        y = X[win].mean(axis=0)
        y /= np.linalg.norm(y)
        res = vdc_conclusion_check(G, subsequence(list(range(n))), X.conj() @ y, tol)
    else:
        rng = np.random.default_rng(seed)
        d, n = 2**14, 64
        X = np.exp(2j * np.pi * rng.random((n, d))) / np.sqrt(d)
        G = X @ X.conj().T
        y = np.zeros(d, dtype=np.complex128)
        y[0] = 1.0
        res = vdc_conclusion_check(G, subsequence(list(range(n))), X.conj() @ y, tol)
    return StepResult({"double_limit": res.double_limit, "double_converged": res.double_converged,
                       "single_limit": res.single_limit, "verdict": res.verdict, "tol": tol})


@operation("image_kernel", "image/kernel projectors of random normal matrices",
           {"count": _POS, "max_dim": {"type": "integer", "minimum": 1, "maximum": 64}})
def _op_image_kernel(p, seed):
    rng = np.random.default_rng(seed)
    rows, worst, power_ok, proj_ok = [], 0.0, True, True
    for t in range(p.get("count", 200)):
        d = int(rng.integers(1, p.get("max_dim", 16) + 1))
        V = random_normal(d, rng, kernel_rank=int(rng.integers(0, d + 1)))
        dec = image_kernel_decomposition(V)
        defect = float(np.linalg.norm(dec.p_image + dec.p_kernel - np.eye(d), 2))
        worst = max(worst, defect)
        power_ok &= all(kernel_power_invariance(V, n) for n in (2, 3, 5))
        for P in (dec.p_image, dec.p_kernel):
            proj_ok &= assert_projection_from_idempotent_contraction(P)
        rows.append((t, d, dec.kernel_rank, defect))
    return StepResult({"max_identity_defect": worst, "kernel_power_invariance": bool(power_ok),
                       "projections_self_adjoint": bool(proj_ok)},
                      _table(["trial", "dim", "kernel_rank", "identity_defect"], rows))


@operation("u_split", "split C^d by the limit operators of a diagonal unitary",
           {"phases": {"type": "array", "items": _NUM, "minItems": 1},
            "schemes": {"type": "array", "items": {"type": "object"}, "minItems": 1},
            "tol": {"type": "number", "exclusiveMinimum": 0}}, ["phases", "schemes"])
def _op_u_split(p, seed):
    u = np.diag(np.exp(2j * np.pi * np.asarray(p["phases"], dtype=float)))
    schemes = [LimitScheme.from_json(s) for s in p["schemes"]]
    dec = u_split(u, schemes, p.get("tol", 1e-3))
    diag = np.real(np.diag(dec.p_kernel))
    return StepResult({"kernel_rank": dec.kernel_rank, "image_rank": dec.image_rank,
                       "kernel_diagonal": [round(float(x), 12) for x in diag]})


def random_equivalence_model(rng, count: int = 8):
    """Shift block ``S_D`` plus a random-phase diagonal block, with a zero-or-not discrete part.

    ``f`` lives on the first ``s`` shift coordinates and, half the time, on
    the diagonal block; the probes are those same coordinates.  Indices are
    spaced at least ``s`` apart inside ``[s, (D - s) / 2]``, so every lag,
    pairwise sum and pairwise difference read by the three schemes moves the
    shift part off the probes and only the diagonal block can survive.
    """
    s = 2
    m = int(rng.integers(1, 5))
    D = int(rng.integers(40, MAX_DIM - m + 1))
    u = np.zeros((D + m, D + m), dtype=np.complex128)
    u[:D, :D] = cyclic_shift(D)
    u[D:, D:] = np.diag(np.exp(2j * np.pi * rng.random(m)))
    f = np.zeros(D + m, dtype=np.complex128)
    f[:s] = rng.standard_normal(s) + 1j * rng.standard_normal(s)
    if rng.random() < 0.5:
        f[D:] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    probes = np.eye(D + m, dtype=np.complex128)[list(range(s)) + list(range(D, D + m))]
    top = (D - s) // 2
    slack = top - s - (count - 1) * (s - 1)
    v = np.sort(rng.choice(slack + 1, size=count, replace=False))
    idx = [int(s + x + i * (s - 1)) for i, x in enumerate(v)]
    return u, f, probes, idx


@operation("scheme_equivalence", "zero limits along a sequence, its sumset grid and its difference grid",
           {"models": _POS})
def _op_scheme_eq(p, seed):
    rng = np.random.default_rng(seed)
    rows, agree, outcomes = [], True, set()
    for t in range(p.get("models", 50)):
        u, f, probes, idx = random_equivalence_model(rng)
        v = scheme_zero_equivalence(u, f, idx, probes)
        agree &= len(set(v.values())) == 1
        outcomes.add(v["sequence"])
        rows.append((t, u.shape[0], len(idx), int(v["sequence"]), int(v["sumset"]), int(v["difference"])))
    return StepResult({"all_agree": bool(agree), "outcomes": sorted(outcomes)},
                      _table(["model", "dim", "indices", "sequence", "sumset", "difference"], rows))


@operation("joining_polytope", "exact joining polytope of two finite systems",
           {"x": FINITE_SCHEMA, "y": FINITE_SCHEMA, "vertices": {"type": "boolean"}}, ["x", "y"])
def _op_joining(p, seed):
    x, y = parse_finite(p["x"]), parse_finite(p["y"])
    P = fj.joining_polytope(x, y)
    out = {"dimension": P.dimension, "disjoint": P.dimension == 0, "product": fj.coupling_to_json(P.product)}
    if p.get("vertices", x.size <= fj.MAX_VERTEX_SIZE and y.size <= fj.MAX_VERTEX_SIZE):
        ext = fj.extreme_joinings(x, y)
        out["vertex_count"] = len(ext)
        out["partial"] = ext.partial
        out["vertices"] = [fj.coupling_to_json(v) for v in ext]
    w = fj.non_disjointness_witness(x, y)
    if w is not None:
        out["witness"] = fj.coupling_to_json(w)
        out["witness_is_joining"] = fj.is_joining(w, x, y)
    return StepResult(out, fj.coupling_to_csv(P.product))


@operation("finite_disjointness", "disjointness of cyclic systems and of their ergodic components",
           {"max_n": {"type": "integer", "minimum": 2, "maximum": 16}})
def _op_finite_disjoint(p, seed):
    from math import gcd

    N = p.get("max_n", 8)
    rows, mismatches = [], 0
    for m in range(2, N + 1):
        for n in range(2, N + 1):
            d = fj.is_disjoint(fj.cyclic(m), fj.cyclic(n))
            mismatches += int(d != (gcd(m, n) == 1))
            rows.append((m, n, int(d), gcd(m, n)))
    return StepResult({"pairs": len(rows), "mismatches": mismatches},
                      _table(["m", "n", "disjoint", "gcd"], rows))


@operation("alpha_weak_mixing", "alpha-weak mixing along a sequence for pairs of indicator sets",
           {"system": SYSTEM_SCHEMA, "pairs": {"type": "array", "minItems": 1,
                                               "items": {"type": "array", "items": OBSERVABLE_SCHEMA,
                                                         "minItems": 2, "maxItems": 2}},
            "sequence": SEQUENCE_SCHEMA, "alpha": {"type": "number", "minimum": 0, "maximum": 1},
            "tol": {"type": "number", "exclusiveMinimum": 0}, "quality": QUALITY_SCHEMA},
           ["system", "pairs", "sequence", "alpha"])
def _op_alpha(p, seed):
    sys_ = parse_system(p["system"])
    pairs = [(parse_observable(a), parse_observable(b)) for a, b in p["pairs"]]
    res = alpha_weak_mixing_check(sys_, pairs, parse_sequence(p["sequence"]), p["alpha"], p.get("tol", 0.05),
                                  parse_quality(p.get("quality")))
    return StepResult({"verdict": res.verdict, "pairs": list(res.pairs)})


# --------------------------------------------------------------------------
# scenarios
# --------------------------------------------------------------------------

ASSERT_OPS = {
    "<=": operator.le, "<": operator.lt, ">=": operator.ge, ">": operator.gt, "==": operator.eq, "!=": operator.ne,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["name", "steps"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["op"],
                "properties": {
                    "op": {"type": "string"},
                    "params": {"type": "object"},
                    "assert": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["path", "op", "value"],
                            "properties": {"path": {"type": "string"}, "op": {"enum": sorted(ASSERT_OPS)},
                                           "value": {}},
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def _where(err: jsonschema.ValidationError, prefix: str = "") -> str:
    return prefix + "".join(f"[{p!r}]" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path)


def validate_scenario(obj: Any) -> dict:
    """Schema-check the scenario and every step's parameters; construct referenced systems eagerly."""
    try:
        jsonschema.validate(obj, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioError(e.message, _where(e, "scenario")) from None
    for i, step in enumerate(obj["steps"]):
        loc = f"steps[{i}]"
        op = REGISTRY.get(step["op"])
        if op is None:
            raise ScenarioError(f"unknown operation {step['op']!r}", loc)
        params = step.get("params", {})
        try:
            jsonschema.validate(params, op.schema)
        except jsonschema.ValidationError as e:
            raise ScenarioError(e.message, _where(e, f"{loc}.params")) from None
        try:
            if "system" in params:
                parse_system(params["system"])
            for key in ("f", "g"):
                if key in params:
                    parse_observable(params[key])
            for key in ("x", "y"):
                if key in params:
                    parse_finite(params[key])
            for key in ("sequence",):
                if key in params:
                    parse_sequence(params[key])
        except (InputError, TypeError, ValueError) as e:
            raise ScenarioError(str(e), f"{loc}.params") from None
    return obj


def load_scenario(path_or_name: str) -> dict:
    path = Path(path_or_name)
    if not path.exists():
        builtin = builtin_path(path_or_name)
        if builtin is None:
            raise ScenarioError(f"no such scenario file or built-in name: {path_or_name}")
        text = builtin.read_text()
        where = f"<builtin {path_or_name}>"
    else:
        text = path.read_text()
        where = str(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, f"{where}:{e.lineno}:{e.colno}") from None
    return validate_scenario(obj)


def builtin_dir():
    return resources.files("ergolab") / "scenarios"


def list_builtin_scenarios() -> list[str]:
    return sorted(p.name[:-5] for p in builtin_dir().iterdir() if p.name.endswith(".json"))


def builtin_path(name: str):
    p = builtin_dir() / f"{name}.json"
    return p if p.is_file() else None


def _lookup(summary: dict, path: str):
    cur: Any = summary
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        else:
            cur = cur[part]
    return cur


def check_assertions(summary: dict, asserts: list) -> list[str]:
    failures = []
    for a in asserts:
        try:
            got = _lookup(summary, a["path"])
        except (KeyError, IndexError, ValueError, TypeError):
            failures.append(f"{a['path']}: missing from step result")
            continue
        if isinstance(got, list) and len(got) == 2 and all(isinstance(x, float) for x in got) and \
                isinstance(a["value"], (int, float)):
            got = math.hypot(*got)
        try:
            ok = ASSERT_OPS[a["op"]](got, a["value"])
        except TypeError:
            ok = False
        if not ok:
            failures.append(f"{a['path']} = {got!r}, expected {a['op']} {a['value']!r}")
    return failures


@dataclass
class RunOutcome:
    status: int
    summary: dict
    files: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def run_scenario(scenario: dict, out_dir: str | Path | None = None, seed: int | None = None) -> RunOutcome:
    """Execute a validated scenario; writes ``<name>.json`` and step CSVs into ``out_dir``."""
    seed = scenario.get("seed", 0) if seed is None else int(seed)
    steps = scenario["steps"]
    results, files, messages = [], [], []
    status = EXIT_OK
    out = Path(out_dir) if out_dir is not None else None
    if out is not None and steps:
        out.mkdir(parents=True, exist_ok=True)
    for i, step in enumerate(steps):
        op = REGISTRY[step["op"]]
        try:
            res = op.fn(step.get("params", {}), seed)
        except Exception as e:  # noqa: BLE001 - a step that raises is a failed step, not a crash
            messages.append(f"step {i} ({op.name}): {type(e).__name__}: {e}")
            results.append({"op": op.name, "error": f"{type(e).__name__}: {e}"})
            status = EXIT_ASSERT
            continue
        summary = _clean(res.summary)
        failures = check_assertions(summary, step.get("assert", []))
        entry = {"op": op.name, "result": summary, "passed": not failures}
        if failures:
            entry["failures"] = failures
            messages.extend(f"step {i} ({op.name}): {msg}" for msg in failures)
            status = EXIT_ASSERT
        if res.table is not None and out is not None:
            fname = f"{i:02d}_{op.name}.csv"
            (out / fname).write_text(res.table)
            entry["table"] = fname
            files.append(fname)
        results.append(entry)
    summary_name = f"{scenario['name']}.json"
    if out is not None and steps:
        for expected in scenario.get("outputs", []):
            if expected not in files and expected != summary_name:
                messages.append(f"declared output {expected} was not produced")
                status = EXIT_ASSERT
    doc = {"scenario": scenario["name"], "seed": seed, "status": "pass" if status == EXIT_OK else "fail",
           "steps": results}
    if out is not None and steps:
        (out / summary_name).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        files.append(summary_name)
    return RunOutcome(status, doc, files, messages)
