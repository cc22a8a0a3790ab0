"""Finite-dimensional normal operators, image/kernel splittings and limit operators.

Matrices are plain complex ``numpy`` arrays; every public function validates
its input through :func:`as_complex_matrix`.  Norms are Frobenius norms unless
stated otherwise.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .exceptions import InputError, PreconditionError

#: Design envelope for dense linear algebra.
MAX_DIM = 64

#: Relative singular-value threshold used when no tolerance is supplied.
DEFAULT_RELATIVE_TOL = 1e-10


def as_complex_matrix(m, name="matrix"):
    """Return ``m`` as a square, finite ``complex128`` array or raise InputError."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise InputError(f"{name} has dimension {a.shape[0]} > {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    return a


def matrix_to_json(m) -> dict:
    """Serialize to ``{"dim": d, "entries": [[re, im], ...]}`` in row-major order."""
    a = as_complex_matrix(m)
    flat = a.ravel()
    return {"dim": int(a.shape[0]), "entries": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix object: {exc}") from exc
    if dim < 1 or len(entries) != dim * dim:
        raise InputError(f"matrix object declares dim={dim} but has {len(entries)} entries")
    try:
        vals = np.array([complex(float(re), float(im)) for re, im in entries])
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix entry: {exc}") from exc
    return as_complex_matrix(vals.reshape(dim, dim))


def commutator_norm(m) -> float:
    """Frobenius norm of ``m m* - m* m``."""
    a = as_complex_matrix(m)
    ah = a.conj().T
    return float(np.linalg.norm(a @ ah - ah @ a))


def check_normal(m, tol: float = 1e-12) -> bool:
    if tol < 0:
        raise InputError("tol must be non-negative")
    return commutator_norm(m) <= tol


def default_tol(m) -> float:
    """``1e-10`` times the largest singular value (absolute floor 1e-300)."""
    a = as_complex_matrix(m)
    smax = np.linalg.norm(a, 2)
    return max(DEFAULT_RELATIVE_TOL * smax, 1e-300)


def numerical_rank(m, tol: float) -> int:
    s = np.linalg.svd(as_complex_matrix(m), compute_uv=False)
    return int(np.sum(s > tol))


@dataclass(frozen=True)
class OrthogonalDecomposition:
    """Complementary orthogonal projectors onto ``closure(Im V)`` and ``Ker V``."""

    p_image: np.ndarray
    p_kernel: np.ndarray
    tolerance: float

    @property
    def dim(self) -> int:
        return self.p_image.shape[0]

    def defects(self) -> dict:
        """Norms of every invariant violation; all should be ``<= tolerance``."""
        eye = np.eye(self.dim)
        out = {"sum_to_identity": float(np.linalg.norm(self.p_image + self.p_kernel - eye))}
        for label, p in (("image", self.p_image), ("kernel", self.p_kernel)):
            out[f"{label}_idempotent"] = float(np.linalg.norm(p @ p - p))
            out[f"{label}_selfadjoint"] = float(np.linalg.norm(p - p.conj().T))
        out["orthogonal"] = float(np.linalg.norm(self.p_image @ self.p_kernel))
        return out

    def is_valid(self) -> bool:
        return all(v <= self.tolerance for v in self.defects().values())

    @property
    def kernel_rank(self) -> int:
        return round(float(np.trace(self.p_kernel).real))

    @property
    def image_rank(self) -> int:
        return self.dim - self.kernel_rank


def _kernel_projector(a: np.ndarray, tol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(a)
    null = vh[s <= tol].conj().T
    return null @ null.conj().T


def image_kernel_decomposition(v, tol: float | None = None) -> OrthogonalDecomposition:
    """Split ``C^d`` as ``closure(Im v) (+) Ker v`` for a normal matrix ``v``.

    Singular values ``<= tol`` count as zero; ``tol`` defaults to
    :func:`default_tol`.  Raises :class:`PreconditionError` (with the commutator
    norm in ``details``) when ``v`` is not normal within ``tol``.
    """
    a = as_complex_matrix(v, "v")
    if tol is None:
        tol = default_tol(a)
    if tol < 0:
        raise InputError("tol must be non-negative")
    # commutator of a rounding-level normal matrix scales with |v|^2
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    comm = commutator_norm(a)
    if comm > max(tol, 1e-12) * scale:
        raise PreconditionError(
            f"matrix is not normal: commutator norm {comm:.3e} exceeds {tol:.3e}",
            commutator_norm=comm,
            tol=tol,
        )
    p_ker = _kernel_projector(a, tol)
    # Hermitian part removes rounding asymmetry
    p_ker = 0.5 * (p_ker + p_ker.conj().T)
    p_im = np.eye(a.shape[0]) - p_ker
    return OrthogonalDecomposition(p_image=p_im, p_kernel=p_ker, tolerance=max(tol, 1e-12) * a.shape[0])


def kernel_power_invariance(v, n: int, tol: float | None = None) -> bool:
    """Whether ``rank(v) == rank(v**n)``, i.e. ``Ker v == Ker v**n``.

    For normal input this always holds; a ``False`` answer on a non-normal
    matrix (a Jordan block, say) is the expected failure mode, not an error.
    The threshold for ``v**n`` is ``tol * max(1, |v|)**(n - 1)`` so that
    rounding noise on zero eigenvalues is not amplified into a rank change.
    """
    a = as_complex_matrix(v, "v")
    if int(n) != n or n < 1:
        raise InputError("n must be a positive integer; v**0 is the identity")
    n = int(n)
    if tol is None:
        tol = default_tol(a)
    growth = max(1.0, float(np.linalg.norm(a, 2))) ** (n - 1)
    an = np.linalg.matrix_power(a, n)
    return numerical_rank(a, tol) == numerical_rank(an, tol * growth)


def assert_projection_from_idempotent_contraction(v, tol: float = 1e-10, c: float | None = None) -> bool:
    """Check that an idempotent contraction is self-adjoint.

    Hypotheses (``|v|_op <= 1 + tol`` and ``|v^2 - v| <= tol``) are verified
    first; a :class:`PreconditionError` names whichever failed.  Returns
    ``|v* - v| <= c * tol`` with ``c`` defaulting to ``10 * dim``.

    The linear slack is exact only for true idempotents of norm exactly 1.
    Perturbations of size ``eps`` off the diagonal blocks leave ``v``
    idempotent with ``|v|_op - 1 ~ eps**2 / 2`` while ``|v* - v| ~ eps``, so
    for such inputs the result is ``False`` (see :func:`self_adjoint_defect_bound`).
    """
    a = as_complex_matrix(v, "v")
    if tol < 0:
        raise InputError("tol must be non-negative")
    dim = a.shape[0]
    if c is None:
        c = 10.0 * dim
    opnorm = float(np.linalg.norm(a, 2))
    idem = float(np.linalg.norm(a @ a - a))
    failed = []
    if opnorm > 1.0 + tol:
        failed.append(f"operator norm {opnorm:.6g} > 1 + tol")
    if idem > tol:
        failed.append(f"|V^2 - V| = {idem:.3e} > tol")
    if failed:
        raise PreconditionError("; ".join(failed), operator_norm=opnorm, idempotence_defect=idem)
    return float(np.linalg.norm(a.conj().T - a)) <= c * tol


def self_adjoint_defect_bound(opnorm_excess: float, idempotence_defect: float, dim: int) -> float:
    """Upper bound on ``|v* - v|`` for a near-idempotent near-contraction.

    Square-root behaviour in the norm excess is sharp: ``[[1, e], [0, 0]]`` is
    idempotent with ``|v|_op - 1 ~ e**2/2`` and ``|v* - v|_F = sqrt(2) e``.
    """
    excess = max(opnorm_excess, 0.0)
    return 2.0 * np.sqrt(dim) * (np.sqrt(2.0 * excess + excess**2) + 3.0 * idempotence_defect)


def is_unitary(u, tol: float = 1e-9) -> bool:
    a = as_complex_matrix(u)
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0]))) <= tol


@dataclass(frozen=True)
class _UnitaryPowers:
    """Diagonalization ``u = Z diag(exp(2 pi i theta)) Z*`` reused across powers."""

    z: np.ndarray
    phases: np.ndarray  # eigen-angles in turns, [0, 1)

    @classmethod
    def of(cls, u: np.ndarray) -> _UnitaryPowers:
        t, z = linalg.schur(u, output="complex")
        lam = np.diag(t)
        phases = np.mod(np.angle(lam) / (2 * np.pi), 1.0)
        return cls(z=z, phases=phases)

    def power(self, n: int) -> np.ndarray:
        if abs(n) > 2**52:
            raise InputError(f"exponent {n} too large for double-precision phases")
        frac = np.mod(self.phases * float(n), 1.0)
        return (self.z * np.exp(2j * np.pi * frac)) @ self.z.conj().T


def unitary_power(u, n: int) -> np.ndarray:
    """``u**n`` for unitary ``u`` and any integer ``n`` (negative allowed)."""
    a = as_complex_matrix(u, "u")
    return _UnitaryPowers.of(a).power(int(n))


@dataclass(frozen=True)
class LimitOperatorReport:
    limit: np.ndarray
    converged: bool
    residual: float
    tol: float
    window: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "limit": matrix_to_json(self.limit),
            "converged": self.converged,
            "residual": self.residual,
            "tol": self.tol,
            "window": [int(n) for n in self.window],
        }


def _window(indices: Sequence[int]) -> list[int]:
    k = max(2, len(indices) // 4)
    return list(indices[-k:])


def _check_indices(indices) -> list[int]:
    idx = [int(n) for n in indices]
    if len(idx) < 8:
        raise InputError(f"need at least 8 indices, got {len(idx)}")
    if any(b <= a for a, b in itertools.pairwise(idx)):
        raise InputError("indices must be strictly increasing")
    return idx


def _report_from_iterates(mats: list[np.ndarray], window, tol: float) -> LimitOperatorReport:
    limit = mats[-1]
    steps = [float(np.linalg.norm(b - a)) for a, b in itertools.pairwise(mats)]
    residual = max(float(np.linalg.norm(m - limit)) for m in mats)
    converged = max(steps, default=0.0) <= tol and residual <= tol
    return LimitOperatorReport(limit=limit, converged=converged, residual=residual, tol=tol, window=tuple(window))


def sequence_limit_operator(u, indices, tol: float = 1e-8) -> LimitOperatorReport:
    """Limit of ``u**n_k`` detected over the final quarter of ``indices``.

    Divergence is an outcome, not an error: ``converged`` is ``False`` and
    ``residual`` records how far the window iterates stray from the last one.
    """
    a = as_complex_matrix(u, "u")
    if not is_unitary(a, max(tol, 1e-9)):
        raise InputError("u is not unitary within tolerance")
    idx = _check_indices(indices)
    win = _window(idx)
    powers = _UnitaryPowers.of(a)
    return _report_from_iterates([powers.power(n) for n in win], win, tol)


def adjoint_duality_check(u, indices, tol: float = 1e-8) -> bool:
    """Limit along ``(-n_k)`` equals the adjoint of the limit along ``(n_k)``.

    ``u**(-n)`` is evaluated as ``(u*)**n``.  Only meaningful when the forward
    limit converges; returns ``False`` otherwise.
    """
    a = as_complex_matrix(u, "u")
    fwd = sequence_limit_operator(a, indices, tol)
    back = sequence_limit_operator(a.conj().T, indices, tol)
    if not (fwd.converged and back.converged):
        return False
    return float(np.linalg.norm(back.limit - fwd.limit.conj().T)) <= 10 * tol


def cesaro_limit_operator(u, windows, tol: float = 1e-3) -> LimitOperatorReport:
    """Cesaro averages ``(1/N) sum_{n<N} u**n`` over increasing window lengths.

    Converges to the orthogonal projection onto the fixed vectors of ``u``
    at rate ``O(1/N)``; unlike subsequence limits of a unitary it can have a
    non-trivial kernel.
    """
    a = as_complex_matrix(u, "u")
    if not is_unitary(a, 1e-9):
        raise InputError("u is not unitary within tolerance")
    ns = [int(n) for n in windows]
    if len(ns) < 2 or any(n < 1 for n in ns) or any(b <= a_ for a_, b in itertools.pairwise(ns)):
        raise InputError("windows must be at least two strictly increasing positive lengths")
    powers = _UnitaryPowers.of(a)
    mats = []
    for n in ns:
        # geometric sum of each eigenvalue, closed form away from 1
        lam = np.exp(2j * np.pi * powers.phases)
        near_one = np.abs(lam - 1.0) < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            avg = np.where(near_one, 1.0, (1.0 - lam**n) / (n * (1.0 - lam)))
        mats.append((powers.z * avg) @ powers.z.conj().T)
    win = ns[-max(2, len(ns) // 4):]
    return _report_from_iterates(mats[-len(win):], win, tol)


def random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_normal(dim: int, rng, kernel_rank: int = 0, scale: float = 1.0) -> np.ndarray:
    """Unitary conjugate of a random complex diagonal with ``kernel_rank`` zeros."""
    rng = np.random.default_rng(rng)
    lam = scale * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    # keep nonzero eigenvalues well separated from the kernel threshold
    lam = np.where(np.abs(lam) < 0.1 * scale, 0.1 * scale * np.exp(1j * np.angle(lam)), lam)
    lam[:kernel_rank] = 0.0
    q = random_unitary(dim, rng)
    return (q * lam) @ q.conj().T
