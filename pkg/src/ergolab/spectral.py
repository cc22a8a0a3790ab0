"""Spectral measures from correlation sequences.

A positive-definite sequence ``c(n) = int exp(2 pi i n t) dsigma(t)`` is
turned into a density on an ``M``-point grid of [0, 1) by Fejer summation,
which keeps the estimate nonnegative.  Atoms are read off the grid with a
peak heuristic; Wiener's lemma gives the sum of squared atom masses
directly from the coefficients.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationSequence
from .exceptions import InputError


@dataclass(frozen=True)
class SpectralEstimate:
    grid: np.ndarray
    density: np.ndarray
    atoms: tuple
    total_mass: float
    raw_density: np.ndarray
    L: int

    @property
    def M(self) -> int:
        return self.grid.size

    def continuous_mass(self) -> float:
        return float(self.density.sum() / self.M)

    def atom_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "density"])
        for t, d in zip(self.grid, self.raw_density):
            w.writerow([repr(float(t)), repr(float(d))])
        return buf.getvalue()

    def atoms_json(self) -> str:
        return json.dumps([{"location": float(t), "mass": float(m)} for t, m in self.atoms])


def fejer_density(c: CorrelationSequence, M: int | None = None, L: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Grid and Fejer-smoothed density ``sum_{|n|<=L} (1 - |n|/(L+1)) c(n) e(-n theta)``."""
    if not c.same_observable:
        raise InputError("Fejer estimates need a positive-definite (f = g) sequence")
    Lmax = c.symmetric_range()
    if Lmax < 0:
        raise InputError("sequence lacks lag 0")
    L = Lmax if L is None else int(L)
    if L > Lmax:
        raise InputError(f"sequence covers lags -{Lmax}..{Lmax}, not -{L}..{L}")
    M = max(4 * L, 4) if M is None else int(M)
    if M < 4 * L or M < 2 * L + 1:
        raise InputError(f"grid size M={M} must be >= 4L = {4 * L}")
    n = np.arange(-L, L + 1)
    w = 1.0 - np.abs(n) / (L + 1.0)
    coeff = np.zeros(M, dtype=np.complex128)
    # e(-n j / M) summed via FFT with lags folded modulo M
    np.add.at(coeff, np.mod(n, M), w * c.array(n))
    dens = np.fft.fft(coeff).real
    grid = np.arange(M) / M
    return grid, dens


def fejer_estimate(c: CorrelationSequence, M: int | None = None, L: int | None = None,
                   atom_factor: float = 5.0, atom_floor: float = 0.05) -> SpectralEstimate:
    """Fejer estimate with atoms split off.

    A grid peak counts as an atom when it exceeds ``atom_factor`` times the
    median density and its height, divided by the Fejer peak ``L + 1``, is at
    least ``atom_floor``.  The atom's mass is the excess over the median within
    ``+-2/L`` of the peak; that excess is removed from ``density`` so that
    ``density.sum()/M + atom masses == total_mass``.  ``raw_density`` keeps
    the untouched Fejer estimate.
    """
    grid, raw = fejer_density(c, M, L)
    L = c.symmetric_range() if L is None else int(L)
    M = grid.size
    dens = raw.copy()
    med = float(np.median(raw))
    half = max(1, int(np.ceil(2.0 * M / max(L, 1))))
    claimed = np.zeros(M, dtype=bool)
    atoms = []
    for j in np.argsort(raw)[::-1]:
        peak = raw[j]
        if peak <= atom_factor * max(med, 0.0) or peak / (L + 1) < atom_floor:
            break
        if claimed[j]:
            continue
        # unique: on coarse grids the window can wrap onto itself
        idx = np.unique(np.mod(np.arange(j - half, j + half + 1), M))
        excess = np.clip(dens[idx] - max(med, 0.0), 0.0, None)
        mass = float(excess.sum() / M)
        dens[idx] -= excess
        claimed[idx] = True
        atoms.append((float(grid[j]), mass))
    total = float(np.real(c[0]))
    return SpectralEstimate(grid=grid, density=dens, atoms=tuple(atoms), total_mass=total, raw_density=raw, L=L)


def wiener_atom_mass(c: CorrelationSequence, N: int) -> float:
    """``(1/N) sum_{n=1..N} |c(n)|^2``, which tends to the sum of squared atom masses."""
    if N < 1:
        raise InputError("N must be positive")
    vals = c.array(range(1, N + 1))
    return float(np.mean(np.abs(vals) ** 2))


def convolve_coefficients(c1: CorrelationSequence, c2: CorrelationSequence) -> CorrelationSequence:
    """Coefficients of ``sigma_1 * sigma_2``: the termwise product ``c1(n) c2(n)``."""
    if set(c1.values) != set(c2.values):
        raise InputError("convolution needs both sequences on the same lag range")
    vals = {n: c1.values[n] * c2.values[n] for n in c1.values}
    return CorrelationSequence(vals, centered=False, same_observable=c1.same_observable and c2.same_observable,
                               label=f"({c1.label})*({c2.label})")


def rajchman_report(c: CorrelationSequence, thresholds: Sequence[float]) -> dict[float, int | None]:
    """For each eps, the least N with ``sup_{N<=n<=L} |c(n)| <= eps`` (``None`` if never)."""
    lags = [n for n in c.lags if n >= 0]
    if not lags:
        raise InputError("no nonnegative lags")
    L = lags[-1]
    c.require(range(L + 1))
    mags = np.abs(c.array(range(L + 1)))
    # suffix maxima: tail[N] = max_{n >= N} |c(n)|
    tail = np.maximum.accumulate(mags[::-1])[::-1]
    out = {}
    for eps in thresholds:
        ok = np.nonzero(tail <= eps)[0]
        out[float(eps)] = int(ok[0]) if ok.size else None
    return out
