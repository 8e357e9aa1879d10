"""Littlewood-Paley bank, Besov norms, the second-difference norm and weight scans."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .grid import Field, Grid, fourier_multiplier, lebesgue_norm


def chi0(r) -> np.ndarray:
    """1 on [0, 1], cos^2(pi (r-1)/2) on (1, 2), 0 beyond."""
    r = np.abs(np.asarray(r, dtype=float))
    out = np.where(r <= 1.0, 1.0, 0.0)
    mid = (r > 1.0) & (r < 2.0)
    out[mid] = np.cos(0.5 * np.pi * (r[mid] - 1.0)) ** 2
    return out


def band_symbol(xi, j: int) -> np.ndarray:
    return chi0(np.ldexp(xi, -j)) - chi0(np.ldexp(xi, -j + 1))


def low_symbol(xi, j: int = 0) -> np.ndarray:
    """Symbol of P_{<=j} = chi0(2^{-j} xi); j = 0 is the low-pass Q."""
    return chi0(np.ldexp(np.asarray(xi, dtype=float), -j))


@dataclass(frozen=True)
class DyadicBank:
    grid: Grid
    j_min: int
    j_max: int
    multipliers: dict = field(repr=False)
    lowpass: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, grid: Grid) -> "DyadicBank":
        xi = np.abs(grid.frequencies)
        # bands touching a representable nonzero frequency
        j_min = int(np.floor(np.log2(grid.fundamental)))
        j_max = int(np.ceil(np.log2(xi.max())))
        # the inhomogeneous sum starts at j = 1 even when the grid is coarser than that
        mult = {j: band_symbol(grid.frequencies, j) for j in range(min(j_min, 1), j_max + 1)}
        return cls(grid, j_min, j_max, mult, low_symbol(grid.frequencies))

    def bands(self, homogeneous: bool = True) -> list[int]:
        lo = self.j_min if homogeneous else 1
        return list(range(lo, self.j_max + 1))

    def symbol(self, j) -> np.ndarray:
        if j == "lowpass":
            return self.lowpass
        if j not in self.multipliers:
            raise ValueError(f"band {j} outside [{self.j_min}, {self.j_max}]")
        return self.multipliers[j]

    def low_symbol(self, j: int) -> np.ndarray:
        return low_symbol(self.grid.frequencies, j)

    def matrix(self, symbol: np.ndarray) -> np.ndarray:
        """Dense real matrix of an even Fourier multiplier."""
        n = self.grid.n
        return np.fft.ifft(symbol[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0).real


def project(bank: DyadicBank, f: Field, j) -> Field:
    if f.grid != bank.grid:
        raise ValueError("field and bank live on different grids")
    return fourier_multiplier(f, bank.symbol(j))


@dataclass
class BesovReport:
    terms: dict
    lowpass: float | None
    partial_sums: list
    value: float


def _lp(f: Field, p: float, window: np.ndarray | None) -> float:
    if window is None:
        return lebesgue_norm(f, p)
    mod = np.abs(f.samples[window])
    if np.isinf(p):
        return float(mod.max()) if mod.size else 0.0
    return float((f.grid.spacing * np.sum(mod**p)) ** (1.0 / p))


def besov_norm(bank: DyadicBank, f: Field, s: float = 1.0, p: float = np.inf, q: float = 1.0,
               homogeneous: bool = True, window: np.ndarray | None = None) -> BesovReport:
    """Dyadic Besov norm; ``window`` restricts the L^p norms to a sample mask."""
    terms = {}
    for j in bank.bands(homogeneous):
        terms[j] = 2.0 ** (s * j) * _lp(project(bank, f, j), p, window)
    low = None if homogeneous else _lp(project(bank, f, "lowpass"), p, window)
    vals = np.array(list(terms.values()))
    if np.isinf(q):
        partial = list(np.maximum.accumulate(vals)) if vals.size else []
    else:
        partial = list(np.cumsum(vals**q) ** (1.0 / q)) if vals.size else []
    partial = [(low or 0.0) + float(x) for x in partial]
    value = partial[-1] if partial else (low or 0.0)
    return BesovReport(terms, low, partial, float(value))


def besov_b1inf1(f: Field, homogeneous: bool = True, window=None, bank: DyadicBank | None = None) -> float:
    bank = bank or DyadicBank.build(f.grid)
    return besov_norm(bank, f, 1.0, np.inf, 1.0, homogeneous, window).value


def second_difference_profile(f: Field) -> np.ndarray:
    """D[m] = max_i |f_{i+m} - 2 f_i + f_{i-m}| for m = 0..n/2."""
    v = f.samples
    n = v.size
    prof = np.zeros(n // 2 + 1)
    for m in range(1, n // 2 + 1):
        prof[m] = np.abs(np.roll(v, -m) - 2 * v + np.roll(v, m)).max()
    return prof


def second_difference_integrand(f: Field, t_grid) -> np.ndarray:
    """sup over representable |y| < t of the sup-norm of the second difference."""
    t_grid = np.asarray(t_grid, dtype=float)
    prof = np.maximum.accumulate(second_difference_profile(f))
    h = f.grid.spacing
    m = np.ceil(t_grid / h - 1e-12).astype(int) - 1  # largest m with m h < t
    return prof[np.clip(m, 0, prof.size - 1)]


def second_difference_norm(f: Field, t_grid) -> float:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("t_grid is empty")
    h, L = f.grid.spacing, f.grid.length
    if t_grid.min() <= h or t_grid.max() >= L / 2:
        raise ValueError("t_grid must lie inside (h, L/2)")
    vals = second_difference_integrand(f, t_grid) / t_grid**2
    return float(trapezoid(vals, t_grid))


def japanese_weight(grid: Grid, a: float, scale: float = 1.0) -> Field:
    """<x/scale>^a sampled on [-L/2, L/2) (implicitly periodized)."""
    return Field(grid, (1.0 + (grid.x / scale) ** 2) ** (a / 2.0))


def seam_window(grid: Grid, fraction: float = 0.25) -> np.ndarray:
    """Mask |x| <= fraction * L, away from the periodization seam at +-L/2."""
    return np.abs(grid.x) <= fraction * grid.length


@dataclass
class WeightScanRow:
    a: float
    L: float
    besov_value: float
    full_value: float
    partial_sum_tail: float
    verdict: str
    terms: dict = field(repr=False)
    partial_sums: list = field(repr=False)


def weight_scan(a_list, L_list, spacing: float = 0.125, tail_bands: int = 4,
                window_fraction: float = 0.25) -> list[WeightScanRow]:
    """Homogeneous B^1_{inf,1} behaviour of the periodized <x>^a as the domain grows.

    Verdicts use the seam-windowed norm.  'divergent-trend' means every doubling of
    L added at least 0.05 and the increments did not decay; 'convergent' means the
    top ``tail_bands`` bands carry at most 5% and doubling increments decay.
    """
    L_list = list(L_list)
    if any(b <= a for a, b in zip(L_list, L_list[1:])):
        raise ValueError("L_list must be increasing")
    rows = []
    for a in a_list:
        if not 0 <= a <= 1:
            raise ValueError("weight exponents must lie in [0, 1]")
        group = []
        for L in L_list:
            n = int(round(L / spacing))
            grid = Grid(1 << max(1, int(np.round(np.log2(n)))), float(L))
            bank = DyadicBank.build(grid)
            w = japanese_weight(grid, a)
            rep = besov_norm(bank, w, homogeneous=True, window=seam_window(grid, window_fraction))
            full = besov_norm(bank, w, homogeneous=True).value
            ps = rep.partial_sums
            tail = (ps[-1] - ps[-1 - tail_bands]) / ps[-1] if ps[-1] > 0 else 0.0
            group.append(WeightScanRow(a, float(L), rep.value, full, float(tail), "", rep.terms, ps))
        verdict = _verdict(group)
        for row in group:
            row.verdict = verdict
        rows.extend(group)
    return rows


def _verdict(group: list[WeightScanRow]) -> str:
    vals = np.array([r.besov_value for r in group])
    tail_ok = all(r.partial_sum_tail <= 0.05 for r in group)
    if vals[-1] == 0:
        return "convergent"
    if vals.size >= 3:
        inc = np.diff(vals)
        if inc.min() >= 0.05 and inc[-1] >= 0.9 * inc[0]:
            return "divergent-trend"
        if tail_ok and inc[-1] < 0.9 * inc[0]:
            return "convergent"
        return "inconclusive"
    return "convergent" if tail_ok else "inconclusive"


def doubling_increments(rows: list[WeightScanRow]) -> list[float]:
    vals = [r.besov_value for r in rows]
    return [b - a for a, b in zip(vals, vals[1:])]
