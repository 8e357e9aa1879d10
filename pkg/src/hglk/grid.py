"""Uniform periodic 1-D grids, discrete norms and Fourier multipliers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError


@dataclass(frozen=True)
class Grid:
    """Periodic lattice x_i = -L/2 + i*h on [-L/2, L/2), n a power of two."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 2, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    h = spacing

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.spacing * np.arange(self.n)

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies 2*pi*k/L in FFT order (k = 0..n/2-1, -n/2..-1)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @property
    def fundamental(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing

    def field(self, values) -> "Field":
        if callable(values):
            values = values(self.x)
        return Field(self, np.asarray(values))

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.n * factor, self.length)


@dataclass(frozen=True)
class Field:
    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {samples.shape}")
        object.__setattr__(self, "samples", samples)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)

    def with_samples(self, samples) -> "Field":
        return Field(self.grid, samples)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)


def same_grid(*fields: Field) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


def inner_product(f: Field, g: Field) -> complex:
    """h * sum f_i conj(g_i); linear in the first slot."""
    grid = same_grid(f, g)
    return complex(grid.spacing * np.vdot(g.samples, f.samples))


def lebesgue_norm(f: Field, p: float = 2.0) -> float:
    if p < 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {p}")
    mod = np.abs(f.samples)
    if np.isinf(p):
        return float(mod.max())
    return float((f.grid.spacing * np.sum(mod**p)) ** (1.0 / p))


def _is_even(values: np.ndarray) -> bool:
    # Nyquist (index n/2) is its own partner in FFT order
    return np.array_equal(values[1:], values[1:][::-1])


def fourier_multiplier(f: Field, m: Callable[[np.ndarray], np.ndarray] | np.ndarray) -> Field:
    """Apply the symbol m(xi) through the DFT.

    Real input with a real, even symbol returns a real field.
    """
    xi = f.grid.frequencies
    mvals = np.asarray(m(xi) if callable(m) else m)
    if mvals.shape == ():
        mvals = np.full(xi.shape, mvals)
    out = np.fft.ifft(mvals * np.fft.fft(f.samples))
    if f.is_real and np.isrealobj(mvals) and _is_even(mvals):
        out = out.real
    return f.with_samples(out)


def power_symbol(s: float, homogeneous: bool = True) -> Callable[[np.ndarray], np.ndarray]:
    """|xi|^s (with 0^s := 0) or (1+|xi|^2)^{s/2}."""
    if homogeneous:
        def symbol(xi):
            a = np.abs(xi)
            out = np.zeros_like(a)
            nz = a > 0
            out[nz] = a[nz] ** s
            return out
    else:
        def symbol(xi):
            return (1.0 + xi**2) ** (s / 2.0)
    return symbol


def frac_laplacian(f: Field, s: float) -> Field:
    """(-Delta)^{s/2} f as the Fourier multiplier |xi|^s."""
    return fourier_multiplier(f, power_symbol(s))


def sobolev_norm(f: Field, s: float, homogeneous: bool = False) -> float:
    if s == 0:
        return lebesgue_norm(f, 2)
    return lebesgue_norm(fourier_multiplier(f, power_symbol(s, homogeneous)), 2)


def fourier_coefficients_norm(f: Field) -> float:
    """L2 norm computed on the frequency side (Parseval): sqrt(L/n^2 * sum |F_k|^2)."""
    grid = f.grid
    fk = np.fft.fft(f.samples)
    return float(np.sqrt(grid.length * np.sum(np.abs(fk) ** 2)) / grid.n)


def centered_difference(f: Field) -> Field:
    h = f.grid.spacing
    return f.with_samples((np.roll(f.samples, -1) - np.roll(f.samples, 1)) / (2 * h))


def lipschitz_seminorm(values: np.ndarray, h: float) -> float:
    """max_i |v_{i+1} - v_i| / h, periodic."""
    return float(np.max(np.abs(np.roll(values, -1) - values)) / h)


def random_bandlimited(grid: Grid, rng: np.random.Generator, max_mode: int | None = None,
                       complex_valued: bool = False) -> Field:
    """Random field with modes |k| <= max_mode (default: top octave removed).

    The coefficients depend only on ``max_mode`` and the generator state, so the
    same seed yields the same continuum function on every grid that resolves it.
    """
    if max_mode is None:
        max_mode = grid.n // 4
    k = np.arange(1, max_mode + 1)
    decay = 1.0 / (1.0 + k) ** 1.5
    x = grid.x
    phase = 2 * np.pi * np.outer(x + grid.length / 2, k) / grid.length
    re = rng.standard_normal((2, max_mode)) * decay
    vals = rng.standard_normal() * 0.5 + np.cos(phase) @ re[0] + np.sin(phase) @ re[1]
    if complex_valued:
        im = rng.standard_normal((2, max_mode)) * decay
        vals = vals + 1j * (np.cos(phase) @ im[0] + np.sin(phase) @ im[1])
    return Field(grid, vals)
