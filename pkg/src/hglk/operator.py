"""Flux-form assembly of -d/dx(a d/dx) + v and checks of the standing hypotheses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionError, GridMismatchError
from .grid import (Field, Grid, fourier_multiplier, lebesgue_norm, lipschitz_seminorm,
                   power_symbol, random_bandlimited, sobolev_norm)


@dataclass(frozen=True)
class CoefficientField:
    a: Field
    c1: float
    c2: float
    lip: float

    @classmethod
    def from_field(cls, a: Field) -> "CoefficientField":
        vals = np.asarray(a.samples, dtype=float)
        return cls(a.with_samples(vals), float(vals.min()), float(vals.max()),
                   lipschitz_seminorm(vals, a.grid.spacing))

    @property
    def grid(self) -> Grid:
        return self.a.grid


def weak_lorentz_norm(values: np.ndarray, h: float, q: float) -> float:
    """sup_t t * (h #{|v| > t})^{1/q}, attained as t approaches a sample magnitude from below."""
    if q <= 0:
        raise ValueError("Lorentz exponent must be positive")
    mags = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
    if mags.size == 0 or mags[0] == 0:
        return 0.0
    counts = np.arange(1, mags.size + 1)
    return float(np.max(mags * (h * counts) ** (1.0 / q)))


@dataclass(frozen=True)
class PotentialField:
    """V = weak + bounded with the weak part measured in L^{q,inf}."""

    v: Field
    q: float
    theta: float
    lorentz_norm: float
    bounded: Field | None = None
    bounded_norm: float = 0.0

    @classmethod
    def from_parts(cls, weak: Field, q: float = 4.0, theta: float = 0.5,
                   bounded: Field | None = None) -> "PotentialField":
        if not q > 0:
            raise ValueError("q must be positive")
        if not 0 < theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        weak_vals = np.asarray(weak.samples, dtype=float)
        total = weak_vals.copy()
        bnorm = 0.0
        if bounded is not None:
            if bounded.grid != weak.grid:
                raise GridMismatchError("potential parts sampled on different grids")
            bvals = np.asarray(bounded.samples, dtype=float)
            total = total + bvals
            bnorm = float(np.abs(bvals).max())
            bounded = bounded.with_samples(bvals)
        return cls(weak.with_samples(total), q, theta,
                   weak_lorentz_norm(weak_vals, weak.grid.spacing, q), bounded, bnorm)

    @property
    def weak(self) -> np.ndarray:
        if self.bounded is None:
            return self.v.samples
        return self.v.samples - self.bounded.samples


def lorentz_quasinorm(pot: PotentialField) -> float:
    return weak_lorentz_norm(pot.weak, pot.v.grid.spacing, pot.q)


def kinetic_matrix(a: np.ndarray, h: float) -> np.ndarray:
    """Matrix of -(1/h^2) [a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})], periodic."""
    a = np.asarray(a, dtype=float)
    n = a.size
    bond = 0.5 * (a + np.roll(a, -1))  # bond[i] = a_{i+1/2}
    idx = np.arange(n)
    right = (idx + 1) % n
    mat = np.zeros((n, n))
    mat[idx, idx] = (bond + np.roll(bond, 1)) / h**2
    mat[idx, right] -= bond / h**2
    mat[right, idx] -= bond / h**2
    return mat


@dataclass(frozen=True)
class EllipticOperator:
    grid: Grid
    matrix: np.ndarray = field(repr=False)
    coeff: CoefficientField
    pot: PotentialField

    @property
    def kinetic(self) -> np.ndarray:
        return kinetic_matrix(self.coeff.a.samples, self.grid.spacing)

    def apply(self, f: Field) -> Field:
        if f.grid != self.grid:
            raise GridMismatchError("field and operator live on different grids")
        return f.with_samples(self.matrix @ f.samples)


def assemble(coeff: CoefficientField, pot: PotentialField, grid: Grid | None = None,
             *, check: bool = True) -> EllipticOperator:
    grid = grid or coeff.grid
    if coeff.grid != grid or pot.v.grid != grid:
        raise GridMismatchError("coefficient, potential and grid disagree")
    if check and not check_ellipticity(coeff).passed:
        raise AssumptionError(f"metric is not uniformly elliptic: min(a) = {coeff.c1:g}")
    mat = kinetic_matrix(coeff.a.samples, grid.spacing)
    mat[np.diag_indices(grid.n)] += np.asarray(pot.v.samples, dtype=float)
    return EllipticOperator(grid, mat, coeff, pot)


@dataclass(frozen=True)
class EllipticityReport:
    c1: float
    c2: float
    passed: bool


def check_ellipticity(coeff: CoefficientField) -> EllipticityReport:
    vals = np.asarray(coeff.a.samples, dtype=float)
    c1, c2 = float(vals.min()), float(vals.max())
    return EllipticityReport(c1, c2, c1 > 0)


@dataclass(frozen=True)
class A3Report:
    max_ratio: float
    trials: int
    skipped: int


def check_a3(coeff: CoefficientField, trials: int = 20, seed: int = 0) -> A3Report:
    """Largest sampled ratio ||((-Delta)^{1/4} a) f|| / ||(-Delta)^{1/4} f|| over mean-zero f."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    grid = coeff.grid
    half = power_symbol(0.5)
    da = fourier_multiplier(coeff.a, half).samples
    best, skipped = 0.0, 0
    for _ in range(trials):
        f = random_bandlimited(grid, rng)
        f = f.with_samples(f.samples - f.samples.mean())
        den = lebesgue_norm(fourier_multiplier(f, half), 2)
        if den <= 1e-14 * max(1.0, lebesgue_norm(f, 2)):
            skipped += 1
            continue
        best = max(best, lebesgue_norm(f.with_samples(da * f.samples), 2) / den)
    if skipped == trials:
        raise ValueError("every trial field was degenerate")
    return A3Report(best, trials, skipped)


@dataclass(frozen=True)
class FormPositivityReport:
    theta: float
    min_eigenvalue: float
    passed: bool


def check_form_positivity(op: EllipticOperator, theta: float | None = None) -> FormPositivityReport:
    theta = op.pot.theta if theta is None else theta
    form = theta * op.kinetic
    form[np.diag_indices(op.grid.n)] += np.asarray(op.pot.v.samples, dtype=float)
    eigs = np.linalg.eigvalsh(form)
    scale = max(np.abs(eigs).max(), 1e-300)
    lo = float(eigs[0])
    return FormPositivityReport(theta, lo, lo >= -1e-10 * scale)


@dataclass(frozen=True)
class SobolevEquivalenceReport:
    ratio_min: float
    ratio_max: float
    form_ratio_min: float
    form_ratio_max: float


def sobolev_equivalence_report(op: EllipticOperator, trials: int = 50, seed: int = 0,
                               max_mode: int | None = None) -> SobolevEquivalenceReport:
    """Sampled constants in ||Hf|| + ||f|| ~ ||f||_{H^2} and <Hf,f> + ||f||^2 ~ ||f||_{H^1}^2."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    r2, r1 = [], []
    for _ in range(trials):
        f = random_bandlimited(op.grid, rng, max_mode=max_mode)
        l2 = lebesgue_norm(f, 2)
        hf = op.apply(f)
        r2.append((lebesgue_norm(hf, 2) + l2) / sobolev_norm(f, 2.0))
        form = op.grid.spacing * float(np.real(np.vdot(f.samples, hf.samples)))
        r1.append((form + l2**2) / sobolev_norm(f, 1.0) ** 2)
    return SobolevEquivalenceReport(min(r2), max(r2), min(r1), max(r1))


def leibniz_commutator_terms(a: np.ndarray, f: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Discrete (grad f).A grad and div A (grad f .) as matrices.

    With the flux-form kinetic part K, [K, diag(f)] = -(first + second) holds exactly.
    """
    a = np.asarray(a, dtype=float)
    f = np.asarray(f, dtype=float)
    n = a.size
    eye = np.eye(n)
    grad = np.roll(eye, -1, axis=0) - eye  # (G u)_i = u_{i+1} - u_i
    avg = 0.5 * (np.roll(eye, -1, axis=0) + eye)  # bond average of nodal values
    bond = 0.5 * (a + np.roll(a, -1))
    df = grad @ f
    weight = bond * df / h**2
    node_avg = 0.5 * (eye + np.roll(eye, 1, axis=0))  # (z_{i-1} + z_i) / 2
    first = node_avg @ (weight[:, None] * grad)
    second = -grad.T @ (weight[:, None] * avg)
    return first, second


# Built-in coefficient and potential families.

def coefficient_family(grid: Grid, family: str = "constant", **params) -> CoefficientField:
    x = grid.x
    L = grid.length
    if family == "constant":
        vals = np.full(grid.n, float(params.get("value", 1.0)))
    elif family == "sinusoidal":
        mean = float(params.get("mean", 1.0))
        amp = float(params.get("amplitude", 0.5))
        mode = int(params.get("mode", 1))
        vals = mean + amp * np.sin(2 * np.pi * mode * x / L)
    elif family == "lipschitz":
        # piecewise-linear through seeded knot values; knots fixed in physical space
        rng = np.random.default_rng(params.get("seed", 0))
        knots = int(params.get("knots", 8))
        lo, hi = float(params.get("low", 0.5)), float(params.get("high", 1.5))
        kv = rng.uniform(lo, hi, knots)
        pos = (x + L / 2) / L * knots
        vals = np.interp(pos, np.arange(knots + 1), np.append(kv, kv[0]))
    else:
        raise ValueError(f"unknown coefficient family {family!r}")
    return CoefficientField.from_field(Field(grid, vals))


def potential_samples(grid: Grid, family: str = "zero", **params) -> np.ndarray:
    x = grid.x
    L = grid.length
    if family == "zero":
        return np.zeros(grid.n)
    if family == "constant":
        return np.full(grid.n, float(params.get("value", 1.0)))
    if family == "well":
        depth = float(params.get("depth", 1.0))
        width = float(params.get("width", L / 8))
        return np.where(np.abs(x) < width / 2, depth, 0.0)
    if family == "singular":
        # strength * |x|^{-1/q}, capped at the grid scale (or a fixed cutoff)
        q = float(params.get("q", 4.0))
        strength = float(params.get("strength", 1.0))
        cutoff = params.get("cutoff")
        cutoff = grid.spacing / 2 if cutoff is None else float(cutoff)
        r = np.maximum(np.abs(x), cutoff)
        return strength * r ** (-1.0 / q)
    if family == "noise":
        # seeded piecewise-constant noise on a fixed number of physical cells
        rng = np.random.default_rng(params.get("seed", 0))
        cells = int(params.get("cells", 16))
        amp = float(params.get("amplitude", 0.1))
        offset = float(params.get("offset", 0.0))
        vals = rng.uniform(-amp, amp, cells)
        idx = np.minimum(((x + L / 2) / L * cells).astype(int), cells - 1)
        return offset + vals[idx]
    raise ValueError(f"unknown potential family {family!r}")


def potential_family(grid: Grid, weak: dict | None = None, bounded: dict | None = None,
                     q: float = 4.0, theta: float = 0.5) -> PotentialField:
    weak = dict(weak or {"family": "zero"})
    wf = Field(grid, potential_samples(grid, **weak))
    bf = None
    if bounded is not None:
        bf = Field(grid, potential_samples(grid, **dict(bounded)))
    return PotentialField.from_parts(wf, q=q, theta=theta, bounded=bf)


def zero_potential(grid: Grid, q: float = 4.0, theta: float = 0.5) -> PotentialField:
    return PotentialField.from_parts(Field(grid, np.zeros(grid.n)), q=q, theta=theta)


def laplacian(grid: Grid) -> EllipticOperator:
    """The a = 1, v = 0 assembly (discrete -Delta)."""
    return assemble(coefficient_family(grid, "constant"), zero_potential(grid), grid)
