"""Spectral calculus of the assembled operator and its resolvent-integral twin.

Fractional powers are computed two independent ways: through the eigenbasis,
and through the resolvent integral

    H^{s/2} = C0(s) * int_0^inf lam^{s/2-1} H (lam + H)^{-1} dlam,
    C0(s) = sin(s pi / 2) / pi,

which never touches eigenvectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AssumptionError, ConvergenceError
from .grid import Field, centered_difference, lebesgue_norm
from .operator import EllipticOperator

NEG_TOL = 1e-10


class QuadratureRangeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectralData:
    """Ascending eigenvalues and eigenvectors orthonormal in the h-weighted inner product."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    h: float = 1.0

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, h: float = 1.0) -> "SpectralData":
        matrix = np.asarray(matrix, dtype=float)
        try:
            lam, vecs = np.linalg.eigh(matrix)
        except np.linalg.LinAlgError as exc:
            resid = float(np.abs(matrix - matrix.T).max())
            raise ConvergenceError(f"eigensolver failed ({exc}); asymmetry {resid:.2e}") from exc
        return cls(lam, vecs / np.sqrt(h), h)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def orthonormal(self) -> np.ndarray:
        """Eigenvectors normalized in the Euclidean inner product."""
        return self.eigenvectors * np.sqrt(self.h)

    def clamped(self) -> np.ndarray:
        lam = self.eigenvalues
        scale = max(np.abs(lam).max(), 1e-300)
        if lam[0] < -NEG_TOL * scale:
            raise AssumptionError(f"operator is not non-negative: eigenvalue {lam[0]:.3e}")
        # round-off sized eigenvalues belong to the kernel (same rule as a numerical rank)
        tiny = np.abs(lam) <= lam.size * np.finfo(float).eps * scale
        return np.where(tiny, 0.0, np.clip(lam, 0.0, None))

    def function(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Matrix of func(H); the eigenvalues passed to func are clamped at 0."""
        u = self.orthonormal
        return (u * func(self.clamped())) @ u.T

    def coefficients(self, f) -> np.ndarray:
        """Expansion coefficients of f in the h-orthonormal eigenbasis."""
        return self.h * (self.eigenvectors.T @ np.asarray(f))

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ coeffs

    def reconstruction_error(self, matrix: np.ndarray) -> float:
        rebuilt = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T * self.h
        return float(np.linalg.norm(rebuilt - matrix) / max(np.linalg.norm(matrix), 1e-300))

    def orthonormality_error(self) -> float:
        gram = self.h * self.eigenvectors.T @ self.eigenvectors
        return float(np.linalg.norm(gram - np.eye(self.n)))


def eigendecompose(op: EllipticOperator) -> SpectralData:
    return SpectralData.from_matrix(op.matrix, op.grid.spacing)


def _power(s: float) -> Callable[[np.ndarray], np.ndarray]:
    def func(lam):
        out = np.zeros_like(lam)
        nz = lam > 0
        out[nz] = lam[nz] ** (s / 2.0)
        return out
    return func


def frac_power_spectral(spec: SpectralData, s: float) -> np.ndarray:
    """H^{s/2} via the eigenbasis, 0^{s/2} := 0."""
    if not 0 < s < 2:
        raise ValueError("s must lie in (0, 2)")
    out = spec.function(_power(s))
    return 0.5 * (out + out.T)


def c0(s: float) -> float:
    return float(np.sin(s * np.pi / 2.0) / np.pi)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes lam_k and weights w_k with  int_0^inf lam^{s/2-1} g(lam) dlam ~ sum w_k g(lam_k).

    The core [lam_lo, lam_hi] is covered by composite Gauss-Legendre panels in
    y = log(lam); the two tails are mapped onto [0, 1] by lam = lam_lo u^{2/s}
    and lam = lam_hi u^{-2/(2-s)}, which turn the power weight into a constant.
    The tails are accurate whenever g is smooth and bounded near 0 and decays
    like 1/lam at infinity, i.e. for the resolvent integrands used here.
    """

    s: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    y_range: tuple[float, float]
    count: int

    def __post_init__(self):
        if not self.y_range[0] < self.y_range[1]:
            raise ValueError("empty quadrature range")
        if self.count < 16:
            raise ValueError("quadrature needs at least 16 nodes")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    @property
    def y(self) -> np.ndarray:
        return np.log(self.nodes)

    def covers(self, lam_lo: float, lam_hi: float) -> bool:
        return self.y_range[0] <= np.log(lam_lo) + 1e-12 and np.log(lam_hi) <= self.y_range[1] + 1e-12

    def integrate(self, g: Callable[[float], object]):
        total = None
        for lam, w in zip(self.nodes, self.weights):
            term = w * g(lam)
            total = term if total is None else total + term
        return total


def balakrishnan_rule(s: float, lam_lo: float, lam_hi: float, count: int = 400,
                      panel_order: int = 2, tail_nodes: int = 16) -> QuadratureRule:
    if not 0 < s < 2:
        raise ValueError("s must lie in (0, 2)")
    if not 0 < lam_lo < lam_hi:
        raise ValueError("need 0 < lam_lo < lam_hi")
    core = count - 2 * tail_nodes
    panels = core // panel_order
    if panels < 1:
        raise ValueError(f"count={count} leaves no room for core panels")
    t, w = leggauss(panel_order)
    edges = np.linspace(np.log(lam_lo), np.log(lam_hi), panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    y = (mid + half * t).ravel()
    wy = (half * w).ravel()
    core_nodes = np.exp(y)
    core_weights = wy * np.exp(y * s / 2.0)

    tt, tw = leggauss(tail_nodes)
    u = 0.5 * (tt + 1.0)
    uw = 0.5 * tw
    low_nodes = lam_lo * u ** (2.0 / s)
    low_weights = (2.0 / s) * lam_lo ** (s / 2.0) * uw
    beta = 1.0 / (1.0 - s / 2.0)
    high_nodes = lam_hi * u ** (-beta)
    high_weights = beta * lam_hi ** (s / 2.0) * u ** (-beta * s / 2.0 - 1.0) * uw

    nodes = np.concatenate([low_nodes, core_nodes, high_nodes])
    weights = np.concatenate([low_weights, core_weights, high_weights])
    return QuadratureRule(s, nodes, weights, (float(edges[0]), float(edges[-1])), nodes.size)


def spectral_bounds(matrix: np.ndarray, h_rel: float = 1e-10) -> tuple[float, float]:
    """Smallest positive and largest eigenvalue (eigenvalues only, no eigenvectors)."""
    lam = np.linalg.eigvalsh(matrix)
    top = float(lam.max())
    pos = lam[lam > h_rel * max(top, 1e-300)]
    return float(pos.min()) if pos.size else top, top


def rule_for_matrix(matrix: np.ndarray, s: float, count: int = 400, lo_mult: float = 1e-3,
                    hi_mult: float = 1e3, **kw) -> QuadratureRule:
    lo, hi = spectral_bounds(matrix)
    return balakrishnan_rule(s, lo_mult * lo, hi_mult * hi, count, **kw)


def frac_power_balakrishnan(op: EllipticOperator | np.ndarray, s: float,
                            rule: QuadratureRule | None = None) -> np.ndarray:
    """H^{s/2} from resolvents only: C0(s) sum_k w_k H (lam_k + H)^{-1}."""
    matrix = op.matrix if isinstance(op, EllipticOperator) else np.asarray(op, dtype=float)
    if rule is None:
        rule = rule_for_matrix(matrix, s)
    if not np.isclose(rule.s, s):
        raise ValueError(f"rule built for s={rule.s}, requested s={s}")
    lo, hi = spectral_bounds(matrix)
    if not rule.covers(1e-3 * lo, 1e3 * hi):
        warnings.warn("quadrature core range does not cover [1e-3 lam_min+, 1e3 lam_max]",
                      QuadratureRangeWarning, stacklevel=2)
    n = matrix.shape[0]
    eye = np.eye(n)
    acc = np.zeros((n, n))
    for lam, w in zip(rule.nodes, rule.weights):
        try:
            acc += w * np.linalg.solve(lam * eye + matrix, matrix)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"resolvent solve failed at lambda={lam:.3e}") from exc
    out = c0(s) * acc
    return 0.5 * (out + out.T)


def balakrishnan_scalar(x: float, s: float, rule: QuadratureRule | None = None) -> float:
    """x^{s/2} through the scalar resolvent integral."""
    if x == 0:
        return 0.0
    if rule is None:
        rule = balakrishnan_rule(s, 1e-3 * x, 1e3 * x)
    return c0(s) * float(np.sum(rule.weights * x / (rule.nodes + x)))


def resolvent_apply(spec: SpectralData, lam: float, f: Field) -> Field:
    if not lam > 0:
        raise ValueError("resolvent parameter must be positive")
    c = spec.coefficients(f.samples)
    return f.with_samples(spec.synthesize(c / (lam + spec.clamped())))


def resolvent_matrix(spec: SpectralData, lam: float) -> np.ndarray:
    return spec.function(lambda mu: 1.0 / (lam + mu))


@dataclass(frozen=True)
class YosidaRow:
    j: float
    norm1: float
    norm2: float


def yosida_decay_report(spec: SpectralData, f: Field, j_list: Iterable[float]) -> list[YosidaRow]:
    """||j^{1/2} grad (j - Delta_h)^{-1} f|| and ||Delta_h (j - Delta_h)^{-1} f|| along j_list.

    ``spec`` must come from the a = 1, v = 0 assembly, so H = -Delta_h.
    """
    rows = []
    c = spec.coefficients(f.samples)
    lam = spec.clamped()
    for j in j_list:
        res = f.with_samples(spec.synthesize(c / (j + lam)))
        n1 = np.sqrt(j) * lebesgue_norm(centered_difference(res), 2)
        n2 = lebesgue_norm(f.with_samples(spec.synthesize(lam * c / (j + lam))), 2)
        rows.append(YosidaRow(float(j), float(n1), float(n2)))
    return rows


def psd_power(m: np.ndarray, s: float) -> np.ndarray:
    lam, u = np.linalg.eigh(0.5 * (m + m.T))
    lam = np.clip(lam, 0.0, None)
    out = (u * lam**s) @ u.T
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class LoewnerReport:
    min_gap_eig: float
    passed: bool
    inverse_min_gap: float | None = None
    inverse_passed: bool | None = None


def loewner_check(m1: np.ndarray, m2: np.ndarray, s: float) -> LoewnerReport:
    """Check m1 <= m2  implies  m1^s <= m2^s (and m2^{-1} <= m1^{-1} when m1 is invertible)."""
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    base = np.linalg.eigvalsh(m2 - m1)[0]
    if base < -1e-10:
        raise AssumptionError(f"m1 <= m2 fails: eigenvalue {base:.3e} of m2 - m1")
    p2 = psd_power(m2, s)
    gap = float(np.linalg.eigvalsh(p2 - psd_power(m1, s))[0])
    passed = gap >= -1e-9 * max(np.linalg.norm(p2, 2), 1e-300)
    inv_gap = inv_pass = None
    lam1 = np.linalg.eigvalsh(m1)
    if lam1[0] > 1e-12 * max(abs(lam1[-1]), 1e-300):
        i1, i2 = np.linalg.inv(m1), np.linalg.inv(m2)
        inv_gap = float(np.linalg.eigvalsh(0.5 * ((i1 - i2) + (i1 - i2).T))[0])
        inv_pass = inv_gap >= -1e-9 * np.linalg.norm(i1, 2)
    return LoewnerReport(gap, bool(passed), inv_gap, None if inv_pass is None else bool(inv_pass))


def log_panels(y_lo: float, y_hi: float, width: float = 0.5, order: int = 8):
    """Composite Gauss-Legendre nodes on [y_lo, y_hi]; returns (y, w, panel_index)."""
    panels = max(1, int(np.ceil((y_hi - y_lo) / width)))
    t, w = leggauss(order)
    edges = np.linspace(y_lo, y_hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    idx = np.repeat(np.arange(panels), order)
    return (mid + half * t).ravel(), (half * w).ravel(), idx


def _weighted_integral(sigma: float, mus: np.ndarray, weights: np.ndarray, y_lo: float,
                       y_hi: float, tol: float = 1e-8) -> float:
    """int_0^inf lam^{2 sigma - 3/2} sum_k weights_k mu_k^{1/2} (lam + mu_k)^{-2 sigma} dlam."""
    y, wy, idx = log_panels(y_lo, y_hi)
    lam = np.exp(y)
    # lam^{2 sigma - 3/2} dlam = lam^{2 sigma - 1/2} dy
    kern = lam[:, None] ** (2 * sigma - 0.5) * np.sqrt(mus)[None, :] \
        * (lam[:, None] + mus[None, :]) ** (-2 * sigma)
    vals = wy * (kern @ weights)
    total = float(vals.sum())
    ends = max(vals[idx == 0].sum(), vals[idx == idx[-1]].sum())
    if total > 0 and ends > tol * total:
        raise ConvergenceError(f"end panel carries {ends / total:.2e} of the integral")
    return total


def resolvent_constant(sigma: float) -> float:
    """c(sigma) = (int_0^inf lam^{2 sigma - 3/2} (1 + lam)^{-2 sigma} dlam)^{1/2}."""
    lo, hi = _margins(sigma, 1.0, 1.0)
    return float(np.sqrt(_weighted_integral(sigma, np.ones(1), np.ones(1), lo, hi)))


def _margins(sigma: float, mu_lo: float, mu_hi: float, digits: float = 12.0):
    lower_rate = 2 * sigma - 0.5  # integrand ~ exp(lower_rate * y) as y -> -inf
    upper_rate = 0.5
    span = digits * np.log(10.0)
    return np.log(mu_lo) - span / lower_rate, np.log(mu_hi) + span / upper_rate


@dataclass(frozen=True)
class ResolventBoundReport:
    sigma: float
    lhs: float
    rhs: float
    passed: bool


def weighted_resolvent_bound(spec: SpectralData, f: Field, sigma: float) -> ResolventBoundReport:
    """|| lam^{sigma-3/4} H^{1/4} (lam+H)^{-sigma} f ||_{L^2(dlam; L^2)} <= c(sigma) ||f||.

    Matrix powers go through the eigenbasis; only the lam-integral is discretized.
    """
    if not 0.25 < sigma <= 1:
        raise ValueError("sigma must lie in (1/4, 1]")
    mu = spec.clamped()
    c = spec.coefficients(f.samples)
    mass = np.abs(c) ** 2
    pos = mu > 0
    if not np.any(pos & (mass > 0)):
        lhs = 0.0
    else:
        lo, hi = _margins(sigma, mu[pos].min(), mu[pos].max())
        lhs = float(np.sqrt(_weighted_integral(sigma, mu[pos], mass[pos], lo, hi)))
    rhs = resolvent_constant(sigma) * lebesgue_norm(f, 2)
    return ResolventBoundReport(sigma, lhs, rhs, lhs <= rhs * (1 + 1e-6))
