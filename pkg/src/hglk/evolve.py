"""Strang splitting for  du/dt = i D u + |u|^{p-1} u,  D = H^{1/2},  and the blow-up bookkeeping.

The nonlinear substep is solved exactly: the phase is frozen and the modulus
obeys r' = r^p, so r(t) = (r0^{1-p} - (p-1) t)^{-1/(p-1)}.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .besov import besov_b1inf1, japanese_weight
from .commutator import commutator_matrix, operator_norm, prop2_case1_ratio
from .errors import AssumptionError, BlowupDetected, ContractionError
from .grid import Field, Grid, lebesgue_norm, random_bandlimited
from .operator import EllipticOperator, assemble, coefficient_family, potential_family
from .spectral import SpectralData, eigendecompose, frac_power_spectral


# ---------------------------------------------------------------- substeps

def nonlinear_substep(u: np.ndarray, tau: float, p: float) -> np.ndarray:
    r = np.abs(u)
    out = np.zeros_like(u, dtype=complex)
    nz = r > 0
    base = r[nz] ** (1.0 - p) - (p - 1.0) * tau
    if np.any(base <= 0):
        k = int(np.argmin(base))
        t_star = float(r[nz][k] ** (1.0 - p) / (p - 1.0))
        raise BlowupDetected(t_star, int(np.flatnonzero(nz)[k]))
    out[nz] = u[nz] * (base ** (-1.0 / (p - 1.0)) / r[nz])
    return out


class Propagator:
    """exp(i t D) in the eigenbasis of H."""

    def __init__(self, spec: SpectralData):
        self.vectors = spec.orthonormal
        self.freqs = np.sqrt(spec.clamped())

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        return self.vectors @ (np.exp(1j * t * self.freqs) * (self.vectors.T @ u))


def step_strang(u: Field, dt: float, spec: SpectralData | Propagator, p: float) -> Field:
    """Half nonlinear, full linear, half nonlinear.  Raises BlowupDetected."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    prop = spec if isinstance(spec, Propagator) else Propagator(spec)
    v = nonlinear_substep(np.asarray(u.samples, dtype=complex), 0.5 * dt, p)
    v = prop(v, dt)
    v = nonlinear_substep(v, 0.5 * dt, p)
    return u.with_samples(v)


# ---------------------------------------------------------------- Duhamel oracle

@dataclass
class PicardResult:
    u: Field
    distances: list


def picard_oracle(u0: Field, T: float, spec: SpectralData, p: float, k_max: int = 40,
                  quad_nodes: int = 16, tol: float = 1e-14) -> PicardResult:
    """Fixed-point iteration of the Duhamel formula on Chebyshev-Lobatto times in [0, T].

    In the eigenbasis the time integral of exp(-i tau mu) N(u(tau)) is done by
    interpolation and exact antidifferentiation of the interpolant.
    """
    vecs = spec.orthonormal
    mu = np.sqrt(spec.clamped())
    m = quad_nodes
    s = -np.cos(np.pi * np.arange(m) / (m - 1))  # ascending on [-1, 1]
    tau = 0.5 * T * (s + 1.0)
    c0 = vecs.T @ np.asarray(u0.samples, dtype=complex)
    free = np.exp(1j * np.outer(tau, mu))  # (m, n)
    coeffs = free * c0[None, :]
    h = u0.grid.spacing
    distances: list[float] = []
    growth = 0
    for _ in range(k_max):
        u = coeffs @ vecs.T  # (m, n) physical
        nl = np.abs(u) ** (p - 1.0) * u
        z = np.conj(free) * (nl @ vecs)
        fit = cheb.chebfit(s, z, m - 1)
        integral = 0.5 * T * cheb.chebval(s, cheb.chebint(fit, lbnd=-1.0)).T
        new = free * (c0[None, :] + integral)
        dist = float(np.sqrt(h) * np.linalg.norm(new - coeffs, axis=1).max())
        coeffs = new
        if distances and dist > distances[-1]:
            growth += 1
            if growth >= 3:
                raise ContractionError("Picard iterates diverge: outside contraction regime")
        else:
            growth = 0
        distances.append(dist)
        scale = max(1.0, float(np.sqrt(h) * np.linalg.norm(coeffs, axis=1).max()))
        if dist <= tol * scale:
            break
    return PicardResult(u0.with_samples(vecs @ coeffs[-1]), distances)


def strang_solve(u0: Field, T: float, steps: int, spec: SpectralData, p: float) -> Field:
    prop = Propagator(spec)
    u = u0
    dt = T / steps
    for _ in range(steps):
        u = step_strang(u, dt, prop, p)
    return u


# ---------------------------------------------------------------- comparison ODE

@dataclass(frozen=True)
class BlowupOde:
    """f' + A f = B f^q, f(0) = f0."""

    A: float
    B: float
    q: float
    f0: float

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and self.q > 1 and self.f0 > 0):
            raise ValueError("need A, B, f0 > 0 and q > 1")

    @property
    def threshold(self) -> float:
        return (self.A / self.B) ** (1.0 / (self.q - 1.0))

    @property
    def t_bound(self) -> float | None:
        # within rounding of the equilibrium the solution is constant
        if self.f0 <= self.threshold * (1.0 + 1e-12):
            return None
        arg = 1.0 - self.A / self.B * self.f0 ** (1.0 - self.q)
        return float(-np.log(arg) / (self.A * (self.q - 1.0)))

    def rhs(self, f):
        return self.B * f**self.q - self.A * f


def ode_closed_form(ode: BlowupOde, t):
    t = np.asarray(t, dtype=float)
    tb = ode.t_bound
    if tb is not None and np.any(t >= tb):
        raise ValueError("past blow-up bound")
    A, B, q = ode.A, ode.B, ode.q
    # grouped so the equilibrium case cancels exactly
    inner = (ode.f0 ** (1.0 - q) - B / A) + B / A * np.exp(-A * (q - 1.0) * t)
    out = np.exp(-A * t) * inner ** (-1.0 / (q - 1.0))
    return float(out) if out.ndim == 0 else out


def rk4_solve(ode: BlowupOde, t_end: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Classical fourth-order Runge-Kutta on a uniform grid."""
    t = np.linspace(0.0, t_end, steps + 1)
    dt = t_end / steps
    f = np.empty(steps + 1)
    f[0] = y = ode.f0
    g = ode.rhs
    for k in range(steps):
        k1 = g(y)
        k2 = g(y + 0.5 * dt * k1)
        k3 = g(y + 0.5 * dt * k2)
        k4 = g(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        f[k + 1] = y
    return t, f


# ---------------------------------------------------------------- threshold certificate

def threshold_rhs(C: float, inv_w_sup: float, w_besov: float, inv_w_l2: float, p: float) -> float:
    e = 2.0 / (p - 1.0)
    return (C * inv_w_sup * w_besov) ** e * inv_w_l2**2


@dataclass
class Certificate:
    lhs: float
    lhs_literal: float
    rhs: float
    C_emp: float
    C_source: str
    A: float
    B: float
    t_bound: float | None
    predicted: bool
    T_obs: float | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in ("lhs", "lhs_literal", "rhs", "C_emp", "C_source", "A", "B",
                                  "t_bound", "predicted", "T_obs")}


def weight_norms(w: Field) -> dict:
    vals = np.asarray(w.samples, dtype=float)
    if np.any(vals == 0):
        raise ValueError("weight vanishes somewhere")
    inv = w.with_samples(1.0 / vals)
    return {"inv_sup": lebesgue_norm(inv, np.inf), "inv_l2": lebesgue_norm(inv, 2),
            "besov": besov_b1inf1(w, homogeneous=False)}


def threshold_certificate(u0: Field, w: Field, p: float, C_emp: float,
                          C_source: str = "supplied") -> Certificate:
    """Blow-up certificate from the weighted-mass inequality.

    The comparison variable is F = ||u/w||^2; it obeys
    F'/2 >= B F^{(p+1)/2} - A F with A = C ||1/w||_inf ||w||_B and
    B = ||1/w||_2^{1-p}, so blow-up is forced once F(0) > (A/B)^{2/(p-1)},
    which is the displayed threshold product.  ``lhs_literal`` is ||w u0||^2.
    """
    if p <= 1:
        raise ValueError("p > 1 required")
    nrm = weight_norms(w)
    wv = np.asarray(w.samples, dtype=float)
    lhs = lebesgue_norm(u0.with_samples(u0.samples / wv), 2) ** 2
    lhs_lit = lebesgue_norm(u0.with_samples(u0.samples * wv), 2) ** 2
    rhs = threshold_rhs(C_emp, nrm["inv_sup"], nrm["besov"], nrm["inv_l2"], p)
    A = C_emp * nrm["inv_sup"] * nrm["besov"]
    B = nrm["inv_l2"] ** (1.0 - p)
    t_bound = None
    if lhs > 0 and A > 0:
        t_bound = BlowupOde(2 * A, 2 * B, 0.5 * (p + 1.0), lhs).t_bound
    return Certificate(lhs, lhs_lit, rhs, C_emp, C_source, A, B, t_bound, bool(lhs > 0 and lhs >= rhs))


def empirical_constant(op: EllipticOperator, w: Field, d: np.ndarray | None = None,
                       trials: int = 20, seed: int = 0) -> tuple[float, str]:
    """C_emp: max of the case-1 ratio over a seeded family and of ||[D,w]|| / ||w||_B."""
    d = frac_power_spectral(eigendecompose(op), 1.0) if d is None else d
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        f = random_bandlimited(op.grid, rng, max_mode=8)
        r = prop2_case1_ratio(f.with_samples(f.samples.real), op, d)["ratio"]
        best = max(best, r or 0.0)
    own = operator_norm(commutator_matrix(w, d)) / besov_b1inf1(w, homogeneous=False)
    source = f"prop2_case1 max over {trials} seeded fields and the weight itself"
    return max(best, own), source


# ---------------------------------------------------------------- evolution

@dataclass
class SimulationConfig:
    p: float = 2.0
    dt: float = 1e-2
    t_max: float = 5.0
    blowup_threshold: float = 1e8
    weight_a: float = 0.75
    n: int = 128
    length: float = 32.0
    coeff: dict = field(default_factory=lambda: {"family": "sinusoidal", "mean": 1.0, "amplitude": 0.5})
    potential: dict = field(default_factory=lambda: {"weak": {"family": "zero"}, "q": 4.0, "theta": 0.5})
    amplitude: float = 1.0
    width: float = 1.0
    seed: int = 0
    cadence: int = 1
    dispersion: bool = True
    max_steps: int = 200000

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p > 1 required")
        if not 0.5 < self.weight_a < 1:
            raise ValueError("weight_a must lie in (1/2, 1)")
        if not (self.dt > 0 and self.t_max > 0):
            raise ValueError("dt and t_max must be positive")

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.length)

    def operator(self) -> EllipticOperator:
        grid = self.grid
        coeff = coefficient_family(grid, **self.coeff)
        pot = potential_family(grid, **self.potential)
        return assemble(coeff, pot, grid)

    def initial(self) -> Field:
        x = self.grid.x
        return Field(self.grid, self.amplitude * np.exp(-(x / self.width) ** 2) + 0j)

    def weight(self) -> Field:
        return japanese_weight(self.grid, self.weight_a)


@dataclass
class EvolutionTrace:
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    lp1: list = field(default_factory=list)
    weighted_mass: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    dF_dt: list = field(default_factory=list)
    rhs_lower: list = field(default_factory=list)
    slack: list = field(default_factory=list)
    status: str = "running"
    T_obs: float | None = None
    A_emp: float = 0.0
    B: float = 0.0
    p: float = 2.0
    u_final: np.ndarray | None = field(default=None, repr=False)

    COLUMNS = ("t", "mass", "lp1", "weighted_mass", "dF_dt_measured", "rhs_lower", "linf")

    def rows(self):
        for k in range(len(self.times)):
            yield (self.times[k], self.mass[k], self.lp1[k], self.weighted_mass[k],
                   self.dF_dt[k], self.rhs_lower[k], self.linf[k])

    def inequality_mask(self) -> np.ndarray:
        """Per recorded time: F'/2 >= B F^{(p+1)/2} - A_emp F - slack (NaN ends excluded)."""
        d = np.asarray(self.dF_dt)
        ok = 0.5 * d >= np.asarray(self.rhs_lower) - np.asarray(self.slack)
        return ok[np.isfinite(d)]

    def inequality_fraction(self) -> float:
        mask = self.inequality_mask()
        return float(mask.mean()) if mask.size else 1.0


def _derivatives(t: np.ndarray, F: np.ndarray):
    d = np.full(t.size, np.nan)
    spread = np.full(t.size, np.nan)
    if t.size >= 3:
        hm = t[1:-1] - t[:-2]
        hp = t[2:] - t[1:-1]
        fm, f0, fp = F[:-2], F[1:-1], F[2:]
        d[1:-1] = (hm**2 * fp - hp**2 * fm + (hp**2 - hm**2) * f0) / (hm * hp * (hm + hp))
        spread[1:-1] = np.abs((fp - f0) / hp - (f0 - fm) / hm)
    return d, spread


def evolve(config: SimulationConfig, u0: Field | None = None, op: EllipticOperator | None = None,
           A_emp: float | None = None) -> EvolutionTrace:
    """Integrate to t_max or blow-up, recording the weighted-mass diagnostics."""
    op = op or config.operator()
    spec = eigendecompose(op)
    lam = spec.eigenvalues
    if lam[0] < -1e-10 * max(abs(lam).max(), 1e-300):
        raise AssumptionError("operator is not non-negative")
    grid = op.grid
    h = grid.spacing
    p = config.p
    u = config.initial() if u0 is None else u0
    w = np.asarray(config.weight().samples, dtype=float)
    if config.dispersion:
        prop = Propagator(spec)
        d = frac_power_spectral(spec, 1.0)
    else:
        prop = lambda v, t: v  # noqa: E731
        d = np.zeros((grid.n, grid.n))
    if A_emp is None:
        A_emp = float(np.max(1.0 / w)) * operator_norm(commutator_matrix(w, d))
    B = float(np.sqrt(h * np.sum(w**-2.0))) ** (1.0 - p)
    trace = EvolutionTrace(A_emp=A_emp, B=B, p=p)

    def record(t, v):
        mod = np.abs(v)
        trace.times.append(float(t))
        trace.mass.append(float(h * np.sum(mod**2)))
        trace.lp1.append(float(h * np.sum(mod ** (p + 1))))
        trace.weighted_mass.append(float(h * np.sum((mod / w) ** 2)))
        trace.linf.append(float(mod.max()))

    v = np.asarray(u.samples, dtype=complex)
    t = 0.0
    record(t, v)
    step = 0
    while t < config.t_max - 1e-15:
        linf = float(np.abs(v).max())
        if linf > config.blowup_threshold:
            trace.status, trace.T_obs = "blown_up", t
            break
        dt = min(config.dt, config.t_max - t)
        if linf > 0:
            dt = min(dt, 0.1 / (p - 1.0) * linf ** (1.0 - p))
        try:
            v1 = nonlinear_substep(v, 0.5 * dt, p)
            v1 = prop(v1, dt)
            v1 = nonlinear_substep(v1, 0.5 * dt, p)
        except BlowupDetected:
            trace.status, trace.T_obs = "blown_up", t
            break
        v = v1
        t += dt
        step += 1
        if step % config.cadence == 0:
            record(t, v)
        if step >= config.max_steps:
            trace.status = "stalled"
            break
    else:
        trace.status = "completed"
    if trace.status == "blown_up" and trace.times[-1] != t:
        record(t, v)
    trace.u_final = v

    tt = np.asarray(trace.times)
    F = np.asarray(trace.weighted_mass)
    dF, spread = _derivatives(tt, F)
    rhs = B * F ** (0.5 * (p + 1.0)) - A_emp * F
    scale = np.maximum.reduce([np.abs(rhs), 0.5 * np.abs(np.nan_to_num(dF)), A_emp * F])
    trace.dF_dt = list(dF)
    trace.rhs_lower = list(rhs)
    trace.slack = list(1e-6 * scale + 0.25 * np.nan_to_num(spread, nan=0.0))
    return trace


# ---------------------------------------------------------------- rescaling

@dataclass
class RescalingRow:
    R: float
    A_emp: float
    B: float
    ratio: float


def rescaled_commutator_norms(build: Callable[[Grid], EllipticOperator], base: Grid,
                              R_list: Sequence[int], a: float = 0.75) -> list[tuple[float, float]]:
    """(R, ||1/w_R||_inf ||[D, w_R]||) with w_R = <x/R>^a on the domain enlarged R times."""
    out = []
    for R in R_list:
        grid = Grid(base.n * int(R), base.length * R)
        op = build(grid)
        d = frac_power_spectral(eigendecompose(op), 1.0)
        w = japanese_weight(grid, a, scale=float(R))
        wv = np.asarray(w.samples)
        out.append((float(R), float(np.max(1.0 / wv)) * operator_norm(commutator_matrix(wv, d))))
    return out


def rescaling_scan(norms: Sequence[tuple[float, float]], inv_w_l2: float, p: float):
    """Rows {R, A_emp, B, A_emp/B} and the fitted log-log slope of A_emp/B against R."""
    if len(norms) < 3:
        raise ValueError("need at least three R values to fit a slope")
    if not 1 < p <= 3:
        raise ValueError("rescaling needs 1 < p <= 3")
    rows = []
    for R, A in norms:
        B = R ** (-(p - 1.0) / 2.0) * inv_w_l2 ** (1.0 - p)
        rows.append(RescalingRow(R, A, B, A / B))
    R = np.log([r.R for r in rows])
    y = np.log([r.ratio for r in rows])
    slope = float(np.polyfit(R, y, 1)[0])
    return rows, slope
