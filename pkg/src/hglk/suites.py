"""Seeded property suites shared by the `verify` subcommand and the acceptance tests.

Every suite is a pure function of its arguments and returns a SuiteResult whose
metrics are plain floats, so two runs with the same inputs serialize identically.
Wall-clock timings are deliberately kept out of the results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .besov import japanese_weight, second_difference_integrand, weight_scan
from .commutator import (commutator_matrix, commutator_pairing_direct, commutator_via_balakrishnan,
                         operator_norm, prop2_case1_ratio)
from .evolve import (BlowupOde, SimulationConfig, empirical_constant, evolve, ode_closed_form,
                     picard_oracle, rescaled_commutator_norms, rescaling_scan, rk4_solve,
                     strang_solve, threshold_certificate)
from .grid import Field, Grid, lebesgue_norm, random_bandlimited
from .operator import EllipticOperator, assemble, coefficient_family, potential_family
from .spectral import (balakrishnan_scalar, eigendecompose, frac_power_balakrishnan,
                       frac_power_spectral, loewner_check, resolvent_constant, rule_for_matrix,
                       weighted_resolvent_bound)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    count: int
    total: int
    metrics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "pass_count": int(self.count),
                "total": int(self.total), "metrics": self.metrics}


def rough_operator(grid: Grid, seed: int) -> EllipticOperator:
    """Seeded piecewise-linear a in [0.5, 1.5] and a mixed potential.

    V = 0.5 |x|^{-1/4} (the L^{4,inf} part) plus seeded noise on top of a positive offset.
    """
    coeff = coefficient_family(grid, "lipschitz", seed=seed, knots=8, low=0.5, high=1.5)
    pot = potential_family(grid, weak={"family": "singular", "q": 4.0, "strength": 0.5},
                           bounded={"family": "noise", "seed": seed, "amplitude": 0.1, "offset": 0.2})
    return assemble(coeff, pot, grid)


def _rel(a: np.ndarray, b: np.ndarray, ord=2) -> float:
    return float(np.linalg.norm(a - b, ord) / np.linalg.norm(b, ord))


# 1
def fracpow_cross(trials: int = 20, n: int = 64, nodes: int = 400, seed: int = 0,
                  tol: float = 1e-6, min_gain: float = 4.0) -> SuiteResult:
    errs, gains = [], []
    for k in range(trials):
        op = rough_operator(Grid(n, 16.0), seed + k)
        ref = frac_power_spectral(eigendecompose(op), 1.0)
        e1 = _rel(frac_power_balakrishnan(op, 1.0, rule_for_matrix(op.matrix, 1.0, nodes)), ref)
        e2 = _rel(frac_power_balakrishnan(op, 1.0, rule_for_matrix(op.matrix, 1.0, 2 * nodes)), ref)
        errs.append(e1)
        gains.append(e1 / e2 if e2 > 0 else np.inf)
    ok = [e <= tol and g >= min_gain for e, g in zip(errs, gains)]
    return SuiteResult("fracpow_cross", all(ok), sum(ok), trials,
                       {"max_rel_error": max(errs), "min_doubling_gain": min(gains)})


# 2
def square_identity(sizes=(64, 128, 256, 512, 1024), seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    worst = {}
    ok = []
    for n in sizes:
        grid = Grid(n, 16.0)
        ops = [rough_operator(grid, seed),
               assemble(coefficient_family(grid, "sinusoidal", amplitude=0.5),
                        potential_family(grid), grid)]
        for op in ops:
            d = frac_power_spectral(eigendecompose(op), 1.0)
            e = float(np.linalg.norm(d @ d - op.matrix) / np.linalg.norm(op.matrix))
            worst[str(n)] = max(worst.get(str(n), 0.0), e)
            ok.append(e <= tol)
    return SuiteResult("square_identity", all(ok), sum(ok), len(ok), {"max_rel_error_by_n": worst})


# 3
def scalar_balakrishnan(xs=(0.25, 1.0, 4.0, 100.0), tol: float = 1e-8) -> SuiteResult:
    errs = [abs(balakrishnan_scalar(x, 1.0) - np.sqrt(x)) / np.sqrt(x) for x in xs]
    ok = [e <= tol for e in errs]
    return SuiteResult("scalar_balakrishnan", all(ok), sum(ok), len(ok), {"max_rel_error": max(errs)})


# 4
def resolvent_bound(cases: int = 50, sigmas=(0.3, 0.5, 1.0), n: int = 64, seed: int = 0,
                    tol: float = 1e-6) -> SuiteResult:
    # independent value of c(1)^2: adaptive quadrature and the Beta function
    quad, _ = integrate.quad(lambda t: np.sqrt(t) / (1 + t) ** 2, 0, np.inf, epsabs=1e-13, epsrel=1e-13)
    c1 = resolvent_constant(1.0) ** 2
    const_err = max(abs(c1 - np.pi / 2), abs(quad - np.pi / 2), abs(c1 - special.beta(1.5, 0.5)))
    rng = np.random.default_rng(seed)
    worst = {}
    ok = [const_err <= tol]
    for k in range(cases):
        grid = Grid(n, 16.0)
        spec = eigendecompose(rough_operator(grid, seed + k))
        f = random_bandlimited(grid, rng, complex_valued=True)
        for s in sigmas:
            rep = weighted_resolvent_bound(spec, f, s)
            worst[str(s)] = max(worst.get(str(s), 0.0), rep.lhs / rep.rhs)
            ok.append(rep.passed)
    return SuiteResult("resolvent_bound", all(ok), sum(ok), len(ok),
                       {"c1_squared": c1, "c1_squared_error": const_err, "max_lhs_over_rhs": worst})


# 5
def loewner_suite(pairs: int = 200, powers=(0.25, 0.5, 0.75, 1.0), size: int = 8,
                  seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    ok, worst, worst_inv = [], np.inf, np.inf
    for _ in range(pairs):
        g = rng.standard_normal((size, size))
        m1 = g @ g.T + 1e-3 * np.eye(size)
        r = rng.standard_normal((size, 2))
        m2 = m1 + r @ r.T
        for s in powers:
            rep = loewner_check(m1, m2, s)
            scale = float(np.linalg.norm(m2, 2) ** s)
            worst = min(worst, rep.min_gap_eig / scale)
            worst_inv = min(worst_inv, rep.inverse_min_gap / float(np.linalg.norm(np.linalg.inv(m1), 2)))
            ok.append(rep.passed and bool(rep.inverse_passed))
    return SuiteResult("loewner", all(ok), sum(ok), len(ok),
                       {"min_scaled_gap": worst, "min_scaled_inverse_gap": worst_inv})


# 6
def commutator_identity(triples: int = 50, n: int = 64, seed: int = 0, tol: float = 1e-6) -> SuiteResult:
    rng = np.random.default_rng(seed)
    grid = Grid(n, 16.0)
    op = rough_operator(grid, seed)
    d = frac_power_spectral(eigendecompose(op), 1.0)
    rule = rule_for_matrix(op.matrix, 1.0)
    dnorm = float(np.linalg.norm(d, 2))
    ok, worst = [], 0.0
    for _ in range(triples):
        f = random_bandlimited(grid, rng)
        g = random_bandlimited(grid, rng, complex_valued=True)
        h = random_bandlimited(grid, rng, complex_valued=True)
        direct = commutator_pairing_direct(f, d, g, h)
        quad = commutator_via_balakrishnan(f, op, g, h, rule)
        scale = 2 * dnorm * lebesgue_norm(f, np.inf) * lebesgue_norm(g, 2) * lebesgue_norm(h, 2)
        err = abs(direct - quad) / scale
        worst = max(worst, err)
        ok.append(err <= tol)
    return SuiteResult("commutator_identity", all(ok), sum(ok), len(ok), {"max_scaled_gap": worst})


# 7
def prop2_stability(trials: int = 100, sizes=(64, 128, 256), length: float = 16.0, seed: int = 0,
                    max_mode: int = 16) -> SuiteResult:
    maxima = []
    for n in sizes:
        grid = Grid(n, length)
        op = rough_operator(grid, seed)
        d = frac_power_spectral(eigendecompose(op), 1.0)
        rng = np.random.default_rng(seed)
        best = 0.0
        for _ in range(trials):
            f = random_bandlimited(grid, rng, max_mode=max_mode)
            best = max(best, prop2_case1_ratio(f, op, d)["ratio"])
        maxima.append(best)
    change = max(maxima) / min(maxima)  # across the whole refinement chain
    grid = Grid(sizes[0], length)
    flat = assemble(coefficient_family(grid, "lipschitz", seed=seed), potential_family(grid), grid)
    const = operator_norm(commutator_matrix(np.full(grid.n, 1.7), frac_power_spectral(eigendecompose(flat), 1.0)))
    ok = [change < 2.0, const < 1e-10]
    return SuiteResult("prop2_case1", all(ok), sum(ok), len(ok),
                       {"max_ratio_by_n": {str(n): m for n, m in zip(sizes, maxima)},
                        "max_refinement_change": change, "constant_f_op_norm": const})


# 8
def besov_weights(L_list=(64.0, 128.0, 256.0, 512.0), seed: int = 0) -> SuiteResult:
    rows = weight_scan([0.7, 1.0], L_list)
    conv = [r for r in rows if r.a == 0.7]
    div = [r for r in rows if r.a == 1.0]
    tail = max(r.partial_sum_tail for r in conv)
    inc = np.diff([r.besov_value for r in div])
    L = L_list[-1]
    grid = Grid(int(L / 0.125), L)
    t = np.linspace(1.0, L / 4, 64)
    integrand = second_difference_integrand(japanese_weight(grid, 1.0), t)
    margin = float(np.min(integrand - t / 8))
    ok = [tail <= 0.05 and conv[0].verdict == "convergent", float(inc.min()) > 0.05, margin >= 0]
    return SuiteResult("besov_weights", all(ok), sum(ok), len(ok),
                       {"a07_values": [r.besov_value for r in conv], "a07_max_tail": tail,
                        "a10_values": [r.besov_value for r in div], "a10_min_increment": float(inc.min()),
                        "second_difference_margin": margin})


# 9
def ode_comparison(cases: int = 20, seed: int = 0, steps: int = 20000, tol: float = 1e-6) -> SuiteResult:
    rng = np.random.default_rng(seed)
    ok, worst = [], 0.0
    for _ in range(cases):
        A, B = rng.uniform(0.5, 2.0, 2)
        q = rng.uniform(1.5, 3.0)
        f0 = (A / B) ** (1 / (q - 1)) * rng.uniform(1.2, 3.0)
        ode = BlowupOde(A, B, q, f0)
        t, f = rk4_solve(ode, 0.9 * ode.t_bound, steps)
        err = float(np.max(np.abs(f - ode_closed_form(ode, t))))
        worst = max(worst, err)
        ok.append(err <= tol)
    eq = BlowupOde(2.0, 1.0, 2.0, 2.0)
    t = np.linspace(0, 50, 201)
    eq_err = float(np.max(np.abs(ode_closed_form(eq, t) - 2.0)))
    ok.append(eq_err <= 1e-9 and eq.t_bound is None)
    return SuiteResult("ode_comparison", all(ok), sum(ok), len(ok),
                       {"max_abs_error": worst, "equilibrium_drift": eq_err})


def blowup_config(n: int = 128, length: float = 32.0) -> SimulationConfig:
    return SimulationConfig(p=2.0, n=n, length=length, dt=1e-2, t_max=5.0,
                            coeff={"family": "sinusoidal", "mean": 1.0, "amplitude": 0.5, "mode": 1},
                            potential={"weak": {"family": "zero"}})


# 10
def blowup_reproduction(cfg: SimulationConfig | None = None, factor: float = 1.5,
                        min_fraction: float = 0.99) -> SuiteResult:
    cfg = cfg or blowup_config()
    op = cfg.operator()
    w = cfg.weight()
    C, source = empirical_constant(op, w, seed=cfg.seed)
    unit = threshold_certificate(cfg.initial(), w, cfg.p, C)
    cfg.amplitude = cfg.amplitude * factor * np.sqrt(unit.rhs / unit.lhs)
    u0 = cfg.initial()
    cert = threshold_certificate(u0, w, cfg.p, C, source)
    trace = evolve(cfg, u0, op)
    cert.T_obs = trace.T_obs
    frac = trace.inequality_fraction()
    ok = [trace.status == "blown_up", cert.predicted and cert.t_bound is not None
          and trace.T_obs is not None and trace.T_obs <= 1.1 * cert.t_bound, frac >= min_fraction]
    return SuiteResult("blowup_reproduction", all(ok), sum(ok), len(ok),
                       {"amplitude": cfg.amplitude, "status": trace.status, "T_obs": trace.T_obs,
                        "t_bound": cert.t_bound, "C_emp": C, "inequality_fraction": frac,
                        "recorded_steps": len(trace.times)})


def rescaling_build(L0: float):
    def build(grid: Grid) -> EllipticOperator:
        R = int(round(grid.length / L0))
        c = coefficient_family(grid, "sinusoidal", mean=1.0, amplitude=0.5, mode=R)
        return assemble(c, potential_family(grid), grid)
    return build


# 11
def rescaling_slopes(powers=(1.5, 2.0, 2.5, 3.0), R_list=(1, 2, 4, 8), n0: int = 32,
                     L0: float = 16.0, a: float = 0.75, tol: float = 0.15) -> SuiteResult:
    base = Grid(n0, L0)
    norms = rescaled_commutator_norms(rescaling_build(L0), base, R_list, a)
    w = np.asarray(japanese_weight(base, a).samples)
    inv_l2 = float(np.sqrt(base.spacing * np.sum(w**-2.0)))
    slopes, ok = {}, []
    for p in powers:
        _, slope = rescaling_scan(norms, inv_l2, p)
        slopes[str(p)] = slope
        ok.append(abs(slope - (-1.0 + (p - 1.0) / 2.0)) <= tol)
    return SuiteResult("rescaling_slope", all(ok), sum(ok), len(ok),
                       {"slopes": slopes, "A_emp": [A for _, A in norms]})


# 12
def strang_order(T: float = 0.01, rungs: int = 3, amplitude: float = 0.1, n: int = 64,
                 length: float = 16.0, lo: float = 3.5, hi: float = 4.5) -> SuiteResult:
    cfg = SimulationConfig(p=2.0, n=n, length=length, amplitude=amplitude)
    spec = eigendecompose(cfg.operator())
    u0 = cfg.initial()
    ref = picard_oracle(u0, T, spec, cfg.p)
    gaps = []
    for k in range(rungs + 1):
        u = strang_solve(u0, T, 2**k, spec, cfg.p)
        gaps.append(lebesgue_norm(u.with_samples(u.samples - ref.u.samples), 2))
    factors = [a / b for a, b in zip(gaps, gaps[1:])]
    contraction = [b / a for a, b in zip(ref.distances, ref.distances[1:]) if a > 0]
    ok = [lo <= f <= hi for f in factors] + [max(contraction) < 1]
    return SuiteResult("strang_order", all(ok), sum(ok), len(ok),
                       {"gaps": gaps, "factors": factors, "picard_distances": ref.distances})


ALL = [fracpow_cross, square_identity, scalar_balakrishnan, resolvent_bound, loewner_suite,
       commutator_identity, prop2_stability, besov_weights, ode_comparison, blowup_reproduction,
       rescaling_slopes, strang_order]
