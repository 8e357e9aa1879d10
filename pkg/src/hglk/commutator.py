"""Commutators [f, D] with D = H^{1/2}: operator norms and the estimate suites."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .besov import DyadicBank, besov_b1inf1, project
from .errors import ConvergenceError
from .grid import (Field, Grid, frac_laplacian, lebesgue_norm, lipschitz_seminorm, same_grid)
from .operator import EllipticOperator, laplacian, lorentz_quasinorm
from .spectral import (QuadratureRule, SpectralData, c0, eigendecompose, frac_power_spectral,
                       rule_for_matrix)


def commutator_matrix(f, d: np.ndarray) -> np.ndarray:
    """diag(f) D - D diag(f)."""
    f = np.asarray(f.samples if isinstance(f, Field) else f)
    return f[:, None] * d - d * f[None, :]


def operator_norm(m: np.ndarray, tol: float = 1e-10, max_iter: int = 20000, window: int = 8) -> float:
    """Largest singular value by powering m^* m from a fixed start vector.

    Each round takes ``window`` power steps and keeps the top Ritz pair of the
    span of those iterates; plain power iteration stalls on the near-degenerate
    singular pairs that projected commutators produce.  ``max_iter`` counts
    applications of m^* m.  The grid metric is h times the identity, so
    Euclidean singular values are the operator norms on the weighted L^2 as well.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.asarray(m)
    if not np.any(m):
        return 0.0
    x = np.random.default_rng(12345).standard_normal(m.shape[1]).astype(m.dtype)
    x /= np.linalg.norm(x)
    est = None
    used = 0
    while used < max_iter:
        basis = [x]
        for _ in range(window - 1):
            y = m.conj().T @ (m @ basis[-1])
            ny = np.linalg.norm(y)
            if ny == 0:
                break
            basis.append(y / ny)
        q, _ = np.linalg.qr(np.column_stack(basis))
        bq = m.conj().T @ (m @ q)
        used += 2 * q.shape[1] - 1
        t = q.conj().T @ bq
        lam, vec = np.linalg.eigh(0.5 * (t + t.conj().T))
        new = float(lam[-1])
        if new <= 0:
            return 0.0
        x = q @ vec[:, -1]
        x /= np.linalg.norm(x)
        if est is not None and abs(new - est) <= tol * new:
            return float(np.sqrt(new))
        est = new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


@dataclass
class CommutatorReport:
    op_norm: float
    besov_term: float
    potential_term: float
    lipschitz: float
    ratio: float | None
    refinement: list = field(default_factory=list)

    @property
    def refinement_ratios(self) -> list:
        return [r["ratio"] for r in self.refinement]


def half_power(op: EllipticOperator) -> np.ndarray:
    return frac_power_spectral(eigendecompose(op), 1.0)


def prop2_case1_ratio(f: Field, op: EllipticOperator, d: np.ndarray | None = None,
                      bank: DyadicBank | None = None) -> dict:
    """||[f, D_{A,V}]|| against ||f||_{B^1_{inf,1}} + ||V||_{L^{q,inf}} ||f||_inf on one grid."""
    d = half_power(op) if d is None else d
    norm = operator_norm(commutator_matrix(f, d))
    besov = besov_b1inf1(f, homogeneous=True, bank=bank)
    pot = lorentz_quasinorm(op.pot) * lebesgue_norm(f, np.inf)
    bound = besov + pot
    return {"n": op.grid.n, "op_norm": norm, "besov_term": besov, "potential_term": pot,
            "lipschitz": lipschitz_seminorm(np.asarray(f.samples), f.grid.spacing),
            "ratio": norm / bound if bound > 0 else None}


def verify_prop2_case1(f: Callable[[np.ndarray], np.ndarray], build: Callable[[Grid], EllipticOperator],
                       grids: Sequence[Grid]) -> CommutatorReport:
    """Run the case-1 commutator ratio along a refinement ladder; report the finest grid."""
    rows = []
    for grid in grids:
        op = build(grid)
        rows.append(prop2_case1_ratio(grid.field(f), op))
    last = rows[-1]
    return CommutatorReport(last["op_norm"], last["besov_term"], last["potential_term"],
                            last["lipschitz"], last["ratio"], rows)


def verify_lipschitz_commutator(f: Callable[[np.ndarray], np.ndarray],
                                grids: Sequence[Grid]) -> CommutatorReport:
    """||[(-Delta_h)^{1/2}, f]|| / Lip(f) with the flux-form Laplacian."""
    rows = []
    for grid in grids:
        d = half_power(laplacian(grid))
        vals = np.asarray(grid.field(f).samples, dtype=float)
        norm = operator_norm(commutator_matrix(vals, d)) if np.ptp(vals) > 0 else 0.0
        lip = lipschitz_seminorm(vals, grid.spacing)
        if lip == 0 and norm > 1e-10:
            raise AssertionError(f"constant f gave commutator norm {norm:.3e}")
        rows.append({"n": grid.n, "op_norm": norm, "lipschitz": lip,
                     "ratio": norm / lip if lip > 0 else None})
    last = rows[-1]
    return CommutatorReport(last["op_norm"], 0.0, 0.0, last["lipschitz"], last["ratio"], rows)


@dataclass(frozen=True)
class LeibnizReport:
    residual: float
    residual_ratio: float | None


def verify_fractional_leibniz(f: Field, g: Field, s: float) -> LeibnizReport:
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    same_grid(f, g)
    fg = f.with_samples(f.samples * g.samples)
    ds_g = frac_laplacian(g, s)
    res = (frac_laplacian(fg, s).samples - f.samples * ds_g.samples
           - g.samples * frac_laplacian(f, s).samples)
    residual = lebesgue_norm(f.with_samples(res), 2)
    den = lebesgue_norm(f, np.inf) * lebesgue_norm(ds_g, 2)
    return LeibnizReport(residual, residual / den if den > 0 else None)


@dataclass(frozen=True)
class KatoPonceReport:
    ratio: float | None
    numerator: float
    denominator: float


def verify_kato_ponce(f: Field, g: Field, s: float, r: float, p1: float, q1: float,
                      p2: float, q2: float) -> KatoPonceReport:
    inv = lambda t: 0.0 if np.isinf(t) else 1.0 / t  # noqa: E731
    if not (np.isclose(inv(r), inv(p1) + inv(q1)) and np.isclose(inv(r), inv(p2) + inv(q2))):
        raise ValueError("need 1/r = 1/p1 + 1/q1 = 1/p2 + 1/q2")
    even = float(s).is_integer() and int(s) % 2 == 0 and s > 0
    if not (s > max(0.0, 1.0 / r - 1.0) or even):
        raise ValueError("s outside the admissible range")
    same_grid(f, g)
    fg = f.with_samples(f.samples * g.samples)
    num = lebesgue_norm(frac_laplacian(fg, s), r)
    den = (lebesgue_norm(frac_laplacian(f, s), p1) * lebesgue_norm(g, q1)
           + lebesgue_norm(f, p2) * lebesgue_norm(frac_laplacian(g, s), q2))
    return KatoPonceReport(num / den if den > 0 else None, num, den)


def _pair(a: np.ndarray, b: np.ndarray, h: float) -> complex:
    return complex(h * np.vdot(b, a))


def commutator_pairing_direct(f, d: np.ndarray, g: Field, h_field: Field) -> complex:
    """<g, [D, f] h> with D given as a matrix."""
    fv = np.asarray(f.samples if isinstance(f, Field) else f)
    hv = h_field.samples
    return _pair(g.samples, d @ (fv * hv) - fv * (d @ hv), g.grid.spacing)


def commutator_via_balakrishnan(f: Field, op: EllipticOperator, g: Field, h_field: Field,
                                rule: QuadratureRule | None = None) -> complex:
    """<g, [H^{1/2}, f] h> = C0(1) int lam^{1/2} <R g, [H, f] R h> dlam,  R = (lam + H)^{-1}.

    Only resolvent solves are used.
    """
    same_grid(f, g, h_field)
    mat = op.matrix
    if rule is None:
        rule = rule_for_matrix(mat, 1.0)
    fv = np.asarray(f.samples)
    comm = mat * fv[None, :] - fv[:, None] * mat  # [H, f]
    n = mat.shape[0]
    eye = np.eye(n)
    rhs = np.column_stack([g.samples, h_field.samples]).astype(complex)
    total = 0j
    for lam, w in zip(rule.nodes, rule.weights):
        sol = np.linalg.solve(lam * eye + mat, rhs)
        # the rule carries lam^{-1/2}; the integrand carries lam^{1/2}
        total += w * lam * _pair(sol[:, 0], comm @ sol[:, 1], op.grid.spacing)
    if not np.isfinite(total):
        raise ConvergenceError("resolvent quadrature produced a non-finite value")
    return c0(1.0) * total


@dataclass(frozen=True)
class DyadicKeyReport:
    j: int
    lhs6: float
    rhs6: float
    lhs7: float
    rhs7: float
    skipped: bool = False

    @property
    def ratio6(self) -> float | None:
        return self.lhs6 / self.rhs6 if self.rhs6 > 0 else None

    @property
    def ratio7(self) -> float | None:
        return self.lhs7 / self.rhs7 if self.rhs7 > 0 else None


def verify_dyadic_key_estimate(f: Field, op: EllipticOperator, j: int, d: np.ndarray | None = None,
                               bank: DyadicBank | None = None) -> DyadicKeyReport:
    """Localized commutator bounds against 2^j ||P_j f||_inf."""
    bank = bank or DyadicBank.build(op.grid)
    d = half_power(op) if d is None else d
    pj = np.asarray(project(bank, f, j).samples)
    rhs = 2.0**j * float(np.abs(pj).max())
    if rhs <= 1e-14 * max(1.0, float(np.abs(np.asarray(f.samples)).max())):
        return DyadicKeyReport(j, 0.0, 0.0, 0.0, 0.0, skipped=True)
    comm = d * pj[None, :] - pj[:, None] * d  # [D, P_j f]
    low = bank.matrix(bank.low_symbol(j))
    high = np.eye(op.grid.n) - low
    lhs6 = operator_norm(comm @ low)
    lhs7 = operator_norm(high @ comm @ high)
    return DyadicKeyReport(j, lhs6, rhs, lhs7, rhs)
