import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hglk.besov import DyadicBank
from hglk.commutator import (commutator_matrix, commutator_pairing_direct, commutator_via_balakrishnan,
                             half_power, operator_norm, prop2_case1_ratio, verify_dyadic_key_estimate,
                             verify_fractional_leibniz, verify_kato_ponce, verify_lipschitz_commutator,
                             verify_prop2_case1)
from hglk.errors import ConvergenceError
from hglk.grid import Field, Grid, random_bandlimited
from hglk.operator import (EllipticOperator, assemble, coefficient_family, laplacian, lorentz_quasinorm,
                           potential_family, zero_potential)
from hglk.suites import rough_operator

H2 = np.array([[2.0, -1.0], [-1.0, 2.0]])


def test_commutator_matrix_examples():
    assert not np.any(commutator_matrix(np.full(2, 3.0), H2))
    c = commutator_matrix(np.array([0.0, 1.0]), H2)
    np.testing.assert_array_equal(c, [[0, 1], [-1, 0]])
    assert operator_norm(c) == pytest.approx(1.0, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_commutator_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((8, 8))
    d = m + m.T
    c = commutator_matrix(rng.standard_normal(8), d)
    assert np.array_equal(c.T, -c)


def test_operator_norm_examples():
    assert operator_norm(np.eye(5)) == pytest.approx(1.0)
    assert operator_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0, rel=1e-9)
    with pytest.raises(ValueError):
        operator_norm(np.eye(2), tol=0)
    with pytest.raises(ConvergenceError):
        operator_norm(np.diag([1.0, 0.9999999]), tol=1e-15, max_iter=3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_operator_norm_matches_svd(seed):
    m = np.random.default_rng(seed).standard_normal((12, 12))
    assert operator_norm(m, tol=1e-13) == pytest.approx(np.linalg.norm(m, 2), rel=1e-6)


def test_prop2_constant_f_zero_potential():
    g = Grid(64, 16.0)
    op = assemble(coefficient_family(g, "lipschitz", seed=1), zero_potential(g), g)
    r = prop2_case1_ratio(g.field(np.full(64, 2.5)), op)
    assert r["op_norm"] == 0.0 and r["ratio"] is None


def test_prop2_sine_refinement():
    L = 16.0
    grids = [Grid(n, L) for n in (32, 64, 128)]
    rep = verify_prop2_case1(lambda x: np.sin(2 * np.pi * x / L), laplacian, grids)
    ratios = rep.refinement_ratios
    assert all(np.isfinite(ratios))
    for a, b in zip(ratios, ratios[1:]):
        assert max(a / b, b / a) < 1.5


def test_prop2_rough_family_finite(rng):
    g = Grid(64, 16.0)
    op = rough_operator(g, 2)
    d = half_power(op)
    bank = DyadicBank.build(g)
    ratios = [prop2_case1_ratio(random_bandlimited(g, rng), op, d, bank)["ratio"] for _ in range(30)]
    assert np.isfinite(ratios).all() and max(ratios) < 10


def test_lipschitz_commutator_cases():
    L = 16.0
    grids = [Grid(n, L) for n in (32, 64, 128)]
    rep = verify_lipschitz_commutator(lambda x: np.full_like(x, 4.0), grids)
    assert rep.op_norm <= 1e-10
    rep = verify_lipschitz_commutator(lambda x: np.sin(2 * np.pi * x / L), grids)
    assert rep.refinement[0]["lipschitz"] == pytest.approx(2 * np.pi / L, rel=0.05)
    r = rep.refinement_ratios
    assert max(r) / min(r) < 1.5
    tri = verify_lipschitz_commutator(lambda x: np.abs(x) - L / 4, grids)
    assert np.isfinite(tri.refinement_ratios).all()


def test_leibniz_constant_cases(rng):
    g = Grid(64, 16.0)
    f = random_bandlimited(g, rng)
    const = g.field(np.full(64, 1.3))
    assert verify_fractional_leibniz(const, f, 0.5).residual <= 1e-12
    assert verify_fractional_leibniz(f, const, 0.5).residual <= 1e-12
    with pytest.raises(ValueError):
        verify_fractional_leibniz(f, f, 1.0)


def test_leibniz_random_refinement():
    maxima = []
    for n in (64, 128):
        g = Grid(n, 16.0)
        gen = np.random.default_rng(0)
        best = 0.0
        for _ in range(100):
            f = random_bandlimited(g, gen, max_mode=16)
            h = random_bandlimited(g, gen, max_mode=16)
            best = max(best, verify_fractional_leibniz(f, h, 0.5).residual_ratio)
        maxima.append(best)
    assert np.isfinite(maxima).all() and max(maxima) / min(maxima) < 1.5


def test_kato_ponce_examples(rng):
    g = Grid(64, 2 * np.pi)
    c = np.cos(g.x)
    rep = verify_kato_ponce(g.field(c), g.field(c), 2.0, 2, np.inf, 2, 2, np.inf)
    # (-Delta)(cos^2) = 2 cos 2x; both denominator terms are ||cos||_inf ||cos||_2
    assert rep.ratio == pytest.approx(1.0, rel=1e-12)
    f = random_bandlimited(g, rng)
    one = g.field(np.ones(64))
    assert verify_kato_ponce(f, one, 0.5, 2, np.inf, 2, 2, np.inf).ratio <= 1 + 1e-6
    assert verify_kato_ponce(one, f, 0.5, 2, np.inf, 2, 2, np.inf).ratio <= 1 + 1e-6
    with pytest.raises(ValueError):
        verify_kato_ponce(f, f, 0.5, 2, 2, 2, 2, np.inf)


def test_kato_ponce_random_refinement():
    maxima = []
    for n in (64, 128):
        g = Grid(n, 16.0)
        gen = np.random.default_rng(1)
        maxima.append(max(verify_kato_ponce(random_bandlimited(g, gen, max_mode=16),
                                            random_bandlimited(g, gen, max_mode=16),
                                            0.5, 2, np.inf, 2, 2, np.inf).ratio for _ in range(50)))
    assert max(maxima) / min(maxima) < 1.5


def small_operator():
    g = Grid(2, 2.0)
    return EllipticOperator(g, H2.copy(), None, None)


def test_balakrishnan_pairing_examples(rng):
    op = small_operator()
    g2 = op.grid
    d = half_power(op)
    f = g2.field(np.array([0.0, 1.0]))
    a = Field(g2, np.array([1.0, 2.0j]))
    b = Field(g2, np.array([0.5, -1.0]))
    direct = commutator_pairing_direct(f, d, a, b)
    quad = commutator_via_balakrishnan(f, op, a, b)
    assert abs(direct - quad) <= 1e-8
    const = g2.field(np.full(2, 7.0))
    assert abs(commutator_pairing_direct(const, d, a, b)) <= 1e-13
    assert abs(commutator_via_balakrishnan(const, op, a, b)) <= 1e-14


def test_balakrishnan_pairing_random(rng):
    g = Grid(64, 16.0)
    op = rough_operator(g, 4)
    d = half_power(op)
    for _ in range(5):
        f, a, b = (random_bandlimited(g, rng, complex_valued=k > 0) for k in range(3))
        direct = commutator_pairing_direct(f, d, a, b)
        assert abs(direct - commutator_via_balakrishnan(f, op, a, b)) <= 1e-8 * max(1.0, abs(direct))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_skew_structure(seed):
    rng = np.random.default_rng(seed)
    g = Grid(32, 8.0)
    d = half_power(rough_operator(g, seed % 5))
    f = random_bandlimited(g, rng)
    u = random_bandlimited(g, rng, complex_valued=True)
    val = commutator_pairing_direct(f, d, u, u)
    scale = np.linalg.norm(d, 2) * np.abs(f.samples).max() * np.linalg.norm(u.samples) ** 2 * g.spacing
    assert abs(val.real) <= 1e-10 * scale


def test_potential_difference_bound():
    ratios = []
    for n in (64, 128, 256):
        g = Grid(n, 16.0)
        c = coefficient_family(g, "sinusoidal")
        pot = potential_family(g, weak={"family": "singular", "q": 4.0, "cutoff": 0.1})
        d_v = half_power(assemble(c, pot, g))
        d_0 = half_power(assemble(c, zero_potential(g), g))
        ratios.append(operator_norm(d_v - d_0) / lorentz_quasinorm(pot))
    assert np.isfinite(ratios).all() and max(ratios) / min(ratios) < 1.5


def test_case2_scaling():
    L0, n0 = 16.0, 64

    def norm(R):
        g = Grid(n0 * R, L0 * R)
        d = half_power(laplacian(g))
        f = np.exp(-((g.x / R) ** 2))
        return operator_norm(commutator_matrix(f, d))

    base = norm(1)
    for R in (2, 4):
        assert 0.5 <= norm(R) * R / base <= 2.0


def test_dyadic_key_constant_and_single_mode():
    g = Grid(128, 2 * np.pi)
    op = laplacian(g)
    d = half_power(op)
    bank = DyadicBank.build(g)
    const = g.field(np.full(128, 2.0))
    for j in bank.bands():
        rep = verify_dyadic_key_estimate(const, op, j, d, bank)
        assert rep.lhs6 == 0 and rep.lhs7 == 0
    ratios = []
    for j in (1, 2, 3, 4):
        f = g.field(np.cos(2**j * g.x))  # |xi| = 2^j, where phi_j = 1
        rep = verify_dyadic_key_estimate(f, op, j, d, bank)
        ratios += [rep.ratio6, rep.ratio7]
    assert np.isfinite(ratios).all() and max(ratios) / min(ratios) <= 4


def test_dyadic_key_rough_refinement():
    # the P_{>j} block needs the grid to reach well past 2^{j+1}; coarser
    # grids truncate it and under-report lhs7
    L = 16.0
    out = []
    for n in (256, 512):
        g = Grid(n, L)
        op = rough_operator(g, 1)
        f = g.field(np.cos(2 * np.pi * 8 * g.x / L))
        j = int(np.round(np.log2(2 * np.pi * 8 / L)))
        rep = verify_dyadic_key_estimate(f, op, j)
        out.append((rep.ratio6, rep.ratio7))
    for k in range(2):
        a, b = out[0][k], out[1][k]
        assert np.isfinite([a, b]).all() and max(a / b, b / a) < 1.5
