"""Acceptance criteria, one test per criterion; each prints a single PASS/FAIL line."""
import subprocess
import sys
import time
from pathlib import Path

import pytest

from hglk import suites

DEFAULT = Path(__file__).resolve().parents[1] / "configs" / "default.yaml"


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {k:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def _timed(fn):
    t0 = time.perf_counter()
    res = fn()
    return res, time.perf_counter() - t0


def test_c01_fracpow_cross_path(report):
    res, secs = _timed(suites.fracpow_cross)
    m = res.metrics
    ok = res.passed and m["max_rel_error"] <= 1e-6 and m["min_doubling_gain"] >= 4 and secs < 10
    report(1, ok, f"rel err {m['max_rel_error']:.2e} <= 1e-6, node-doubling gain "
                  f"{m['min_doubling_gain']:.1f} >= 4, {secs:.1f}s < 10s")


def test_c02_square_identity(report):
    res = suites.square_identity()
    worst = max(res.metrics["max_rel_error_by_n"].values())
    report(2, res.passed and worst <= 1e-10, f"max ||D^2-H||_F/||H||_F {worst:.2e} <= 1e-10 up to n=1024")


def test_c03_scalar_balakrishnan(report):
    res = suites.scalar_balakrishnan()
    err = res.metrics["max_rel_error"]
    report(3, res.passed and err <= 1e-8, f"max rel err vs sqrt(x) {err:.2e} <= 1e-8")


def test_c04_resolvent_constant(report):
    res = suites.resolvent_bound()
    m = res.metrics
    report(4, res.passed and m["c1_squared_error"] <= 1e-6,
           f"constant {m['c1_squared']:.10f} vs pi/2 (err {m['c1_squared_error']:.1e}); "
           f"{res.count}/{res.total} bound checks")


def test_c05_loewner(report):
    res = suites.loewner_suite()
    m = res.metrics
    ok = res.passed and min(m["min_scaled_gap"], m["min_scaled_inverse_gap"]) >= -1e-9
    report(5, ok, f"{res.count}/{res.total} cases, min scaled gap {m['min_scaled_gap']:.1e}, "
                  f"inverse {m['min_scaled_inverse_gap']:.1e} >= -1e-9")


def test_c06_commutator_identity(report):
    res = suites.commutator_identity()
    gap = res.metrics["max_scaled_gap"]
    report(6, res.passed and gap <= 1e-6, f"{res.count}/{res.total} triples, max scaled gap {gap:.1e} <= 1e-6")


def test_c07_prop2_stability(report):
    res = suites.prop2_stability()
    m = res.metrics
    ok = res.passed and m["max_refinement_change"] < 2 and m["constant_f_op_norm"] < 1e-10
    report(7, ok, f"ratios {m['max_ratio_by_n']}, change {m['max_refinement_change']:.2f} < 2, "
                  f"constant-f norm {m['constant_f_op_norm']:.1e} < 1e-10")


def test_c08_besov_weights(report):
    res = suites.besov_weights()
    m = res.metrics
    ok = (res.passed and m["a07_max_tail"] <= 0.05 and m["a10_min_increment"] > 0
          and m["second_difference_margin"] >= 0)
    report(8, ok, f"a=0.7 tail ratio {m['a07_max_tail']:.3f} <= 0.05, a=1 min increment "
                  f"{m['a10_min_increment']:.3f} > 0, min(integrand - t/8) {m['second_difference_margin']:.2f} >= 0")


def test_c09_ode_comparison(report):
    res = suites.ode_comparison()
    m = res.metrics
    ok = res.passed and m["max_abs_error"] <= 1e-6 and m["equilibrium_drift"] <= 1e-9
    report(9, ok, f"closed form vs RK4 {m['max_abs_error']:.1e} <= 1e-6, equilibrium drift "
                  f"{m['equilibrium_drift']:.1e} <= 1e-9")


def test_c10_blowup_reproduction(report):
    res, secs = _timed(suites.blowup_reproduction)
    m = res.metrics
    ok = (res.passed and m["status"] == "blown_up" and m["T_obs"] <= 1.1 * m["t_bound"]
          and m["inequality_fraction"] >= 0.99 and secs < 60)
    report(10, ok, f"status {m['status']}, T_obs {m['T_obs']:.4f} <= 1.1*t_bound {1.1 * m['t_bound']:.4f}, "
                   f"inequality holds at {100 * m['inequality_fraction']:.1f}% of steps, {secs:.1f}s < 60s")


def test_c11_rescaling_slope(report):
    res = suites.rescaling_slopes()
    slopes = res.metrics["slopes"]
    ok = res.passed and all(abs(s - (-1 + (float(p) - 1) / 2)) <= 0.15 for p, s in slopes.items())
    report(11, ok, "fitted slopes " + ", ".join(f"p={p}: {s:+.3f} (target {-1 + (float(p) - 1) / 2:+.2f})"
                                                for p, s in slopes.items()))


def test_c12_strang_order(report):
    res = suites.strang_order()
    f = res.metrics["factors"]
    ok = res.passed and len(f) == 3 and all(3.5 <= x <= 4.5 for x in f)
    report(12, ok, "gap reduction factors " + ", ".join(f"{x:.3f}" for x in f) + " in [3.5, 4.5]")


def test_c13_verify_is_deterministic(tmp_path, report):
    outs = [tmp_path / "run1", tmp_path / "run2"]
    codes = [subprocess.run([sys.executable, "-m", "hglk.cli", "verify", str(DEFAULT), "--out", str(o)],
                            capture_output=True).returncode for o in outs]
    names = sorted(p.name for p in outs[0].iterdir())
    same = names == sorted(p.name for p in outs[1].iterdir()) and all(
        (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names)
    report(13, codes == [0, 0] and same, f"exit codes {codes}, {len(names)} files byte-identical: {same}")
