"""Command line entry point: `hglk <subcommand> [config.yaml] [--out DIR]`.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 property-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import suites
from .besov import (DyadicBank, besov_b1inf1, japanese_weight, second_difference_norm, weight_scan)
from .commutator import (half_power, prop2_case1_ratio, verify_dyadic_key_estimate,
                         verify_fractional_leibniz, verify_kato_ponce, verify_lipschitz_commutator)
from .config import ConfigError, RunConfig, canonical
from .errors import AssumptionError, ConvergenceError
from .evolve import (empirical_constant, evolve, rescaled_commutator_norms, rescaling_scan,
                     threshold_certificate)
from .grid import Grid, random_bandlimited
from .operator import (check_a3, check_ellipticity, check_form_positivity, lorentz_quasinorm,
                       sobolev_equivalence_report)
from .spectral import (eigendecompose, frac_power_balakrishnan, frac_power_spectral,
                       rule_for_matrix)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SUITE = 0, 2, 3, 4


class Writer:
    """Single writer for all emitted files; keeps the manifest in emission order."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[dict] = []

    def _emit(self, name: str, text: str) -> None:
        data = text.encode()
        (self.root / name).write_bytes(data)
        self.files.append({"path": name, "sha256": hashlib.sha256(data).hexdigest()})

    def json(self, name: str, obj) -> None:
        self._emit(name, json.dumps(canonical(obj), indent=2) + "\n")

    def csv(self, name: str, header, rows, footer: str | None = None) -> None:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([_cell(v) for v in row])
        if footer:
            buf.write(footer + "\n")
        self._emit(name, buf.getvalue())

    def manifest(self, cfg: RunConfig, command: str, extra: dict | None = None) -> None:
        body = {"command": command, "config_sha256": cfg.digest(), "seed": cfg.seed,
                "files": list(self.files)}
        if extra:
            body.update(extra)
        (self.root / "manifest.json").write_text(json.dumps(canonical(body), indent=2) + "\n")


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


# ---------------------------------------------------------------- subcommands

def cmd_spectrum(cfg: RunConfig, out: Writer) -> int:
    op = cfg.operator()
    spec = eigendecompose(op)
    spec.clamped()
    out.csv("eigenvalues.csv", ["index", "eigenvalue"], enumerate(spec.eigenvalues))
    out.json("spectrum.json", {
        "n": op.grid.n, "length": op.grid.length,
        "ellipticity": vars(check_ellipticity(op.coeff)),
        "a3": vars(check_a3(op.coeff, seed=cfg.seed)),
        "form_positivity": vars(check_form_positivity(op)),
        "sobolev_equivalence": vars(sobolev_equivalence_report(op, seed=cfg.seed)),
        "lorentz_quasinorm": lorentz_quasinorm(op.pot),
        "orthonormality_error": spec.orthonormality_error(),
        "reconstruction_error": spec.reconstruction_error(op.matrix),
    })
    return EXIT_OK


def cmd_fracpow(cfg: RunConfig, out: Writer) -> int:
    op = cfg.operator()
    s, nodes = float(cfg.frac.s), int(cfg.frac.quad_nodes)
    ref = frac_power_spectral(eigendecompose(op), s)
    rows = []
    for count in (nodes, 2 * nodes):
        rule = rule_for_matrix(op.matrix, s, count, cfg.frac.lo_mult, cfg.frac.hi_mult)
        approx = frac_power_balakrishnan(op, s, rule)
        rows.append(float(np.linalg.norm(approx - ref, 2) / np.linalg.norm(ref, 2)))
    out.json("fracpow.json", {"s": s, "nodes": nodes, "rel_error": rows[0],
                              "rel_error_doubled": rows[1],
                              "doubling_gain": rows[0] / rows[1] if rows[1] > 0 else "inf"})
    return EXIT_OK


def cmd_besov(cfg: RunConfig, out: Writer) -> int:
    grid = cfg.grid_obj
    w = japanese_weight(grid, cfg.sim.weight_a)
    t = np.linspace(1.0, grid.length / 4, 32)
    rows = weight_scan(cfg.scan.a_list, cfg.scan.L_list)
    bands = [(r.a, r.L, j, b, ps, r.verdict) for r in rows
             for (j, b), ps in zip(sorted(r.terms.items()), r.partial_sums)]
    out.csv("weight_scan.csv", ["a", "L", "j", "b_j", "partial_sum", "verdict"], bands)
    out.csv("weight_summary.csv", ["a", "L", "besov_value", "full_value", "partial_sum_tail", "verdict"],
            [(r.a, r.L, r.besov_value, r.full_value, r.partial_sum_tail, r.verdict) for r in rows])
    out.json("besov.json", {
        "weight_a": cfg.sim.weight_a,
        "weight_homogeneous": besov_b1inf1(w, homogeneous=True),
        "weight_inhomogeneous": besov_b1inf1(w, homogeneous=False),
        "weight_second_difference": second_difference_norm(w, t),
    })
    return EXIT_OK


def cmd_commutator(cfg: RunConfig, out: Writer) -> int:
    op = cfg.operator()
    grid = op.grid
    d = half_power(op)
    bank = DyadicBank.build(grid)
    rng = np.random.default_rng(cfg.seed)
    records = []
    for k in range(10):
        f = random_bandlimited(grid, rng)
        r = prop2_case1_ratio(f, op, d, bank)
        records.append({"estimate_id": "prop2_case1", "grid_n": grid.n, "ratio": r["ratio"],
                        "bound_parts": {"besov_term": r["besov_term"],
                                        "potential_term": r["potential_term"],
                                        "lipschitz": r["lipschitz"]}, "seed": cfg.seed, "trial": k})
    L = grid.length
    ladder = [grid, grid.refine(), grid.refine(4)]
    lip = verify_lipschitz_commutator(lambda x: np.sin(2 * np.pi * x / L), ladder)
    for row in lip.refinement:
        records.append({"estimate_id": "lipschitz", "grid_n": row["n"], "ratio": row["ratio"],
                        "bound_parts": {"lipschitz": row["lipschitz"]}, "seed": cfg.seed})
    f = random_bandlimited(grid, rng)
    g = random_bandlimited(grid, rng)
    lb = verify_fractional_leibniz(f, g, 0.5)
    records.append({"estimate_id": "fractional_leibniz", "grid_n": grid.n, "ratio": lb.residual_ratio,
                    "bound_parts": {"residual": lb.residual}, "seed": cfg.seed})
    kp = verify_kato_ponce(f, g, 0.5, 2, np.inf, 2, 2, np.inf)
    records.append({"estimate_id": "kato_ponce", "grid_n": grid.n, "ratio": kp.ratio,
                    "bound_parts": {"numerator": kp.numerator, "denominator": kp.denominator},
                    "seed": cfg.seed})
    for j in bank.bands():
        rep = verify_dyadic_key_estimate(f, op, j, d, bank)
        if rep.skipped:
            continue
        records.append({"estimate_id": "dyadic_key", "grid_n": grid.n, "band": j,
                        "ratio": [rep.ratio6, rep.ratio7],
                        "bound_parts": {"lhs6": rep.lhs6, "lhs7": rep.lhs7, "rhs": rep.rhs6},
                        "seed": cfg.seed})
    out.json("commutator.json", records)
    return EXIT_OK


def _trace_rows(trace):
    return trace.rows()


def cmd_simulate(cfg: RunConfig, out: Writer) -> int:
    sim = cfg.simulation()
    op = sim.operator()
    w = sim.weight()
    C, source = empirical_constant(op, w, seed=cfg.seed)
    u0 = sim.initial()
    cert = threshold_certificate(u0, w, sim.p, C, source)
    trace = evolve(sim, u0, op)
    cert.T_obs = trace.T_obs
    footer = f"# status={trace.status}" + (f" T_obs={trace.T_obs:.12g}" if trace.T_obs is not None else "")
    out.csv("trace.csv", list(trace.COLUMNS), _trace_rows(trace), footer)
    out.json("certificate.json", cert.to_json())
    out.json("simulation.json", {"status": trace.status, "T_obs": trace.T_obs, "A_emp": trace.A_emp,
                                 "B": trace.B, "inequality_fraction": trace.inequality_fraction(),
                                 "recorded_steps": len(trace.times)})
    return EXIT_OK


def cmd_blowup_scan(cfg: RunConfig, out: Writer) -> int:
    sim = cfg.simulation()
    op = sim.operator()
    w = sim.weight()
    C, source = empirical_constant(op, w, seed=cfg.seed)
    unit = threshold_certificate(sim.initial(), w, sim.p, C, source)
    m_star = sim.amplitude * np.sqrt(unit.rhs / unit.lhs)
    rows = []
    for factor in cfg.scan.amplitude_factors:
        sim.amplitude = float(factor * m_star)
        u0 = sim.initial()
        cert = threshold_certificate(u0, w, sim.p, C, source)
        trace = evolve(sim, u0, op)
        rows.append((factor, sim.amplitude, cert.lhs, cert.rhs, int(cert.predicted),
                     cert.t_bound if cert.t_bound is not None else "none", trace.status,
                     trace.T_obs if trace.T_obs is not None else "none"))
    out.csv("amplitude_sweep.csv", ["factor", "amplitude", "lhs", "rhs", "predicted", "t_bound",
                                    "status", "T_obs"], rows)
    L0 = float(cfg.grid.length)
    base = Grid(cfg.grid.n, L0)
    norms = rescaled_commutator_norms(suites.rescaling_build(L0), base, cfg.scan.R_list, sim.weight_a)
    wb = np.asarray(japanese_weight(base, sim.weight_a).samples)
    inv_l2 = float(np.sqrt(base.spacing * np.sum(wb**-2.0)))
    table, slopes = [], {}
    for p in cfg.scan.powers:
        scan, slope = rescaling_scan(norms, inv_l2, float(p))
        slopes[str(p)] = {"fitted": slope, "predicted": -1.0 + (float(p) - 1.0) / 2.0}
        table += [(p, r.R, r.A_emp, r.B, r.ratio) for r in scan]
    out.csv("rescaling.csv", ["p", "R", "A_emp", "B", "ratio"], table)
    out.json("blowup_scan.json", {"M_star": m_star, "C_emp": C, "C_source": source, "slopes": slopes})
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Writer) -> tuple[int, dict]:
    results = []
    for suite in suites.ALL:
        kwargs = {"seed": cfg.seed} if "seed" in suite.__code__.co_varnames else {}
        results.append(suite(**kwargs))
    out.json("verify.json", [r.to_json() for r in results])
    summary = {"suites": [{"name": r.name, "passed": r.passed, "pass_count": r.count, "total": r.total}
                          for r in results]}
    return (EXIT_OK if all(r.passed for r in results) else EXIT_SUITE), summary


COMMANDS = {"spectrum": cmd_spectrum, "fracpow": cmd_fracpow, "besov": cmd_besov,
            "commutator": cmd_commutator, "simulate": cmd_simulate,
            "blowup-scan": cmd_blowup_scan, "verify": cmd_verify}


def _fail(code: int, kind: str, problems) -> int:
    sys.stderr.write(json.dumps({"error": kind, "exit_code": code, "problems": list(problems)}) + "\n")
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hglk", description=__doc__.splitlines()[0])
    parser.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    parser.add_argument("config", nargs="?", help="YAML config (defaults built in when omitted)")
    parser.add_argument("--out", help="override output.dir")
    args = parser.parse_args(argv)
    if args.command not in COMMANDS:
        return _fail(EXIT_CONFIG, "unknown subcommand", [f"unknown subcommand {args.command!r}"])
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig.from_dict({})
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc.problems)
    if args.out:
        cfg.output.dir = args.out
    out = Writer(Path(cfg.output.dir))
    try:
        result = COMMANDS[args.command](cfg, out)
    except (AssumptionError, ValueError) as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, [str(exc)])
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, [str(exc)])
    code, extra = result if isinstance(result, tuple) else (result, None)
    out.manifest(cfg, args.command, extra)
    print(json.dumps({"command": args.command, "exit_code": code, "output": str(out.root)}))
    return code


if __name__ == "__main__":
    sys.exit(main())
