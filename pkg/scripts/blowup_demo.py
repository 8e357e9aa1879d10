"""Amplitude sweep around the certified threshold; prints prediction vs observed blow-up."""
import argparse

import numpy as np

from hglk.evolve import empirical_constant, evolve, threshold_certificate
from hglk.suites import blowup_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--factors", type=float, nargs="+", default=[0.5, 0.9, 1.1, 1.5, 2.0])
    ap.add_argument("--n", type=int, default=128)
    args = ap.parse_args()

    cfg = blowup_config(n=args.n)
    op, w = cfg.operator(), cfg.weight()
    C, src = empirical_constant(op, w)
    unit = threshold_certificate(cfg.initial(), w, cfg.p, C)
    m_star = np.sqrt(unit.rhs / unit.lhs)
    print(f"C_emp={C:.4f} ({src})  M*={m_star:.4f}")
    print(f"{'factor':>7} {'M':>9} {'predicted':>9} {'t_bound':>9} {'status':>10} {'T_obs':>9} {'ineq':>6}")
    for k in args.factors:
        cfg.amplitude = k * m_star
        u0 = cfg.initial()
        cert = threshold_certificate(u0, w, cfg.p, C)
        tr = evolve(cfg, u0, op)
        tb = f"{cert.t_bound:.4f}" if cert.t_bound is not None else "-"
        to = f"{tr.T_obs:.4f}" if tr.T_obs is not None else "-"
        print(f"{k:7.2f} {cfg.amplitude:9.3f} {str(cert.predicted):>9} {tb:>9} {tr.status:>10} {to:>9} "
              f"{tr.inequality_fraction():6.3f}")


if __name__ == "__main__":
    main()
