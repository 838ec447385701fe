"""Localization lengths and times for the two noise models, side by side.

Prints the solved a_c and tau_c next to the dimensional estimates for a proton
and for a 1 cm ball of unit density, then the K-model transition point.

    python demos/localization_table.py [--density 1.0] [--radius 1.0]
"""

import argparse

from gravdec.decoherence import PointMass, UniformBall, dimensional_estimates, solve_localization, transition_point
from gravdec.units import CGS, PROTON_MASS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--density", type=float, default=1.0, help="g/cm^3")
    ap.add_argument("--radius", type=float, default=1.0, help="ball radius, cm")
    ap.add_argument("--proton-radius", type=float, default=1e-13)
    args = ap.parse_args()

    ball = UniformBall.from_density(args.density, args.radius)
    rows = [("K", "proton", PointMass(PROTON_MASS), 0.0),
            ("K", "ball", ball, args.radius),
            ("D", "proton", UniformBall(PROTON_MASS, args.proton_radius), args.proton_radius),
            ("D", "ball", ball, args.radius)]

    print(f"{'model':5s} {'body':7s} {'a_c [cm]':>11s} {'tau_c [s]':>11s} {'regime':>8s} {'estimate':>11s}")
    for model, name, d, R in rows:
        res = solve_localization(model, d)
        est = dimensional_estimates(model, d.total_mass, R, CGS)[res.regime]
        est = float(est) if est is not None else float("nan")
        print(f"{model:5s} {name:7s} {res.a_c:11.3e} {res.tau_c:11.3e} {res.regime:>8s} {est:11.3e}")

    # the K exact prefactor: for a point mass a_c ~ 726 hbar^2/(G m^3), not 1x
    tp = transition_point(args.density)
    print(f"\ntransition at density {args.density:g}: a_tr = {tp.a_tr:.3e} cm, m_tr = {tp.m_tr:.3e} g, "
          f"tau_tr = {tp.tau_tr:.3e} s")


if __name__ == "__main__":
    main()
