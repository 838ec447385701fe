"""Worldline-length uncertainty versus length, with and without the closure R = delta s.

Runs a small Monte Carlo ladder in Planck units.  Under closure the log-log
slope should come out near 1/3; with the white-noise source and a fixed probe
radius it is 1/2.

    python demos/bound_scaling.py [--n 400] [--workers 1]
"""

import argparse

import numpy as np

from gravdec.bounds import WorldlineExperiment, k_bound_mc


def show(title, rep):
    print(f"\n{title}: slope {rep.fitted_exponent:.3f}"
          + (f" +- {rep.exponent_stderr:.3f}" if rep.exponent_stderr else "")
          + f", prefactor {rep.fitted_prefactor:.3g}")
    for s, d, R in zip(rep.s_values, rep.delta_s, rep.R_values):
        Rtxt = f"{R:9.3g}" if R else "        -"
        print(f"  s = {s:9.3g}   delta s = {d:9.3g}   R = {Rtxt}   ds^3/(l_p^2 s) = {d**3 / s:7.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400, help="realizations per rung")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    T = list(np.geomspace(1e4, 1e7, 4))
    rep = k_bound_mc(WorldlineExperiment(T, n_realizations=args.n, n_modes=64), "closure", workers=args.workers)
    show("K field, closure R = delta s", rep)

    rep = k_bound_mc(WorldlineExperiment(T, n_realizations=args.n, source="D"), 10.0, workers=args.workers)
    show("white potential, fixed R = 10", rep)


if __name__ == "__main__":
    main()
