"""Phase variance against master-equation evolution for both models.

D model: Markovian decay rates divided by the phase-variance rates give one
constant (pi^2 / 2 in our convention) at every separation.  K model: the
recoil-free non-Markovian evolution tracks -Var/2.

    python demos/method_comparison.py
"""

import math

import numpy as np

from gravdec.decoherence import UniformBall, d_phase_variance, k_phase_variance
from gravdec.master import DensityMatrixGrid, d_decoherence_functional, evolve_markovian, evolve_nonmarkovian_k
from gravdec.units import PLANCK


def main():
    d = UniformBall(3.0, 1.0)
    x = np.linspace(0.0, 3.0, 7)
    st = DensityMatrixGrid.uniform(x, d)

    L = d_decoherence_functional(x, d, PLANCK)
    n, dt = 500, 0.02 / L.Lambda.max()
    out = evolve_markovian(st, L, "none", dt, n, PLANCK)
    t = n * dt
    print("D model, Markovian vs phase variance")
    for j in range(1, len(x)):
        rate = -math.log(abs(out.rho[0, j] / st.rho[0, j])) / t
        pv = d_phase_variance(d, x[j], t, PLANCK) / (math.pi**2 * t)
        print(f"  a = {x[j]:4.1f}   rate ratio = {rate / pv:.6f}")
    print(f"  pi^2/2       = {math.pi**2 / 2:.6f}")

    tf = 5.0
    outk = evolve_nonmarkovian_k(st, d, "none", tf, 0.01, PLANCK)
    print(f"\nK model at t = {tf}, ln|rho/rho0| vs -Var/2")
    for j in range(1, len(x)):
        lhs = math.log(abs(outk.rho[0, j] / st.rho[0, j]))
        rhs = -0.5 * k_phase_variance(d, x[j], tf, constants=PLANCK)
        print(f"  a = {x[j]:4.1f}   {lhs: .6e}   {rhs: .6e}   rel {abs(lhs / rhs - 1):.1e}")
    print(f"  refinement change {outk.diagnostics.get('refinement_change', 0):.1e}")


if __name__ == "__main__":
    main()
