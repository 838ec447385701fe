import csv
import io
import math

import numpy as np
import pytest
from scipy import integrate, special

from gravdec.correlation import (GUARD, CorrelationKernel, estimate_correlation, family_kernel, gamma_one_third,
                                 k_kernel, k_kernel_band, k_kernel_coincident, k_kernel_oracle,
                                 k_kernel_time_integral, k_kernel_time_integral_delta, kernel_prefactor,
                                 single_mode_correlation, white_kernel_integrated)
from gravdec.errors import DivergenceError, DomainError, LightConeError
from gravdec.noise import Ensemble, ModeSet, PowerFamilySpec, build_mode_set
from gravdec.units import CGS, PLANCK

P = kernel_prefactor(PLANCK)


def test_gamma_one_third_precise():
    assert gamma_one_third() == pytest.approx(float(special.gamma(1 / 3)), rel=1e-14)
    assert gamma_one_third() == pytest.approx(2.678938534707747, rel=1e-13)


def test_equal_time_value():
    for r in (0.1, 1.0, 7.0):
        assert k_kernel(r, 0.0) == pytest.approx(gamma_one_third() / (4 * math.pi**2) * 2 * r ** (-4 / 3), rel=1e-14)


def test_far_outside_cone_decays_from_below():
    vals = [k_kernel(1.0, tau) for tau in (10.0, 100.0, 1000.0)]
    assert all(v < 0 for v in vals)
    assert abs(vals[0]) > abs(vals[1]) > abs(vals[2])
    assert abs(vals[2]) < 1e-3


@pytest.mark.parametrize("r,tau", [(1.0, 0.3), (2.0, 1.0), (0.5, 2.0), (3.0, 5.0), (1.0, -0.4)])
def test_kernel_vs_oracle(r, tau):
    assert k_kernel(r, tau) == pytest.approx(k_kernel_oracle(r, tau), rel=1e-6)


def test_time_reversal_symmetry():
    for r, tau in [(1.0, 0.5), (2.0, 3.1)]:
        assert k_kernel(r, tau) == k_kernel(r, -tau)


def test_coincident_limit():
    for tau in (0.5, 2.0):
        assert k_kernel_coincident(tau) < 0
        assert k_kernel(1e-4 * tau, tau) == pytest.approx(k_kernel_coincident(tau), rel=1e-3)
    assert k_kernel_coincident(2.0) / k_kernel_coincident(1.0) == pytest.approx(2 ** (-4 / 3), rel=1e-14)
    with pytest.raises(DivergenceError):
        k_kernel_coincident(0.0)


def test_errors_on_domain_and_cone():
    with pytest.raises(DomainError):
        k_kernel(0.0, 1.0)
    with pytest.raises(LightConeError):
        k_kernel(1.0, 1.0)
    with pytest.raises(LightConeError):
        k_kernel(1.0, 1.0 + 0.5 * GUARD)
    k_kernel(1.0, 1.0 + 10 * GUARD)


def test_sign_change_across_cone():
    assert k_kernel(1.0, 0.99) > 0
    assert k_kernel(1.0, 1.01) < 0


def test_wave_equation_by_finite_differences():
    h = 1e-3
    for r, tau in [(2.0, 0.5), (3.0, 1.0), (1.0, 2.5)]:
        d2t = (k_kernel(r, tau + h) - 2 * k_kernel(r, tau) + k_kernel(r, tau - h)) / h**2
        rc = lambda x: x * k_kernel(x, tau)
        lap = (rc(r + h) - 2 * rc(r) + rc(r - h)) / h**2 / r
        assert d2t == pytest.approx(lap, rel=1e-3)


def test_band_kernel_converges_to_full():
    full = k_kernel(1.0, 0.3)
    assert k_kernel_band(1.0, 0.3, 1e-4, 1e4, PLANCK) == pytest.approx(full, rel=1e-2)


def test_time_integral_quadrature_matches_closed_form():
    for r, t in [(1.0, 0.5), (1.0, 3.0), (2.0, 2.0 + 1e-3)]:
        a = k_kernel_time_integral(r, t)
        q = k_kernel_time_integral(r, t, method="quadrature")
        assert q == pytest.approx(a, rel=1e-8)
    assert k_kernel_time_integral(0.0, 2.0) == pytest.approx(6 * P * 2 ** (2 / 3), rel=1e-14)


def test_time_integral_delta_stable():
    import mpmath as mp

    mp.mp.dps = 50
    Pm = mp.mpf(P)

    def Dm(r, t):
        r, X = mp.mpf(r), mp.mpf(t)
        if r == 0:
            return 6 * Pm * X ** (mp.mpf(2) / 3)
        d = r - X
        return 9 * Pm / (5 * r) * ((r + X) ** (mp.mpf(5) / 3) - 2 * r ** (mp.mpf(5) / 3)
                                   + mp.sign(d) * abs(d) ** (mp.mpf(5) / 3))

    for a, t in [(1e-6, 1.0), (1.0, 1e-6), (1e-9, 1e3), (1.0, 2.0)]:
        ref = float(Dm(0, t) - Dm(a, t))
        assert k_kernel_time_integral_delta(a, t) == pytest.approx(ref, rel=1e-10)


def test_white_kernel():
    assert white_kernel_integrated(2.0, CGS) == pytest.approx(CGS.G * CGS.hbar / 2)
    with pytest.raises(DivergenceError):
        white_kernel_integrated(0.0)
    assert CorrelationKernel("DWhitePotential")(4.0) == 0.25
    assert CorrelationKernel("KColored")(1.0, 0.0) == k_kernel(1.0, 0.0)


def test_estimate_matches_band_kernel():
    ms = build_mode_set(0.01, 10.0, 256, 2 * math.pi / 0.01, seed=1)
    lags = [(1.0, 0.0), (3.0, 0.0), (2.0, 1.0), (2.0, -1.0)]
    est = estimate_correlation(Ensemble(ms, 3000, 2), lags)
    assert np.all(est.stderr > 0)
    z = np.abs(est.values - est.analytic_band) / est.stderr
    assert np.all(z < 3)
    # tau -> -tau
    assert abs(est.values[2] - est.values[3]) < 3 * math.hypot(est.stderr[2], est.stderr[3])
    # r = 1 sits too close to the UV cutoff 1/k_max: the band-limited kernel is 14% low
    assert not est.in_band[0] and est.in_band[1]
    for f, b, ib in zip(est.analytic_full, est.analytic_band, est.in_band):
        assert ib == (abs(b - f) <= 0.02 * abs(f))


def test_single_mode_estimate_pattern():
    kv = np.array([[0.0, 0.0, 1.3]])
    ms = ModeSet(kv, np.array([0.5]), 2 * math.pi / 1.3, 1.3, 1.3, "lattice", "k2", PLANCK, None, False)
    ens = Ensemble(ms, 4000, 5)
    lags = [(0.4, 0.0), (1.0, 0.7), (2.0, 0.1)]
    est = estimate_correlation(ens, lags, direction=(0, 0, 1))
    f2 = 1.3 ** (-5 / 3)
    for (r, tau), v, s in zip(lags, est.values, est.stderr):
        exact = 2 * f2 * 0.5 * math.cos(1.3 * r - 1.3 * tau)
        assert exact == pytest.approx(single_mode_correlation(ens[0], [0, 0, r], tau), rel=1e-12)
        assert abs(v - exact) < 3 * s + 1e-12


def test_stderr_scaling():
    ms = build_mode_set(0.05, 5.0, 16, 2 * math.pi / 0.05, seed=3)
    errs = []
    for n in (100, 1000, 10_000):
        errs.append(estimate_correlation(Ensemble(ms, n, 4), [(1.0, 0.0)], points_per_realization=1).stderr[0])
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(math.sqrt(10), rel=0.2)


def test_estimate_csv_and_workers():
    ms = build_mode_set(0.05, 5.0, 16, 2 * math.pi / 0.05, seed=3)
    a = estimate_correlation(Ensemble(ms, 50, 4), [(1.0, 0.0), (1.0, 0.5)])
    b = estimate_correlation(Ensemble(ms, 50, 4), [(1.0, 0.0), (1.0, 0.5)], workers=3)
    assert a.to_csv() == b.to_csv()
    rows = list(csv.reader(io.StringIO(a.to_csv())))
    assert rows[0] == ["r", "tau", "estimate", "stderr", "n", "in_band"]
    assert len(rows) == 3
    with pytest.raises(DomainError):
        estimate_correlation(Ensemble(ms, 1, 4), [(1.0, 0.0)])


def test_family_kernel_examples():
    sp = PowerFamilySpec(j=-0.5, m=-1, n1=0, n2=0)
    T = 5.0
    vals = {family_kernel(sp, [0, 0, 0], [0, 0, 1.0], t, tp, T) for t, tp in [(0.1, 0.2), (3.0, 4.0), (1.0, 0.0)]}
    assert vals == {1.0 / T}
    asym = PowerFamilySpec(0.0, 0.0, 1.0, 2.0)
    assert family_kernel(asym, 0, 0, 1.0, 2.0, 1.0, R=1.0) != family_kernel(asym, 0, 0, 2.0, 1.0, 1.0, R=1.0)
    sym = PowerFamilySpec(0.0, 0.0, 1.5, 1.5)
    assert family_kernel(sym, 0, 0, 1.0, 2.0, 1.0, R=1.0) == family_kernel(sym, 0, 0, 2.0, 1.0, 1.0, R=1.0)
    sp = PowerFamilySpec(0.0, -0.5, 0.5, 1.0)
    T = 2.0
    dbl = integrate.dblquad(lambda tp, t: family_kernel(sp, 0, 0, t, tp, T, R=1.0), 0, T, 0, T)[0]
    assert dbl == pytest.approx(T ** sp.time_power / (1.5 * 2.0), rel=1e-8)
    with pytest.raises(DomainError):
        family_kernel(sp, 0, 0, -1.0, 1.0, T, R=1.0)
