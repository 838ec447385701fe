import math

import numpy as np
import pytest
from scipy import integrate, special

from gravdec.decoherence import (BALL_J, THRESHOLD, Composite, Gaussian, PointMass, UniformBall, classify_regime,
                                 d_decay_rate, d_delta, d_phase_variance, density_value, form_factor,
                                 k_phase_variance, k_phase_variance_mc, k_phase_variance_xspace, mass_integral,
                                 mutual_energy, dimensional_estimates, phase_variance_curve, scaling_survey,
                                 solve_localization, transition_point)
from gravdec.errors import DomainError, OutOfRangeError, RegularizationError
from gravdec.noise import build_mode_set
from gravdec.units import CGS, PLANCK, PROTON_MASS, UnitSystem

h, G = CGS.hbar, CGS.G


# ---------------------------------------------------------------------------
# densities


def test_form_factor_normalization():
    for d in (PointMass(2.0), UniformBall(2.0, 0.3), Gaussian(2.0, 0.3)):
        assert form_factor(d, 0.0) == pytest.approx(2.0, rel=1e-15)
        ks = np.linspace(0, 50, 200)
        assert np.all(np.abs(form_factor(d, ks)) <= 2.0 * (1 + 1e-15))


def test_ball_form_factor_taylor():
    d = UniformBall(1.0, 1.0)
    for u in (1e-3, 1e-2):
        assert form_factor(d, u) == pytest.approx(1 - u**2 / 10 + u**4 / 280, rel=1e-12)
    u = 2.7
    assert form_factor(d, u) == pytest.approx(3 * (math.sin(u) - u * math.cos(u)) / u**3, rel=1e-13)


def test_gaussian_half_point():
    d = Gaussian(3.0, 0.4)
    assert form_factor(d, math.sqrt(2 * math.log(2)) / 0.4) == pytest.approx(1.5, rel=1e-14)


def test_composite_form_factor():
    c = Composite(((PointMass(1.0), (0, 0, 0)), (PointMass(2.0), (0, 0, 1.0))))
    assert c.total_mass == 3.0
    assert form_factor(c, [0, 0, math.pi]) == pytest.approx(1.0 - 2.0)
    assert abs(form_factor(c, [0, 0, 1.0])) <= 3.0


def test_mass_integral():
    for d in (UniformBall(2.5, 0.7), Gaussian(1.3, 2.0)):
        assert mass_integral(d) == pytest.approx(d.total_mass, rel=1e-8)
    with pytest.raises(DomainError):
        density_value(PointMass(1.0), 0.0)


# ---------------------------------------------------------------------------
# K model variance


def test_k_variance_zero_separation():
    for t in (0.1, 10.0):
        assert k_phase_variance(UniformBall(1.0, 1.0), 0.0, t, constants=PLANCK) == 0.0


def test_k_variance_xspace_crosscheck():
    d = PointMass(1.0)
    for a, t in [(1.0, 0.3), (1.0, 5.0), (3.0, 3.5)]:
        k = k_phase_variance(d, a, t, constants=PLANCK)
        assert k_phase_variance_xspace(d, a, t, PLANCK) == pytest.approx(k, rel=1e-6)
        assert k_phase_variance_xspace(d, a, t, PLANCK, method="quadrature") == pytest.approx(k, rel=1e-6)


def test_k_variance_vs_monte_carlo():
    band = (0.05, 5.0)
    ms = build_mode_set(*band, 96, 2 * math.pi / band[0], seed=1, measure="log")
    rng = np.random.default_rng(3)
    shapes = [UniformBall(1.0, 0.5), Gaussian(2.0, 0.4), PointMass(1.0)]
    for i in range(10):
        d = shapes[i % 3]
        a, t = rng.uniform(0.3, 4.0), rng.uniform(0.5, 6.0)
        mc, se = k_phase_variance_mc(d, a, t, ms, n_realizations=1000, master_seed=100 + i)
        q = k_phase_variance(d, a, t, band=band, constants=PLANCK)
        assert abs(mc - q) < 3 * se, (d, a, t, mc, q, se)


def test_k_micro_asymptote():
    # ct >> a: Var -> (9/5) P m^2 c^2 a^(2/3) / hbar^2, P = l_p^(4/3) Gamma(1/3) / (4 pi^2)
    m = PROTON_MASS
    res = solve_localization("K", PointMass(m))
    pref = (20 * math.pi**4 / (9 * special.gamma(1 / 3))) ** 1.5
    assert res.a_c == pytest.approx(pref * h * h / (G * m**3), rel=2e-3)
    assert res.regime == "micro"


@pytest.mark.xfail(strict=True, reason="exact prefactor puts the crossing ~726 hbar^2/(G m^3), not within 3x")
def test_k_point_crossing_near_hbar2_over_gm3():
    m = PROTON_MASS
    res = solve_localization("K", PointMass(m))
    assert 1 / 3 <= res.a_c / (h * h / (G * m**3)) <= 3


def test_k_macro_asymptote():
    d = UniformBall.from_density(1.0, 1.0)
    M, R = d.total_mass, d.R
    ff = lambda u: 3 * (math.sin(u) - u * math.cos(u)) / u**3
    J = integrate.quad(lambda u: u ** (1 / 3) * ff(u) ** 2, 0, 200, limit=2000)[0]
    J += 4.5 * 3 / 8 * 200 ** (-8 / 3)  # tail: <ff^2> ~ 9 / (2 u^4)
    assert BALL_J == pytest.approx(J, rel=1e-3)
    pref = CGS.c**2 * CGS.l_p ** (4 / 3) * M**2 / (math.pi**2 * h**2)
    a_pred = math.sqrt(6 * THRESHOLD * R ** (4 / 3) / (pref * BALL_J))
    res = solve_localization("K", d)
    assert res.a_c == pytest.approx(a_pred, rel=2e-3)
    assert res.regime == "macro"


# ---------------------------------------------------------------------------
# D model


def test_d_variance_basic():
    d = UniformBall(2.0, 0.5)
    assert d_phase_variance(d, 0.0, 3.0) == 0.0
    v1 = d_phase_variance(d, 0.3, 1.0, PLANCK)
    assert d_phase_variance(d, 0.3, 2.0, PLANCK) == pytest.approx(2 * v1, rel=1e-15)
    for a in (1.0, 1.7, 10.0):
        assert d_delta(d, a) == pytest.approx(2 * (1.2 * 4 / 0.5 - 4 / a), rel=1e-14)
    assert d_decay_rate(d, 0.3, PLANCK) == pytest.approx(0.5 * v1, rel=1e-14)


def test_d_delta_kspace_matches_closed():
    for d in (UniformBall(1.0, 1.0), Gaussian(1.0, 0.5)):
        for a in (0.01, 0.5, 3.0):
            assert d_delta(d, a, "kspace") == pytest.approx(d_delta(d, a, "closed"), rel=1e-7)


def test_ball_mutual_energy_oracle():
    # W(a) by direct 6-D Monte Carlo for overlapping balls
    rng = np.random.default_rng(0)
    n = 400_000

    def pts():
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        return v * rng.random(n)[:, None] ** (1 / 3)

    a = 0.8
    x, y = pts(), pts() + np.array([a, 0, 0])
    inv = 1 / np.linalg.norm(x - y, axis=1)
    assert mutual_energy(UniformBall(1.0, 1.0), a) == pytest.approx(inv.mean(), abs=4 * inv.std() / math.sqrt(n))


def test_d_point_mass_needs_radius():
    with pytest.raises(RegularizationError):
        d_phase_variance(PointMass(1.0), 1.0, 1.0)


def test_d_asymptotes():
    m, R = PROTON_MASS, 1e-13
    res = solve_localization("D", UniformBall(m, R))
    assert res.a_c == pytest.approx(math.pi * h * math.sqrt(5 * R / (12 * G * m**3)), rel=2e-3)
    d = UniformBall.from_density(1.0, 1.0)
    res = solve_localization("D", d)
    assert res.a_c == pytest.approx((math.pi**2 * h * h / (G * d.total_mass**3)) ** 0.25, rel=2e-3)


# ---------------------------------------------------------------------------
# solver and surveys


def test_closure_and_residual():
    for model, d in [("K", UniformBall(1e-12, 1e-4)), ("D", Gaussian(1e-12, 1e-4))]:
        r = solve_localization(model, d)
        assert r.tau_c == pytest.approx(d.total_mass * r.a_c**2 / h, rel=1e-10)
        assert abs(r.residual) < 1e-3
        assert r.as_dict()["model"] == model


def test_out_of_range():
    with pytest.raises(OutOfRangeError):
        solve_localization("D", UniformBall(1.0, 1.0), a_range=(1e-30, 1e-25))


def test_classify_regime():
    assert classify_regime(PROTON_MASS, 1e-13) == "micro"
    assert classify_regime(4.0, 1.0) == "macro"
    tp = transition_point(1.0)
    assert classify_regime(tp.m_tr, tp.a_tr) == "transition"


def test_transition_self_consistency():
    tp = transition_point(1.0)
    est = dimensional_estimates("K", tp.m_tr, tp.a_tr)
    assert float(est["micro"]) == pytest.approx(float(est["macro"]), rel=1e-6)
    assert float(est["micro"]) == pytest.approx(tp.a_tr, rel=1e-6)
    assert tp.tau_tr == pytest.approx(tp.m_tr * tp.a_tr**2 / h, rel=1e-10)


def test_transition_density_exponent():
    # substitute m = rho (4 pi / 3) R^3 and a_c = R into the macro law: R^10 ~ rho^-3
    rhos = np.geomspace(0.1, 100, 7)
    a = [transition_point(r).a_tr for r in rhos]
    slope = np.polyfit(np.log(rhos), np.log(a), 1)[0]
    assert slope == pytest.approx(-0.3, abs=1e-10)


def test_survey_split_regime_and_errors():
    s = scaling_survey("D", "ball", list(np.geomspace(1e-6, 1e2, 5)), "radius", mass=1e-15)  # crosses R ~ 2e-2
    assert "split-regime" in s.warnings[0]
    assert s.per_regime
    with pytest.raises(DomainError):
        scaling_survey("D", "ball", [1.0, 2.0, 3.0], "radius", mass=1.0)
    with pytest.raises(DomainError):
        scaling_survey("K", "point", list(np.geomspace(1, 1e3, 4)), "radius", mass=1.0)


def test_unit_system_invariance_of_solver():
    for model, d in [("D", UniformBall.from_density(1.0, 1.0)), ("K", UniformBall.from_density(1.0, 1.0)),
                     ("D", UniformBall(PROTON_MASS, 1e-13))]:
        u = UnitSystem.scaled(CGS)
        ds = UniformBall(d.m / CGS.m_p, d.R / CGS.l_p)
        a = solve_localization(model, d)
        b = solve_localization(model, ds, units=u)
        assert b.a_c * CGS.l_p == pytest.approx(a.a_c, rel=1e-8)
        assert b.tau_c * CGS.t_p == pytest.approx(a.tau_c, rel=1e-8)


# ---------------------------------------------------------------------------
# variance surface properties


def _grid(model, d, n):
    A, T = np.geomspace(1e-3, 10, n), np.geomspace(1e-2, 100, n)
    # grid steps are >= 7% apart, so 1e-6 quadrature accuracy is ample
    f = (lambda a, t: k_phase_variance(d, a, t, constants=PLANCK, rel=1e-6)) if model == "K" else \
        (lambda a, t: d_phase_variance(d, a, t, PLANCK))
    return np.array([[f(a, t) for t in T] for a in A])


@pytest.mark.parametrize("model", ["K", "D"])
def test_variance_surface_nonnegative_and_monotone_in_a(model):
    # the smooth Gaussian carries the full 20 x 20 grid; ball form-factor wiggles make its grid costly
    for d, n in [(Gaussian(1.0, 0.5), 20), (UniformBall(1.0, 1.0), 8)]:
        V = _grid(model, d, n)
        assert np.all(V > 0)
        assert np.all(np.diff(V, axis=0) >= 0)
        assert phase_variance_curve(model, d, [0.0], [1.0], PLANCK).variance[0, 0] == 0.0


def test_d_variance_monotone_in_t():
    V = _grid("D", Gaussian(1.0, 0.5), 20)
    assert np.all(np.diff(V, axis=1) > 0)


@pytest.mark.xfail(strict=True, reason="colored kernel: Var(a, t) overshoots near ct ~ a and relaxes, dips up to ~7%")
def test_k_variance_monotone_in_t():
    V = _grid("K", Gaussian(1.0, 0.5), 12)
    assert np.all(np.diff(V, axis=1) >= 0)
