"""Spacetime-uncertainty bounds: worldline Monte Carlo, probe optimization, averaged potential, power family."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._numerics import ball_form_factor, fit_loglog, jackknife_variance, parallel_map, rng_for, spawn_seeds
from .errors import DomainError, PerturbativityError
from .noise import (
    FieldRealization,
    ModeSet,
    PowerFamilySpec,
    WhiteNoisePotential,
    build_mode_set,
    family_sample_variance,
)
from .units import CGS, PLANCK, PhysicalConstants

__all__ = [
    "WorldlineExperiment",
    "worldline_length",
    "first_order_single_mode",
    "BoundReport",
    "k_bound_mc",
    "ProbeSpec",
    "probe_spec",
    "DUncertainty",
    "d_min_uncertainty",
    "sphere_double_integral",
    "AveragedBound",
    "averaged_potential_bound",
    "FamilyCheck",
    "family_check",
    "family_predicate",
    "family_grid",
]


# ---------------------------------------------------------------------------
# worldlines


def _time_nodes(T: float, omega_max: float, nodes_per_period: int):
    n_pan = max(1, int(math.ceil(omega_max * T / (2.0 * math.pi))))
    x, w = np.polynomial.legendre.leggauss(nodes_per_period)
    edges = np.linspace(0.0, T, n_pan + 1)
    h = 0.5 * np.diff(edges)
    t = ((edges[:-1] + h)[:, None] + h[:, None] * x[None, :]).ravel()
    wt = (h[:, None] * w[None, :]).ravel()
    return t, wt


def _gamma_path(r: FieldRealization, x0, t, smear, amp_scale):
    kv, om, amp, alpha = r.arrays()
    a = amp * amp_scale
    if smear:
        a = a * ball_form_factor(np.sqrt((kv**2).sum(1)) * smear)
    th = kv @ np.asarray(x0, dtype=float) + alpha
    return np.cos(th[None, :] - np.outer(t, om)) @ a


def worldline_length(
    r: FieldRealization,
    x0,
    T: float,
    smear: float | None = None,
    nodes_per_period: int = 12,
    order: str = "exact",
    amp_scale: float = 1.0,
    return_excess: bool = False,
) -> float:
    """s = c int_0^T sqrt(1 + gamma(x0, t)) dt along a static worldline.

    Composite Gauss-Legendre in time, one panel per period of the fastest mode;
    12 nodes per panel resolve a cosine to ~1e-13.  ``order='first'`` integrates
    c (1 + gamma / 2) instead.  ``return_excess`` gives s - cT without cancellation.
    """
    c = r.mode_set.constants.c
    if T <= 0:
        raise DomainError("T must be positive")
    t, w = _time_nodes(T, c * r.mode_set.k_max, nodes_per_period)
    g = _gamma_path(r, x0, t, smear, amp_scale)
    if np.any(np.abs(g) >= 1.0):
        raise PerturbativityError(f"|gamma| reached {np.abs(g).max():.3g}; shrink the band or amplitudes")
    if order == "first":
        exc = 0.5 * g
    elif order == "exact":
        exc = g / (np.sqrt(1.0 + g) + 1.0)
    else:
        raise DomainError(f"unknown order {order!r}")
    ds = c * math.fsum(w * exc)
    return ds if return_excess else c * T + ds


def first_order_single_mode(r: FieldRealization, x0, T: float) -> float:
    """Closed-form (c/2) int_0^T gamma dt for the realization's modes.

    sum (c A / 2 omega) [sin th - sin(th - omega T)].
    """
    kv, om, amp, alpha = r.arrays()
    c = r.mode_set.constants.c
    th = kv @ np.asarray(x0, dtype=float) + alpha
    return c * T + 0.5 * c * math.fsum(amp * (np.sin(th) - np.sin(th - om * T)) / om)


@dataclass
class WorldlineExperiment:
    """Ladder of durations T for static worldlines.

    With ``mode_set`` None every rung gets its own band [alpha / (cT), beta / (cT)]
    of ``n_modes`` log-uniform modes, so cT sits at a fixed place inside the band.
    ``source='D'`` replaces the colored field by the white potential smeared over
    a ball of the probe radius.
    """

    T_values: Sequence[float]
    R: float | None = None
    n_realizations: int = 1000
    mode_set: ModeSet | None = None
    nodes_per_period: int = 12
    n_modes: int = 96
    band_alpha: float = 1e-2
    band_beta: float = 300.0
    master_seed: int = 0
    constants: PhysicalConstants = PLANCK
    source: str = "K"
    amp_scale: float = 1.0
    white_steps: int = 16

    def band_for(self, T: float) -> tuple[float, float]:
        if self.mode_set is not None:
            return self.mode_set.k_min, self.mode_set.k_max
        s = self.constants.c * T
        return self.band_alpha / s, self.band_beta / s

    def mode_set_for(self, T: float, seed: int) -> ModeSet:
        if self.mode_set is not None:
            return self.mode_set
        lo, hi = self.band_for(T)
        return build_mode_set(lo, hi, self.n_modes, 2 * math.pi / lo, constants=self.constants, seed=seed,
                              measure="log")

    def band_flags(self, T: float, R: float | None) -> dict:
        lo, hi = self.band_for(T)
        s = self.constants.c * T
        return {"cT_in_band": bool(1.0 / hi < s < 1.0 / lo),
                "R_in_band": None if not R else bool(1.0 / hi < R < 1.0 / lo)}


@dataclass
class BoundReport:
    s_values: list
    delta_s: list
    delta_s_stderr: list
    n: list
    R_values: list
    fitted_exponent: float
    exponent_stderr: float | None
    fitted_prefactor: float
    residuals: list
    decades: float
    mode: str
    source: str
    warnings: list = field(default_factory=list)
    band_flags: list = field(default_factory=list)
    l_p: float = 1.0

    @property
    def ratio(self) -> list:
        """Delta s^3 / (l_p^2 s) per rung."""
        return [d**3 / (self.l_p**2 * s) for s, d in zip(self.s_values, self.delta_s)]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "delta_s", "n", "exponent", "prefactor"])
        for s, d, n in zip(self.s_values, self.delta_s, self.n):
            w.writerow([f"{s:.17g}", f"{d:.17g}", n, f"{self.fitted_exponent:.17g}", f"{self.fitted_prefactor:.17g}"])
        text = buf.getvalue()
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def summary(self) -> dict:
        return {
            "fitted_exponent": self.fitted_exponent,
            "exponent_stderr": self.exponent_stderr,
            "fitted_prefactor": self.fitted_prefactor,
            "decades": self.decades,
            "mode": self.mode,
            "source": self.source,
            "low_confidence": self.exponent_stderr is None,
            "warnings": self.warnings,
            "ratio_ds3_over_lp2s": self.ratio,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary())


def _white_excess(seed, T, R, steps, constants):
    """s - cT for a static worldline in the smeared white potential (first step grid, exact sqrt)."""
    c = constants.c
    dt = T / steps
    dx = R * (4.0 * math.pi / 3.0) ** (1.0 / 3.0)  # cell ball radius = R
    w = WhiteNoisePotential(dx, (1,), dt, seed=seed, constants=constants)
    phi = np.array([w.field(k)[0] for k in range(steps)])
    g = 2.0 * phi / c**2
    if np.any(np.abs(g) >= 1.0):
        raise PerturbativityError(f"|2 phi / c^2| reached {np.abs(g).max():.3g}")
    return c * dt * math.fsum(g / (np.sqrt(1.0 + g) + 1.0))


def _rung_variance(exp: WorldlineExperiment, T: float, R: float | None, seeds, ms_seed, workers):
    if exp.source == "D":
        if not R:
            raise DomainError("the white-potential source needs a probe radius")
        f = lambda sd: _white_excess(sd, T, R, exp.white_steps, exp.constants)
    elif exp.source == "K":
        ms = exp.mode_set_for(T, ms_seed)
        f = lambda sd: worldline_length(FieldRealization(ms, sd), np.zeros(3), T, R, exp.nodes_per_period,
                                        amp_scale=exp.amp_scale, return_excess=True)
    else:
        raise DomainError(f"unknown source {exp.source!r}")
    x = np.array(parallel_map(f, seeds, workers))
    if x.size < 2:
        # degenerate ensemble: the excess has zero mean at first order, so one
        # draw's square is still an (unbiased, very noisy) variance estimate
        return float(x[0] ** 2) if x.size else 0.0, None, x.size
    if x.size < 3:
        return float(np.var(x, ddof=1)), None, x.size
    v, se = jackknife_variance(x)
    return max(v, 0.0), se, x.size


def k_bound_mc(exp: WorldlineExperiment, smear: float | str | None = "closure", workers: int = 1,
               closure_tol: float = 1e-3, max_iter: int = 30) -> BoundReport:
    """Delta s across the ladder; smear None (unsmeared), a fixed radius, or 'closure' (R = Delta s).

    The closure is a secant iteration on log R using the same realizations at every
    iterate (common random numbers), so it converges to the fixed point of one
    smooth function.
    """
    cons = exp.constants
    lp = cons.l_p
    Ts = [float(T) for T in exp.T_values]
    rung_seeds = spawn_seeds(exp.master_seed, len(Ts))
    s_vals, ds, dse, ns, Rs, flags, warns = [], [], [], [], [], [], []
    mode = "closure" if smear == "closure" else "fixed" if smear else "none"
    for T, rs in zip(Ts, rung_seeds):
        seeds = spawn_seeds(rs, exp.n_realizations)
        ms_seed = int(rng_for(rs, 99).integers(2**62))
        s = cons.c * T
        if mode == "closure":
            def F(lR):
                v, _, _ = _rung_variance(exp, T, math.exp(lR), seeds, ms_seed, workers)
                return 0.5 * math.log(v) - lR if v > 0 else -math.inf

            x0 = math.log(lp ** (2.0 / 3.0) * s ** (1.0 / 3.0))
            f0 = F(x0)
            if not math.isfinite(f0):
                raise DomainError("zero variance: closure R = Delta s has no fixed point")
            x1 = x0 + f0
            f1 = F(x1)
            it = 1
            while abs(x1 - x0) > math.log1p(closure_tol) and it < max_iter:
                if f1 == f0:
                    break
                x0, x1, f0 = x1, x1 - f1 * (x1 - x0) / (f1 - f0), f1
                f1 = F(x1)
                it += 1
            if it >= max_iter:
                warns.append(f"closure did not converge at s={s:.3g}")
            R = math.exp(x1 + f1)  # one more fixed-point step lands on R = Delta s(R)
            v, se, n = _rung_variance(exp, T, R, seeds, ms_seed, workers)
        else:
            R = float(smear) if smear else None
            v, se, n = _rung_variance(exp, T, R, seeds, ms_seed, workers)
        d = math.sqrt(v)
        s_vals.append(s)
        ds.append(d)
        dse.append(None if se is None or d == 0 else se / (2.0 * d))
        ns.append(n)
        Rs.append(R)
        flags.append(exp.band_flags(T, R) if exp.source == "K" else {})
    dec = math.log10(max(s_vals) / min(s_vals)) if len(s_vals) > 1 else 0.0
    if dec < 3:
        warns.append(f"fit spans {dec:.2f} decades of s (< 3)")
    if all(d > 0 for d in ds) and len(ds) >= 2:
        fit = fit_loglog(s_vals, ds)
        slope, se_slope, pref, res = fit.slope, fit.slope_stderr, fit.prefactor, list(fit.residuals)
        if any(e is None for e in dse):
            se_slope = None
            warns.append("low-confidence: too few realizations for standard errors")
    else:
        slope, se_slope, pref, res = float("nan"), None, 0.0, []
        if all(d == 0 for d in ds):
            slope = 0.0
    return BoundReport(s_vals, ds, dse, ns, Rs, slope, se_slope, pref, res, dec, mode, exp.source, warns, flags, lp)


# ---------------------------------------------------------------------------
# probe optimization (white model)


@dataclass(frozen=True)
class ProbeSpec:
    R: float
    T: float
    V: float
    M_opt: float


def probe_spec(R: float, T: float, constants: PhysicalConstants = CGS) -> ProbeSpec:
    if R <= 0 or T <= 0:
        raise DomainError("R and T must be positive")
    return ProbeSpec(R, T, 4.0 * math.pi * R**3 / 3.0, math.sqrt(constants.hbar * R / (constants.G * T)))


@dataclass(frozen=True)
class DUncertainty:
    delta_g: float
    quantum: float
    gravitational: float
    M: float


def d_min_uncertainty(p: ProbeSpec, constants: PhysicalConstants = CGS, M: float | None = None) -> DUncertainty:
    """sqrt(G hbar / (V T)), plus the two competing terms hbar / (M R T) and G M / R^2 at mass M (default M_opt)."""
    M = p.M_opt if M is None else M
    G, h = constants.G, constants.hbar
    return DUncertainty(math.sqrt(G * h / (p.V * p.T)), h / (M * p.R * p.T), G * M / p.R**2, M)


def sphere_double_integral(R: float, method: str = "closed-form", n_pairs: int = 10**7, seed: int = 0,
                           chunk: int = 10**6):
    """int int d^3x d^3x' / |x - x'| over a ball of radius R.

    closed-form: (32 pi^2 / 15) R^5, returned as (value, 0.0).  monte-carlo:
    V^2 <1/|x - x'|> over uniform independent pairs, returned with its standard error.
    """
    if R <= 0:
        raise DomainError("R must be positive")
    if method == "closed-form":
        return 32.0 * math.pi**2 / 15.0 * R**5, 0.0
    if method != "monte-carlo":
        raise DomainError(f"unknown method {method!r}")
    V = 4.0 * math.pi * R**3 / 3.0
    s1, s2, n = [], [], 0
    k = 0
    while n < n_pairs:
        m = min(chunk, n_pairs - n)
        rng = rng_for(seed, k)
        x = _ball_points(rng, m, R)
        y = _ball_points(rng, m, R)
        inv = 1.0 / np.sqrt(((x - y) ** 2).sum(1))
        s1.append(math.fsum(inv))
        s2.append(math.fsum(inv * inv))
        n += m
        k += 1
    mean = math.fsum(s1) / n
    var = math.fsum(s2) / n - mean * mean
    return V * V * mean, V * V * math.sqrt(var / n)


def _ball_points(rng, n, R):
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    r = R * rng.random(n) ** (1.0 / 3.0)
    return v * r[:, None]


@dataclass(frozen=True)
class AveragedBound:
    delta_s2: float
    ratio: float
    double_integral: float
    prefactor: float


def averaged_potential_bound(R: float, T: float, constants: PhysicalConstants = PLANCK) -> AveragedBound:
    """Delta s^2 = (T^2 / c^2) <phi~^2>,  <phi~^2> = hbar G T I / (V^2 T^2),  I = sphere_double_integral.

    ``ratio`` is Delta s^2 R / (l_p^2 s), i.e. Delta s^3 / (l_p^2 s) once R = Delta s;
    ``prefactor`` is I R / V^2 (6/5 for the exact integral).
    """
    if R <= 0 or T <= 0:
        raise DomainError("R and T must be positive")
    c, G, h = constants.c, constants.G, constants.hbar
    V = 4.0 * math.pi * R**3 / 3.0
    I, _ = sphere_double_integral(R)
    phi2 = h * G * T * I / (V**2 * T**2)
    ds2 = T**2 / c**2 * phi2
    s = c * T
    return AveragedBound(ds2, ds2 * R / (constants.l_p**2 * s), I, I * R / V**2)


# ---------------------------------------------------------------------------
# power family


def family_predicate(spec: PowerFamilySpec) -> bool:
    """Algebraic constraint 1 - j = (3/2)(m + n1 + n2 + 2) (n1 = n2 = n gives m + 2n + 2)."""
    return math.isclose(1.0 - spec.j, 1.5 * spec.time_power, rel_tol=1e-12, abs_tol=1e-12)


@dataclass(frozen=True)
class FamilyCheck:
    satisfies_bound: bool
    fitted_exponent: float
    predicate: bool
    s_values: tuple
    delta_s: tuple


def family_check(spec: PowerFamilySpec, s_values: Sequence[float] | None = None,
                 constants: PhysicalConstants = PLANCK, tol: float = 0.02) -> FamilyCheck:
    """Fit the closure exponent of Delta s vs s for a family member and compare with the predicate."""
    if spec.j == 1:
        raise DomainError("j = 1 makes the closure R = Delta s degenerate")
    s_values = list(s_values) if s_values is not None else list(np.logspace(2, 6, 9))
    if math.log10(max(s_values) / min(s_values)) < 3 - 1e-9:
        raise DomainError("need at least 3 decades of s")
    c = constants.c
    out = []
    for s in s_values:
        T = s / c
        F = lambda lR: 0.5 * math.log(family_sample_variance(spec, math.exp(lR), T, constants)) - lR
        x0 = 0.0
        x1 = F(x0)
        f0, f1 = F(x0), F(x1)
        for _ in range(50):
            if abs(x1 - x0) < 1e-12 or f1 == f0:
                break
            x0, x1, f0 = x1, x1 - f1 * (x1 - x0) / (f1 - f0), f1
            f1 = F(x1)
        out.append(math.exp(x1))
    fit = fit_loglog(s_values, out)
    ok = abs(fit.slope - 1.0 / 3.0) <= tol
    return FamilyCheck(ok, fit.slope, family_predicate(spec), tuple(s_values), tuple(out))


def family_grid() -> list[PowerFamilySpec]:
    """20 specs straddling the constraint surface: four j values, time powers at offsets 0, +-1/4, +-1/2."""
    out = []
    ns = (0.0, 0.5, -0.5, 0.0, 1.0)
    for j in (-2.0, -0.5, 0.0, 0.5):
        p0 = (2.0 / 3.0) * (1.0 - j)
        for n, dp in zip(ns, (0.0, 0.25, -0.25, 0.5, -0.5)):
            out.append(PowerFamilySpec(j=j, m=p0 + dp - 2.0 * n - 2.0, n1=n, n2=n, K_const=1.0))
    return out
