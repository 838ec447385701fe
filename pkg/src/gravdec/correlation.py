"""Two-point kernels of the metric field, their time integrals, and ensemble estimators."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ._numerics import _quad, jackknife, parallel_map, rng_for
from .errors import DivergenceError, DomainError, LightConeError
from .noise import _S_POINTS, FieldRealization, PowerFamilySpec, sample_gamma
from .units import PLANCK, PhysicalConstants

__all__ = [
    "gamma_one_third",
    "kernel_prefactor",
    "light_cone_guard",
    "k_kernel",
    "k_kernel_coincident",
    "k_kernel_band",
    "k_kernel_oracle",
    "k_kernel_time_integral",
    "k_kernel_time_integral_delta",
    "white_kernel_integrated",
    "single_mode_correlation",
    "CorrelationKernel",
    "CorrelationEstimate",
    "estimate_correlation",
    "family_kernel",
]

GUARD = 1e-6


@lru_cache(maxsize=1)
def gamma_one_third() -> float:
    return float(special.gamma(1.0 / 3.0))


def kernel_prefactor(constants: PhysicalConstants = PLANCK) -> float:
    """l_p^(4/3) Gamma(1/3) / (4 pi^2)."""
    return constants.l_p ** (4.0 / 3.0) * gamma_one_third() / (4.0 * math.pi**2)


def light_cone_guard(r: float, ctau: float) -> float:
    return GUARD * max(r, ctau)


def k_kernel(r, tau, constants: PhysicalConstants = PLANCK):
    """<gamma(x, t) gamma(x', t')> for |x - x'| = r > 0 and t - t' = tau, off the light cone.

    (P / r) [ (r + c|tau|)^(-1/3) + sign(r - c|tau|) |r - c|tau||^(-1/3) ],  P = kernel_prefactor.
    """
    r_a = np.asarray(r, dtype=float)
    ct = constants.c * np.abs(np.asarray(tau, dtype=float))
    r_a, ct = np.broadcast_arrays(r_a, ct)
    if np.any(r_a <= 0):
        raise DomainError("k_kernel needs r > 0; use k_kernel_coincident for r = 0")
    d = r_a - ct
    if np.any(np.abs(d) <= GUARD * np.maximum(r_a, ct)):
        raise LightConeError("point inside the light-cone guard band; integrate through it instead")
    val = kernel_prefactor(constants) / r_a * ((r_a + ct) ** (-1.0 / 3.0) + np.sign(d) * np.abs(d) ** (-1.0 / 3.0))
    return float(val) if val.ndim == 0 else val


def k_kernel_coincident(tau, constants: PhysicalConstants = PLANCK):
    """r -> 0 limit: -(2/3) P (c|tau|)^(-4/3)."""
    ct = constants.c * np.abs(np.asarray(tau, dtype=float))
    if np.any(ct == 0):
        raise DivergenceError("equal-point equal-time variance is UV divergent; smear the density")
    val = -(2.0 / 3.0) * kernel_prefactor(constants) * ct ** (-4.0 / 3.0)
    return float(val) if val.ndim == 0 else val


def _sin_power_integral(omega: float, k_lo: float, k_hi: float) -> float:
    """int_{k_lo}^{k_hi} k^(-2/3) sin(omega k) dk."""
    if omega == 0.0 or k_hi <= k_lo:
        return 0.0
    s = 1.0 if omega > 0 else -1.0
    w = abs(omega)
    f = lambda k: k ** (-2.0 / 3.0)
    # the k^(-2/3) endpoint singularity is harmless for QAWO away from k = 0; split off [0, 1/w]
    edges = [k_lo]
    k1 = min(k_hi, 1.0 / w)
    if k_lo < k1:
        edges.append(k1)
    while edges[-1] < k_hi:
        # decade panels keep QAWO well conditioned over long ranges
        edges.append(min(k_hi, 10.0 * edges[-1]) if edges[-1] > 0 else k_hi)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if a == 0.0:
            # u = k^(1/3): k^(-2/3) dk = 3 du
            total += _quad(lambda u: 3.0 * math.sin(w * u**3), 0.0, b ** (1.0 / 3.0), epsrel=1e-12)[0]
        else:
            total += _quad(f, a, b, weight="sin", wvar=w, limit=2000, epsrel=1e-12)[0]
    return s * total


def k_kernel_band(r: float, tau: float, k_min: float, k_max: float, constants: PhysicalConstants = PLANCK) -> float:
    """Kernel of the field restricted to k_min <= |k| <= k_max (what a finite mode sum estimates).

    (l_p^(4/3) / (2 pi^2 r)) int k^(-2/3) [sin(k(r + c tau)) + sin(k(r - c tau))] dk; r = 0 uses the
    sinc limit directly.
    """
    lp43 = constants.l_p ** (4.0 / 3.0)
    ct = constants.c * abs(tau)
    if r == 0:
        return lp43 / math.pi**2 * _quad(lambda k: k ** (1.0 / 3.0), k_min, k_max, weight="cos", wvar=ct,
                                         limit=2000, epsrel=1e-12)[0]
    s = _sin_power_integral(r + ct, k_min, k_max) + _sin_power_integral(r - ct, k_min, k_max)
    return lp43 / (2.0 * math.pi**2 * r) * s


def k_kernel_oracle(r: float, tau: float, constants: PhysicalConstants = PLANCK, dps: int = 30) -> float:
    """Independent arbitrary-precision quadrature of (l_p^(4/3)/(pi^2 r)) int_0^inf k^(-2/3) sin(kr) cos(kc tau) dk.

    The product is split into two sines.  The first half period goes to tanh-sinh
    quadrature (it absorbs the k^(-2/3) endpoint), the rest is summed period by
    period by mpmath.quadosc with its series acceleration.
    """
    import mpmath as mp

    with mp.workdps(dps):
        ct = mp.mpf(constants.c) * abs(mp.mpf(tau))
        rr = mp.mpf(r)
        total = mp.mpf(0)
        for om in (rr + ct, rr - ct):
            if om == 0:
                continue
            w = abs(om)
            f = lambda k: k ** (-mp.mpf(2) / 3) * mp.sin(w * k)
            # tanh-sinh takes the integrable k = 0 singularity, quadosc the oscillating tail
            p1 = mp.pi / w
            val = mp.quad(f, [0, p1]) + mp.quadosc(f, [p1, mp.inf], omega=w)
            total += mp.sign(om) * val
        lp43 = mp.mpf(constants.l_p) ** (mp.mpf(4) / 3)
        return float(lp43 / (2 * mp.pi**2 * rr) * total)


def k_kernel_time_integral(r: float, t: float, constants: PhysicalConstants = PLANCK,
                           method: str = "analytic") -> float:
    """D(r, t) = int_0^t int_0^t C(r, t1 - t2) dt1 dt2.

    analytic:   (9P / (5 c^2 r)) [ (r+ct)^(5/3) - 2 r^(5/3) + sign(r-ct) |r-ct|^(5/3) ],  D(0,t) = 6P (ct)^(2/3)/c^2
    quadrature: 2 int_0^t (t - tau) C(r, tau) dtau with u = |r - c tau|^(2/3) across the light cone.
    """
    if t < 0 or r < 0:
        raise DomainError("need r >= 0 and t >= 0")
    c = constants.c
    P = kernel_prefactor(constants)
    X = c * t
    if t == 0:
        return 0.0
    if method == "analytic":
        if r == 0:
            return 6.0 * P * X ** (2.0 / 3.0) / c**2
        d = r - X
        br = (r + X) ** (5.0 / 3.0) - 2.0 * r ** (5.0 / 3.0) + math.copysign(abs(d) ** (5.0 / 3.0), d)
        return 9.0 * P / (5.0 * c**2 * r) * br
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")
    if r == 0:
        raise DivergenceError("coincident kernel is not integrable at tau = 0; use the analytic limit")
    # smooth part
    smooth = _quad(lambda tau: (t - tau) * (r + c * tau) ** (-1.0 / 3.0), 0.0, t, epsrel=1e-12)[0]
    tau0 = r / c
    sing = 0.0
    # inside the cone region tau < tau0: +(r - c tau)^(-1/3)
    top = min(t, tau0)
    u_lo = max(r - c * top, 0.0) ** (2.0 / 3.0)
    u_hi = r ** (2.0 / 3.0)
    g_in = lambda u: 1.5 / c * (t - (r - u**1.5) / c)
    sing += _quad(g_in, u_lo, u_hi, epsrel=1e-12)[0]
    if t > tau0:
        g_out = lambda u: -1.5 / c * (t - (r + u**1.5) / c)
        sing += _quad(g_out, 0.0, (X - r) ** (2.0 / 3.0), epsrel=1e-12)[0]
    return 2.0 * P / r * (smooth + sing)


def _binom(p: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= (p - i) / (i + 1)
    return out


_B53 = [_binom(5.0 / 3.0, k) for k in range(80)]


def k_kernel_time_integral_delta(a: float, t: float, constants: PhysicalConstants = PLANCK) -> float:
    """D(0, t) - D(a, t) without the cancellation of the closed form when a and ct are far apart."""
    if a < 0 or t < 0:
        raise DomainError("need a >= 0 and t >= 0")
    if a == 0 or t == 0:
        return 0.0
    c = constants.c
    pp = 9.0 * kernel_prefactor(constants) / (5.0 * c**2)
    X = c * t
    if a < X:
        x = a / X
        if x < 0.3:
            # 10/3 - delta/x with delta = (1+x)^(5/3) - (1-x)^(5/3) = 2 sum_{k odd} C(5/3,k) x^k
            s = -2.0 * math.fsum(_B53[k] * x ** (k - 1) for k in range(3, 80, 2))
        else:
            s = 10.0 / 3.0 - ((1 + x) ** (5.0 / 3.0) - (1 - x) ** (5.0 / 3.0)) / x
        return pp * (X ** (2.0 / 3.0) * s + 2.0 * a ** (2.0 / 3.0))
    y = X / a
    if y < 0.3:
        eps = 2.0 * math.fsum(_B53[k] * y**k for k in range(2, 80, 2))
    else:
        eps = (1 + y) ** (5.0 / 3.0) + (1 - y) ** (5.0 / 3.0) - 2.0
    return pp * (10.0 / 3.0 * X ** (2.0 / 3.0) - a ** (2.0 / 3.0) * eps)


def white_kernel_integrated(r, constants: PhysicalConstants = PLANCK):
    """Time-integrated potential correlation G hbar / r of the white-noise model."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DivergenceError("G hbar / r diverges at r = 0; use a cell- or ball-averaged value")
    val = constants.G * constants.hbar / r
    return float(val) if val.ndim == 0 else val


def single_mode_correlation(realization: FieldRealization, dx, tau: float) -> float:
    """Exact ensemble correlation of a fixed-vector mode set: sum (A^2/2) cos(k.dx - omega tau)."""
    kv, om, amp, _ = realization.arrays()
    dx = np.asarray(dx, dtype=float)
    return float(np.sum(0.5 * amp**2 * np.cos(kv @ dx - om * tau)))


@dataclass(frozen=True)
class CorrelationKernel:
    """Tagged kernel: 'KColored', 'DWhitePotential' or 'PowerFamily'."""

    variant: str
    constants: PhysicalConstants = PLANCK
    spec: PowerFamilySpec | None = None

    def __call__(self, *args, **kw):
        if self.variant == "KColored":
            return k_kernel(*args, constants=self.constants, **kw)
        if self.variant == "DWhitePotential":
            return white_kernel_integrated(*args, constants=self.constants)
        if self.variant == "PowerFamily":
            return family_kernel(self.spec, *args, **kw)
        raise DomainError(f"unknown kernel variant {self.variant!r}")


# ---------------------------------------------------------------------------
# estimator


@dataclass
class CorrelationEstimate:
    lags: list
    values: np.ndarray
    stderr: np.ndarray
    n_realizations: int
    band: tuple
    in_band: np.ndarray
    analytic_band: np.ndarray = field(default=None)
    analytic_full: np.ndarray = field(default=None)

    COLUMNS = ("r", "tau", "estimate", "stderr", "n", "in_band")

    def rows(self):
        for (r, tau), v, s, ib in zip(self.lags, self.values, self.stderr, self.in_band):
            yield (r, tau, float(v), float(s), self.n_realizations, bool(ib))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r, tau, v, s, n, ib in self.rows():
            w.writerow([f"{r:.17g}", f"{tau:.17g}", f"{v:.17g}", f"{s:.17g}", n, int(ib)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _full_or_nan(r, tau, constants):
    try:
        if r == 0:
            return k_kernel_coincident(tau, constants)
        return k_kernel(r, tau, constants)
    except (LightConeError, DivergenceError):
        return float("nan")


def estimate_correlation(
    ensemble,
    lags: Sequence[tuple[float, float]],
    points_per_realization: int = 8,
    band_tol: float = 0.02,
    direction=None,
    workers: int = 1,
) -> CorrelationEstimate:
    """Product-moment estimate of <gamma(x,t) gamma(x + r n, t + tau)> over an ensemble.

    Base points (and separation directions n, unless ``direction`` is fixed) are
    drawn from each realization's own seed stream.  The field has zero mean, so
    the product moment is unbiased; standard errors are delete-one jackknife over
    realizations.  A lag counts as in band when the band-limited kernel of the mode
    set is within ``band_tol`` of the full analytic kernel.
    """
    reals = list(ensemble)
    if len(reals) < 2:
        raise DomainError("need at least two realizations")
    ms = reals[0].mode_set
    c = ms.constants.c
    lags = [(float(r), float(t)) for r, t in lags]
    npts = int(points_per_realization)
    fixed_dir = None if direction is None else np.asarray(direction, float) / np.linalg.norm(direction)

    def one(real):
        rng = rng_for(real.seed, _S_POINTS)
        x0 = rng.random((npts, 3)) * ms.box_length
        t0 = rng.random(npts) * ms.box_length / c
        if fixed_dir is None:
            ct = 2.0 * rng.random(npts) - 1.0
            ph = 2.0 * math.pi * rng.random(npts)
            st = np.sqrt(1.0 - ct**2)
            n = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
        else:
            n = np.broadcast_to(fixed_dir, (npts, 3))
        g0 = sample_gamma(real, x0, t0)
        out = np.empty(len(lags))
        for i, (r, tau) in enumerate(lags):
            g1 = sample_gamma(real, x0 + r * n, t0 + tau)
            out[i] = math.fsum(g0 * g1) / npts
        return out

    samples = np.array(parallel_map(one, reals, workers))
    vals, errs = [], []
    for i in range(len(lags)):
        v, s = jackknife(samples[:, i])
        vals.append(v)
        errs.append(s)
    cons = ms.constants
    band_vals = np.array([k_kernel_band(r, t, ms.k_min, ms.k_max, cons) for r, t in lags])
    full_vals = np.array([_full_or_nan(r, t, cons) for r, t in lags])
    with np.errstate(invalid="ignore"):
        in_band = np.isfinite(full_vals) & (np.abs(band_vals - full_vals) <= band_tol * np.abs(full_vals))
    return CorrelationEstimate(lags, np.array(vals), np.array(errs), len(reals), (ms.k_min, ms.k_max),
                               in_band, band_vals, full_vals)


# ---------------------------------------------------------------------------
# power family


def family_kernel(spec: PowerFamilySpec, x, xp, t: float, tp: float, T: float, R: float | None = None,
                  P: Callable | None = None) -> float:
    """K^2 P(x, x') T^m t^n1 t'^n2.

    P defaults to R^(2j) when a probe size R is given (its on-diagonal value)
    and to |x - x'|^(2j) otherwise.
    """
    if t < 0 or tp < 0:
        raise DomainError("family kernel is defined on t, t' >= 0")
    if T <= 0:
        raise DomainError("T must be positive")
    if P is not None:
        p = P(x, xp)
    elif R is not None:
        p = R ** (2 * spec.j)
    else:
        d = float(np.linalg.norm(np.asarray(x, float) - np.asarray(xp, float)))
        if d == 0 and spec.j < 0:
            raise DivergenceError("|x - x'|^(2j) diverges at coincidence for j < 0")
        p = d ** (2 * spec.j)
    return spec.K_const**2 * p * T**spec.m * t**spec.n1 * tp**spec.n2
