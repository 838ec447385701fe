"""Shared numerical helpers: seeding, jackknife, log-log fits, quadrature."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate, stats

from .errors import NumericalError

# ---------------------------------------------------------------------------
# seeding


def spawn_seeds(master_seed: int, n: int) -> list[int]:
    """Derive ``n`` independent 64-bit seeds from one master seed.

    Uses numpy's SeedSequence spawning (a counter-based splittable scheme), so
    the i-th seed depends only on (master_seed, i).
    """
    children = np.random.SeedSequence(int(master_seed)).spawn(int(n))
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for sub-stream ``stream`` of a 64-bit seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream),)))


# ---------------------------------------------------------------------------
# elementary functions without cancellation


def one_minus_sinc(x):
    """1 - sin(x)/x, accurate for small |x|."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    small = ax < 2e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        big = 1.0 - np.sin(x) / np.where(small, 1.0, x)
    x2 = x * x
    series = x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    out = np.where(small, series, big)
    return out if out.ndim else float(out)


def sinc(x):
    """sin(x)/x with sinc(0) = 1 (unnormalized)."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def one_minus_cos(x):
    """1 - cos(x) computed as 2 sin^2(x/2)."""
    s = np.sin(np.asarray(x, dtype=float) / 2.0)
    return 2.0 * s * s


def ball_form_factor(u):
    """3 (sin u - u cos u) / u^3, the normalized Fourier transform of a uniform ball."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-2
    us = np.where(small, 1.0, u)
    big = 3.0 * (np.sin(us) - us * np.cos(us)) / us**3
    u2 = u * u
    series = 1.0 - u2 / 10.0 + u2 * u2 / 280.0 - u2**3 / 15120.0
    out = np.where(small, series, big)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# statistics


def jackknife(samples: np.ndarray, stat: Callable[[np.ndarray], float] = np.mean) -> tuple[float, float]:
    """Delete-one jackknife estimate and standard error of ``stat`` over axis 0."""
    x = np.asarray(samples)
    n = x.shape[0]
    if n < 2:
        return float(stat(x)), float("nan")
    full = float(stat(x))
    if stat is np.mean:
        # closed form of the delete-one means
        tot = np.sum(x, axis=0)
        loo = (tot - x) / (n - 1)
    else:
        loo = np.array([stat(np.delete(x, i, axis=0)) for i in range(n)])
    mean_loo = math.fsum(np.ravel(loo)) / n
    se = math.sqrt((n - 1) / n * math.fsum(np.ravel((loo - mean_loo) ** 2)))
    return full, se


def jackknife_variance(samples: np.ndarray) -> tuple[float, float]:
    """Unbiased sample variance and its jackknife standard error (O(n))."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 3:
        return (float(np.var(x, ddof=1)) if n == 2 else 0.0), float("nan")
    s1 = math.fsum(x)
    s2 = math.fsum(x * x)
    var = (s2 - s1 * s1 / n) / (n - 1)
    # delete-one variances
    s1i = s1 - x
    s2i = s2 - x * x
    vi = (s2i - s1i * s1i / (n - 1)) / (n - 2)
    m = math.fsum(vi) / n
    se = math.sqrt((n - 1) / n * math.fsum((vi - m) ** 2))
    return var, se


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float  # log10 of prefactor
    slope_stderr: float
    residuals: tuple[float, ...]
    decades: float

    @property
    def prefactor(self) -> float:
        return 10.0**self.intercept


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> LogLogFit:
    """Least-squares line through (log10 x, log10 y)."""
    lx = np.log10(np.asarray(x, dtype=float))
    ly = np.log10(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise NumericalError("need at least two points for a fit")
    if lx.size == 2:
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        icpt = ly[0] - slope * lx[0]
        se = float("nan")
    else:
        r = stats.linregress(lx, ly)
        slope, icpt, se = r.slope, r.intercept, r.stderr
    res = ly - (slope * lx + icpt)
    return LogLogFit(float(slope), float(icpt), float(se), tuple(float(v) for v in res), float(np.ptp(lx)))


# ---------------------------------------------------------------------------
# quadrature


def _quad(f, a, b, points=None, limit=400, epsrel=1e-10, epsabs=0.0, tol_scale=0.0, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, points=points, limit=limit, epsrel=epsrel, epsabs=epsabs, **kw)
        except integrate.IntegrationWarning as exc:
            # retry once, tolerating roundoff-limited convergence but not divergence
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad(
                    f, a, b, points=points, limit=limit * 4, epsrel=epsrel, epsabs=epsabs, **kw
                )
            if not np.isfinite(val) or abs(err) > max(1e-4 * abs(val), 10.0 * epsabs, 1e-4 * tol_scale):
                raise NumericalError(f"quadrature did not converge on [{a}, {b}]: {exc}") from None
    return val, err


def quad_log(
    g: Callable[[float], float],
    k_lo: float,
    k_hi: float,
    breaks: Iterable[float] = (),
    rel: float = 1e-10,
    max_width: float = math.log(10.0),
) -> float:
    """Integrate g(k) dk over [k_lo, k_hi] (both > 0) in the variable ln k.

    The range is cut at ``breaks`` and into panels of at most ``max_width`` in
    ln k.  A coarse Gauss-Legendre pass sets an absolute tolerance, so panels
    that contribute nothing (far tails, fast wiggles) are not refined forever.
    """
    s_lo, s_hi = math.log(k_lo), math.log(k_hi)
    if s_hi <= s_lo:
        return 0.0
    cuts = {math.log(b) for b in breaks if k_lo < b < k_hi}
    n_extra = int((s_hi - s_lo) // max_width)
    cuts.update(s_lo + (i + 1) * (s_hi - s_lo) / (n_extra + 1) for i in range(n_extra))
    edges = [s_lo, *sorted(cuts), s_hi]
    f = lambda s: (lambda k: g(k) * k)(math.exp(s))
    x, w = np.polynomial.legendre.leggauss(48)
    coarse = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        h = 0.5 * (b - a)
        coarse += h * abs(math.fsum(wi * f(a + h * (xi + 1.0)) for xi, wi in zip(x, w)))
    epsabs = 1e-2 * rel * coarse / len(edges)
    parts = [_panel(f, a, b, rel, epsabs, coarse) for a, b in zip(edges[:-1], edges[1:])]
    return math.fsum(parts)


def _panel(f, a, b, rel, epsabs, scale, depth=0):
    # a panel with too many form-factor wiggles for one QUADPACK call is cut in 8
    try:
        return _quad(f, a, b, epsrel=rel, epsabs=epsabs, tol_scale=scale)[0]
    except NumericalError:
        if depth >= 3:
            raise
    e = np.linspace(a, b, 9)
    return math.fsum(_panel(f, x0, x1, rel, epsabs / 8.0, scale, depth + 1) for x0, x1 in zip(e[:-1], e[1:]))


def integrate_one_minus_cos(
    g: Callable[[float], float],
    T: float,
    scales: Iterable[float] = (),
    k_lo: float = 0.0,
    k_hi: float = math.inf,
    rel: float = 1e-9,
) -> float:
    """Compute  int_{k_lo}^{k_hi} g(k) (1 - cos kT) dk  for a smooth, decaying g.

    ``scales`` are characteristic lengths of g (separations, radii); their
    inverses become breakpoints.  Below 8 pi / T the integrand is handled in
    log k directly.  Above it the non-oscillating part is integrated in log k
    and the cos-weighted part with QAWO on doubling panels, stopped once the
    remaining tail is below ``rel`` of the running total.  g must make the
    integral converge at k -> 0 (the code starts at a small fraction of the
    smallest scale wavenumber when k_lo = 0).
    """
    if T <= 0:
        return 0.0
    kinv = [1.0 / s for s in scales if s and s > 0 and math.isfinite(s)]
    kT = 1.0 / T
    kscales = kinv + [kT]
    lo = k_lo if k_lo > 0 else 1e-9 * min(kscales)
    hi_cap = k_hi if math.isfinite(k_hi) else 1e9 * max(kscales)
    if hi_cap <= lo:
        return 0.0
    k_sw = min(8.0 * math.pi * kT, hi_cap)
    integrand = lambda k: g(k) * 2.0 * math.sin(0.5 * k * T) ** 2
    breaks = [b for b in kscales if lo < b < k_sw]
    total = quad_log(integrand, lo, k_sw, breaks) if k_sw > lo else 0.0
    if k_sw >= hi_cap:
        return total

    # non-oscillating part above the switch
    breaks_hi = [b for b in kinv if k_sw < b < hi_cap]
    smooth = quad_log(g, k_sw, hi_cap, breaks_hi)
    if not math.isfinite(k_hi):
        # power-law extrapolation of the far tail from the local log-slope
        g1, g2 = g(hi_cap / 2.0), g(hi_cap)
        if g1 > 0 and g2 > 0:
            p = math.log(g2 / g1) / math.log(2.0)
            if p < -1.0:
                smooth += -g2 * hi_cap / (p + 1.0)
    total += smooth

    # cos-weighted part on doubling panels
    lmax = max([1.0 / k for k in kinv], default=0.0)
    osc = 0.0
    a = k_sw
    while a < hi_cap:
        b = min(2.0 * a, hi_cap)
        pts = [x for x in breaks_hi if a < x < b]
        edges = [a, *pts, b]
        for e0, e1 in zip(edges[:-1], edges[1:]):
            osc += _quad(
                g, e0, e1, weight="cos", wvar=T, limit=800,
                epsabs=1e-2 * rel * abs(total), tol_scale=abs(total),
            )[0]
        a = b
        if b >= hi_cap:
            break
        env = max([abs(g(b)), abs(g(0.75 * b))] + [abs(g(k)) for k in kinv if k > b])
        # remainder after the leading integration-by-parts term ~ |g'| / T^2
        if 2.0 * env * (2.0 / b + lmax) / T**2 < rel * abs(total - osc):
            osc += -g(b) * math.sin(b * T) / T
            break
    return total - osc


# scalar fast paths for quadrature integrands (numpy scalar overhead dominates there)


def oms(x: float) -> float:
    """Scalar 1 - sin(x)/x."""
    if abs(x) < 2e-3:
        x2 = x * x
        return x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    return 1.0 - math.sin(x) / x


def ball_ff(u: float) -> float:
    """Scalar uniform-ball form factor 3 (sin u - u cos u) / u^3."""
    if abs(u) < 1e-2:
        u2 = u * u
        return 1.0 - u2 / 10.0 + u2 * u2 / 280.0 - u2**3 / 15120.0
    return 3.0 * (math.sin(u) - u * math.cos(u)) / (u * u * u)


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """Order-preserving map over a thread pool (serial when workers <= 1)."""
    items = list(items)
    if workers is None or workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=int(workers)) as ex:
        return list(ex.map(fn, items))
