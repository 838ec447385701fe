"""Mass densities, phase variances of both models, and the localization solver.

K model.  A rigid body with density rho displaced by a picks up the relative phase
(c^2 / 2 hbar) int dt int d^3x [rho(x - X) - rho(x - X - a)] gamma(x, t).  Averaging
over the random modes gives the single radial integral

    Var(a, t) = (c^2 l_p^(4/3) / (pi^2 hbar^2)) int dk k^(-5/3) |g(k)|^2 (1 - cos ckt) (1 - sinc ka)

with g the form factor of rho (an isotropic average replaces |g|^2 (1 - sinc ka)
for composite bodies).  This is the primary K route; the x-space route through
the time-integrated kernel is kept as a cross-check.

D model.  The white potential gives Var(a, t) = t (G / hbar) Delta(a) with
Delta(a) = 2 [W(0) - W(a)] and W the mutual Newtonian integral of the body and
its displaced copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from ._numerics import (
    ball_ff,
    fit_loglog,
    integrate_one_minus_cos,
    jackknife,
    oms,
    parallel_map,
    quad_log,
    spawn_seeds,
    _quad,
)
from .correlation import k_kernel_time_integral, k_kernel_time_integral_delta, kernel_prefactor
from .errors import DomainError, OutOfRangeError, RegularizationError
from .units import CGS, LogMagnitude, PhysicalConstants, UnitSystem, log_eval

__all__ = [
    "MassDensity",
    "PointMass",
    "UniformBall",
    "Gaussian",
    "Composite",
    "form_factor",
    "density_value",
    "mass_integral",
    "k_phase_variance",
    "k_phase_variance_xspace",
    "k_phase_variance_mc",
    "mutual_energy",
    "d_delta",
    "d_phase_variance",
    "d_decay_rate",
    "classify_regime",
    "LocalizationResult",
    "solve_localization",
    "SurveyResult",
    "scaling_survey",
    "TransitionPoint",
    "transition_point",
    "PhaseVarianceCurve",
    "phase_variance_curve",
    "dimensional_estimates",
    "BALL_J",
]

THRESHOLD = math.pi**2

# int_0^inf u^(1/3) F(u)^2 du for the unit ball and unit Gaussian form factors (macro-regime constants)
BALL_J = quad_log(lambda u: u ** (1.0 / 3.0) * ball_ff(u) ** 2, 1e-8, 1e6, [1.0, 10.0, 100.0], rel=1e-8)
GAUSS_J = 0.5 * float(special.gamma(2.0 / 3.0))


# ---------------------------------------------------------------------------
# densities


class MassDensity:
    variant = "abstract"
    total_mass: float = 0.0

    @property
    def size(self) -> float:
        """Characteristic radius (0 for a point)."""
        return 0.0

    def shape_factor(self, k: float) -> float:
        """g(k) / m for a single centred shape (scalar)."""
        raise NotImplementedError

    def pair(self, k: float, a) -> float:
        """Isotropic mean of |g(k)|^2 (1 - cos k.a), divided by total_mass^2."""
        s = self.shape_factor(k)
        return s * s * oms(k * _norm(a))

    def scales(self, a) -> list[float]:
        return [x for x in (_norm(a), self.size) if x > 0]

    @property
    def finite_size(self) -> bool:
        return self.size > 0


def _norm(a) -> float:
    if np.ndim(a) == 0:
        return abs(float(a))
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def _vec(a) -> np.ndarray:
    if np.ndim(a) == 0:
        return np.array([float(a), 0.0, 0.0])
    return np.asarray(a, dtype=float).reshape(3)


def _check_mass(m):
    if not (math.isfinite(m) and m >= 0):
        raise DomainError(f"mass must be finite and nonnegative, got {m}")


@dataclass(frozen=True)
class PointMass(MassDensity):
    m: float
    variant = "PointMass"

    def __post_init__(self):
        _check_mass(self.m)

    @property
    def total_mass(self):
        return self.m

    def shape_factor(self, k):
        return 1.0


@dataclass(frozen=True)
class UniformBall(MassDensity):
    m: float
    R: float
    variant = "UniformBall"

    def __post_init__(self):
        _check_mass(self.m)
        if not self.R > 0:
            raise DomainError("ball radius must be positive")

    @classmethod
    def from_density(cls, rho: float, R: float) -> "UniformBall":
        return cls(rho * 4.0 * math.pi / 3.0 * R**3, R)

    @property
    def total_mass(self):
        return self.m

    @property
    def size(self):
        return self.R

    def shape_factor(self, k):
        return ball_ff(k * self.R)


@dataclass(frozen=True)
class Gaussian(MassDensity):
    m: float
    sigma: float
    variant = "Gaussian"

    def __post_init__(self):
        _check_mass(self.m)
        if not self.sigma > 0:
            raise DomainError("Gaussian width must be positive")

    @property
    def total_mass(self):
        return self.m

    @property
    def size(self):
        return self.sigma

    def shape_factor(self, k):
        return math.exp(-0.5 * (k * self.sigma) ** 2)


@dataclass(frozen=True)
class Composite(MassDensity):
    """Rigid set of shapes at fixed offsets: parts = ((shape, (x, y, z)), ...)."""

    parts: tuple
    variant = "Composite"

    def __post_init__(self):
        if not self.parts:
            raise DomainError("composite needs at least one part")
        for shape, off in self.parts:
            if isinstance(shape, Composite):
                raise DomainError("nested composites are not supported")
            if np.asarray(off).shape != (3,):
                raise DomainError("offsets must be 3-vectors")

    @property
    def total_mass(self):
        return math.fsum(s.total_mass for s, _ in self.parts)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([np.asarray(o, dtype=float) for _, o in self.parts])

    @property
    def size(self):
        c = self.offsets.mean(axis=0)
        return max(float(np.linalg.norm(o - c)) + s.size for (s, _), o in zip(self.parts, self.offsets))

    @property
    def finite_size(self):
        return all(s.size > 0 for s, _ in self.parts)

    def shape_factor(self, k):
        # rms over directions of sum_i mu_i s_i e^{i k.b_i}
        return math.sqrt(max(self._mix(k, None), 0.0))

    def _mix(self, k, a):
        M = self.total_mass
        if M == 0:
            return 0.0
        mu = [s.total_mass / M for s, _ in self.parts]
        sf = [s.shape_factor(k) for s, _ in self.parts]
        off = self.offsets
        av = None if a is None else _vec(a)
        terms = []
        n = len(mu)
        for i in range(n):
            for j in range(n):
                w = mu[i] * mu[j] * sf[i] * sf[j]
                if w == 0:
                    continue
                b = off[i] - off[j]
                kb = k * float(np.linalg.norm(b))
                if av is None:
                    terms.append(w * (1.0 - oms(kb)))
                else:
                    kp = k * float(np.linalg.norm(b + av))
                    km = k * float(np.linalg.norm(b - av))
                    # <cos k.b (1 - cos k.a)> = sinc(kb) - (sinc(k|b+a|) + sinc(k|b-a|)) / 2
                    terms.append(w * (0.5 * (oms(kp) + oms(km)) - oms(kb)))
        return math.fsum(terms)

    def pair(self, k, a):
        return self._mix(k, a)

    def scales(self, a):
        off = self.offsets
        out = [x for x in (_norm(a),) if x > 0]
        out += [s.size for s, _ in self.parts if s.size > 0]
        av = _vec(a)
        for i in range(len(off)):
            for j in range(len(off)):
                for d in (off[i] - off[j], off[i] - off[j] + av, off[i] - off[j] - av):
                    x = float(np.linalg.norm(d))
                    if x > 0:
                        out.append(x)
        return sorted(set(out))


def form_factor(d: MassDensity, k):
    """g(k): Fourier transform of the density at wave number |k| (or wave vector k).

    A 3-vector k returns the complex transform (composite offsets give phases);
    a scalar k returns the real transform, rms-averaged over directions for composites.
    """
    if np.ndim(k) == 1 and np.size(k) == 3:
        kv = np.asarray(k, dtype=float)
        kn = float(np.linalg.norm(kv))
        if isinstance(d, Composite):
            return complex(sum(s.total_mass * s.shape_factor(kn) * np.exp(1j * kv @ np.asarray(o, float))
                               for s, o in d.parts))
        return d.total_mass * d.shape_factor(kn)
    ks = np.asarray(k, dtype=float)
    if np.any(ks < 0):
        raise DomainError("wave number must be nonnegative")
    vals = np.vectorize(lambda x: d.total_mass * d.shape_factor(float(x)))(ks)
    return float(vals) if vals.ndim == 0 else vals


def density_value(d: MassDensity, x) -> float:
    """rho at position x (a 3-vector, or a radius for centred shapes)."""
    if isinstance(d, Composite):
        xv = _vec(x)
        return math.fsum(density_value(s, float(np.linalg.norm(xv - np.asarray(o, float)))) for s, o in d.parts)
    r = _norm(x)
    if isinstance(d, PointMass):
        raise DomainError("a point mass has no pointwise density")
    if isinstance(d, UniformBall):
        return 3.0 * d.m / (4.0 * math.pi * d.R**3) if r <= d.R else 0.0
    if isinstance(d, Gaussian):
        return d.m * (2.0 * math.pi * d.sigma**2) ** -1.5 * math.exp(-0.5 * (r / d.sigma) ** 2)
    raise DomainError(f"unsupported density {d!r}")


def mass_integral(d: MassDensity) -> float:
    """int rho d^3x by radial quadrature (centred smooth shapes)."""
    if isinstance(d, UniformBall):
        return _quad(lambda r: 4 * math.pi * r * r * density_value(d, r), 0.0, d.R, epsrel=1e-12)[0]
    if isinstance(d, Gaussian):
        return _quad(lambda r: 4 * math.pi * r * r * density_value(d, r), 0.0, math.inf, epsrel=1e-12)[0]
    if isinstance(d, Composite):
        return math.fsum(mass_integral(s) for s, _ in d.parts)
    raise DomainError("mass_integral needs a smooth shape")


# ---------------------------------------------------------------------------
# K model


def k_phase_variance(
    d: MassDensity,
    a,
    t: float,
    band: tuple[float, float] = (0.0, math.inf),
    constants: PhysicalConstants = CGS,
    rel: float = 1e-9,
) -> float:
    """Var of the relative phase between the body and its copy displaced by a, after time t."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    k_lo, k_hi = band
    if not (0 <= k_lo < k_hi):
        raise DomainError(f"invalid band {band}")
    M = d.total_mass
    if _norm(a) == 0 or t == 0 or M == 0:
        return 0.0
    c, hbar = constants.c, constants.hbar
    pref = c**2 * constants.l_p ** (4.0 / 3.0) * M**2 / (math.pi**2 * hbar**2)
    return pref * integrate_one_minus_cos(_k_integrand(d, a), c * t, d.scales(a), k_lo, k_hi, rel)


def _k_integrand(d: MassDensity, a):
    """k^(-5/3) <|g|^2 (1 - cos k.a)> / M^2 as a plain-float closure."""
    an = _norm(a)
    p = -5.0 / 3.0
    if isinstance(d, PointMass):
        return lambda k: k**p * oms(k * an)
    if isinstance(d, UniformBall):
        R = d.R
        return lambda k: k**p * ball_ff(k * R) ** 2 * oms(k * an)
    if isinstance(d, Gaussian):
        s2 = d.sigma**2
        return lambda k: k**p * math.exp(-k * k * s2) * oms(k * an)
    return lambda k: k**p * d.pair(k, a)


def k_phase_variance_xspace(d: MassDensity, a, t: float, constants: PhysicalConstants = CGS,
                            method: str = "analytic") -> float:
    """x-space cross-check: (c^4 / 4 hbar^2) sum_ij m_i m_j [2 D(b_ij) - D(|b_ij - a|) - D(|b_ij + a|)].

    D is the time double integral of the kernel.  Works for point masses and
    composites of point masses; ``method='quadrature'`` evaluates each D(r > 0)
    by the singularity-aware time quadrature instead of the closed form.
    """
    pref = constants.c**4 / (4.0 * constants.hbar**2)
    if isinstance(d, PointMass):
        if method == "analytic":
            return 2.0 * pref * d.m**2 * k_kernel_time_integral_delta(_norm(a), t, constants)
        D0 = k_kernel_time_integral(0.0, t, constants)
        Da = k_kernel_time_integral(_norm(a), t, constants, method)
        return 2.0 * pref * d.m**2 * (D0 - Da)
    if not isinstance(d, Composite) or not all(isinstance(s, PointMass) for s, _ in d.parts):
        raise DomainError("x-space route implemented for point masses and composites of point masses")
    av = _vec(a)
    off = d.offsets
    terms = []
    for i, (si, _) in enumerate(d.parts):
        for j, (sj, _) in enumerate(d.parts):
            b = off[i] - off[j]
            Dr = lambda r: k_kernel_time_integral(r, t, constants, "analytic" if r == 0 else method)
            s = 2 * Dr(float(np.linalg.norm(b))) - Dr(float(np.linalg.norm(b - av))) - Dr(float(np.linalg.norm(b + av)))
            terms.append(si.m * sj.m * s)
    return pref * math.fsum(terms)


def k_phase_variance_mc(
    d: MassDensity,
    a,
    t: float,
    mode_set,
    n_realizations: int = 1000,
    master_seed: int = 0,
    workers: int = 1,
    nodes_per_period: int = 8,
) -> tuple[float, float]:
    """Brute-force ensemble oracle for k_phase_variance restricted to the mode-set band.

    For each realization the smeared field at the two centres is integrated over
    [0, t] by composite Gauss-Legendre quadrature, the phase difference formed,
    and its mean square (the mean is zero) averaged with a jackknife error.
    """
    from .noise import FieldRealization

    cons = mode_set.constants
    c, hbar = cons.c, cons.hbar
    av = _vec(a)
    if isinstance(d, Composite):
        parts = [(s, np.asarray(o, float)) for s, o in d.parts]
    else:
        parts = [(d, np.zeros(3))]
    wmax = c * mode_set.k_max
    n_pan = max(1, int(math.ceil(wmax * t / (2 * math.pi))))
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_period)
    edges = np.linspace(0.0, t, n_pan + 1)
    h = 0.5 * np.diff(edges)
    tn = ((edges[:-1] + h)[:, None] + h[:, None] * xg[None, :]).ravel()
    wn = (h[:, None] * wg[None, :]).ravel()
    seeds = spawn_seeds(master_seed, n_realizations)

    def one(seed):
        r = FieldRealization(mode_set, seed)
        kv, om, amp, alpha = r.arrays()
        kn = np.sqrt((kv**2).sum(1))
        # time integral of cos(theta - omega t') by quadrature, per mode
        cw = np.cos(-np.outer(tn, om) + alpha[None, :])  # (nt, modes)
        sw = np.sin(-np.outer(tn, om) + alpha[None, :])
        ic = wn @ cw
        is_ = wn @ sw
        tot = 0.0
        for s, off in parts:
            sf = np.array([s.total_mass * s.shape_factor(float(k)) for k in kn])
            th0 = kv @ off
            th1 = kv @ (off + av)
            # cos(th + x) integrated = cos(th) ic - sin(th) is
            f0 = np.cos(th0) * ic - np.sin(th0) * is_
            f1 = np.cos(th1) * ic - np.sin(th1) * is_
            tot += math.fsum(amp * sf * (f0 - f1))
        dphi = c**2 / (2.0 * hbar) * tot
        return dphi * dphi

    sq = np.array(parallel_map(one, seeds, workers))
    return jackknife(sq)


# ---------------------------------------------------------------------------
# D model


def mutual_energy(d: MassDensity, a: float) -> float:
    """W(a) = int int rho(x) rho(x' - a) / |x - x'| for centred single shapes (closed forms)."""
    a = abs(float(a))
    if isinstance(d, PointMass):
        if a == 0:
            raise RegularizationError("point-mass self-term diverges; give the body a finite size")
        return d.m**2 / a
    if isinstance(d, UniformBall):
        m, R = d.m, d.R
        if a >= 2 * R:
            return m * m / a
        x = a / R
        return m * m / R * (1.2 - 0.5 * x**2 + 0.1875 * x**3 - x**5 / 160.0)
    if isinstance(d, Gaussian):
        m, s = d.m, d.sigma
        if a == 0:
            return m * m / (s * math.sqrt(math.pi))
        return m * m * math.erf(a / (2 * s)) / a
    raise DomainError("closed-form mutual energy only for single shapes")


def _gauss_h(z: float) -> float:
    """1 - sqrt(pi) erf(z) / (2 z), series at small z."""
    if z < 0.5:
        terms = []
        fact = 1.0
        for n in range(1, 30):
            fact *= n
            terms.append((-1) ** (n + 1) * z ** (2 * n) / (fact * (2 * n + 1)))
        return math.fsum(terms)
    return 1.0 - math.sqrt(math.pi) * math.erf(z) / (2.0 * z)


def d_delta(d: MassDensity, a, method: str = "auto") -> float:
    """Delta(a) = 2 [W(0) - W(a)] (mass^2 / length), free of cancellation at small a."""
    if not d.finite_size:
        raise RegularizationError("the D model needs a finite-size density (e.g. a ball of the classical radius)")
    an = _norm(a)
    if an == 0 or d.total_mass == 0:
        return 0.0
    if method == "auto":
        method = "kspace" if isinstance(d, Composite) else "closed"
    if method == "closed":
        if isinstance(d, UniformBall):
            m, R = d.m, d.R
            if an >= 2 * R:
                return 2.0 * m * m * (1.2 / R - 1.0 / an)
            x = an / R
            return 2.0 * m * m / R * (0.5 * x**2 - 0.1875 * x**3 + x**5 / 160.0)
        if isinstance(d, Gaussian):
            return 2.0 * d.m**2 / (d.sigma * math.sqrt(math.pi)) * _gauss_h(an / (2 * d.sigma))
        raise DomainError("closed form not available for this density")
    if method != "kspace":
        raise DomainError(f"unknown method {method!r}")
    # (4 / pi) M^2 int <|g|^2 (1 - cos k.a)> dk
    sc = d.scales(a)
    lo, hi = 1e-8 / max(sc), 1e8 / min(sc)
    val = quad_log(lambda k: d.pair(k, a), lo, hi, [1.0 / s for s in sc])
    return 4.0 / math.pi * d.total_mass**2 * val


def d_phase_variance(d: MassDensity, a, t: float, constants: PhysicalConstants = CGS, method: str = "auto") -> float:
    """Var = t (G / hbar) Delta(a)."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    return t * constants.G / constants.hbar * d_delta(d, a, method)


def d_decay_rate(d: MassDensity, a, constants: PhysicalConstants = CGS, method: str = "auto") -> float:
    """Off-diagonal decay rate (G / 2 hbar) Delta(a) of the Markovian master equation."""
    return 0.5 * constants.G / constants.hbar * d_delta(d, a, method)


# ---------------------------------------------------------------------------
# localization


def classify_regime(m: float, R: float, constants: PhysicalConstants = CGS, guard: float = 10.0) -> str:
    """micro iff hbar^2/G > guard * m^3 R, macro iff hbar^2/G < m^3 R / guard, else transition."""
    if R <= 0:
        return "micro"
    lr = log_eval([(constants.hbar, 2), (constants.G, -1), (m, -3), (R, -1)]).log10
    if lr > math.log10(guard):
        return "micro"
    if lr < -math.log10(guard):
        return "macro"
    return "transition"


@dataclass
class LocalizationResult:
    model: str
    a_c: float
    tau_c: float
    regime: str
    density: MassDensity
    iterations: int
    evaluations: int
    residual: float
    threshold: float = THRESHOLD
    bracket: tuple = ()

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "a_c": self.a_c,
            "tau_c": self.tau_c,
            "regime": self.regime,
            "density": _density_dict(self.density),
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "residual": self.residual,
            "threshold": self.threshold,
            "bracket": list(self.bracket),
        }


def _density_dict(d: MassDensity) -> dict:
    if isinstance(d, Composite):
        return {"variant": d.variant, "parts": [[_density_dict(s), list(map(float, o))] for s, o in d.parts]}
    out = {"variant": d.variant, "m": d.total_mass}
    if isinstance(d, UniformBall):
        out["R"] = d.R
    if isinstance(d, Gaussian):
        out["sigma"] = d.sigma
    return out


def _variance_fn(model, d, constants, band, method):
    M, hbar = d.total_mass, constants.hbar
    if model == "K":
        return lambda a: k_phase_variance(d, a, M * a * a / hbar, band, constants)
    if model == "D":
        return lambda a: d_phase_variance(d, a, M * a * a / hbar, constants, method)
    raise DomainError(f"unknown model {model!r}")


def _guess(model, d, constants, thr):
    """Dimensionally consistent starting point; both asymptotic forms bound Var from above."""
    M, hbar, G, c = d.total_mass, constants.hbar, constants.G, constants.c
    R = d.size
    if model == "K":
        P = kernel_prefactor(constants)
        g = (5.0 * thr * hbar**2 / (9.0 * P * M**2 * c**2)) ** 1.5
        J = BALL_J if isinstance(d, UniformBall) else GAUSS_J if isinstance(d, Gaussian) else None
        if J is not None:
            lp43 = constants.l_p ** (4.0 / 3.0)
            g = max(g, math.sqrt(thr * 6 * math.pi**2 * hbar**2 * R ** (4.0 / 3.0) / (c**2 * lp43 * M**2 * J)))
        return g
    sat = 2.0 * (mutual_energy(d, 0.0) if not isinstance(d, Composite) else d_delta(d, 1e6 * R) / 2)
    g = math.sqrt(thr * hbar**2 / (G * M * sat))
    if isinstance(d, UniformBall):
        c2 = M**2 / R**3
    elif isinstance(d, Gaussian):
        c2 = M**2 / (6 * math.sqrt(math.pi) * R**3)
    else:
        c2 = None
    if c2 is not None:
        g = max(g, (thr * hbar**2 / (G * M * c2)) ** 0.25)
    return g


def solve_localization(
    model: str,
    d: MassDensity,
    constants: PhysicalConstants = CGS,
    threshold: float = THRESHOLD,
    band: tuple[float, float] = (0.0, math.inf),
    rel_tol: float = 1e-3,
    a_range: tuple[float, float] = (1e-30, 1e30),
    units: UnitSystem | None = None,
    method: str = "auto",
) -> LocalizationResult:
    """Find a_c with Var(a_c, t = m a_c^2 / hbar) = threshold by bisection on log a.

    ``a_range`` is in cm; with ``units`` given, constants and the range are taken
    in that system's internal units.
    """
    if units is not None:
        constants = units.constants
        a_range = (a_range[0] / units.length_scale, a_range[1] / units.length_scale)
    M = d.total_mass
    if not M > 0:
        raise DomainError("localization needs a positive mass")
    if not threshold > 0:
        raise DomainError("threshold must be positive")
    var = _variance_fn(model, d, constants, band, method)
    lo_lim, hi_lim = map(math.log, a_range)
    n_eval = 0

    def f(la):
        nonlocal n_eval
        n_eval += 1
        v = var(math.exp(la))
        return math.log(v / threshold) if v > 0 else -math.inf

    la = math.log(_guess(model, d, constants, threshold))
    la = min(max(la, lo_lim), hi_lim)
    fa = f(la)
    step = math.log(2.0)
    lb, fb = la, fa
    # bracket by doubling
    while (fa < 0) == (fb < 0):
        nxt = lb + step if fb < 0 else lb - step
        if nxt > hi_lim or nxt < lo_lim:
            raise OutOfRangeError(f"no sign change of Var - threshold within [{a_range[0]:.3g}, {a_range[1]:.3g}]")
        la, fa = lb, fb
        lb, fb = nxt, f(nxt)
    if la > lb:
        la, lb, fa, fb = lb, la, fb, fa
    it = 0
    tol = math.log1p(rel_tol)
    while lb - la > tol:
        mid = 0.5 * (la + lb)
        fm = f(mid)
        it += 1
        if fm < 0:
            la, fa = mid, fm
        else:
            lb, fb = mid, fm
    # final log-linear interpolation inside the bracket
    root = la - fa * (lb - la) / (fb - fa) if fb != fa else 0.5 * (la + lb)
    a_c = math.exp(root)
    res = f(root)
    tau = M * a_c * a_c / constants.hbar
    return LocalizationResult(model, a_c, tau, classify_regime(M, d.size, constants), d, it, n_eval, res,
                              threshold, (math.exp(la), math.exp(lb)))


def dimensional_estimates(model: str, m: float, R: float, constants: PhysicalConstants = CGS) -> dict:
    """Order-of-magnitude micro/macro formulas (log-safe), for reporting next to solved values."""
    h, G = constants.hbar, constants.G
    if model == "K":
        micro = log_eval([(h, 2), (G, -1), (m, -3)])
        macro = log_eval([(h, 2.0 / 3.0), (G, -1.0 / 3.0), (R, 2.0 / 3.0), (m, -1)]) if R > 0 else None
    else:
        micro = log_eval([(h, 1), (G, -0.5), (m, -1.5), (R, 0.5)]) if R > 0 else None
        macro = log_eval([(h, 0.5), (G, -0.25), (m, -0.75), (R, 0.75)]) if R > 0 else None
    return {"micro": micro, "macro": macro}


@dataclass
class SurveyResult:
    model: str
    shape: str
    axis: str
    values: list
    a_c: list
    tau_c: list
    regimes: list
    slope: float
    slope_stderr: float
    prefactor: float
    warnings: list = field(default_factory=list)
    per_regime: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("model", "shape", "axis", "values", "a_c", "tau_c", "regimes",
                                              "slope", "slope_stderr", "prefactor", "warnings", "per_regime")}


def _make_density(shape, m, R):
    if shape == "point":
        return PointMass(m)
    if shape == "ball":
        return UniformBall(m, R)
    if shape == "gaussian":
        return Gaussian(m, R)
    raise DomainError(f"unknown shape {shape!r}")


def scaling_survey(
    model: str,
    shape: str,
    values: Sequence[float],
    axis: str = "mass",
    mass: float | None = None,
    radius: float | None = None,
    density: float | None = None,
    constants: PhysicalConstants = CGS,
    workers: int = 1,
    min_decades: float = 2.0,
    **solve_kw,
) -> SurveyResult:
    """Solve a_c along a mass ladder (fixed radius) or radius ladder (fixed mass or density) and fit slopes."""
    vals = [float(v) for v in values]
    if len(vals) < 3 or math.log10(max(vals) / min(vals)) < min_decades - 1e-9:
        raise DomainError(f"survey grid must have >= 3 points spanning >= {min_decades} decades")
    if axis == "mass":
        if shape != "point" and radius is None:
            raise DomainError("mass ladder needs a fixed radius")
        dens = [_make_density(shape, m, radius or 0.0) for m in vals]
    elif axis == "radius":
        if shape == "point":
            raise DomainError("a point has no radius to vary")
        if (mass is None) == (density is None):
            raise DomainError("radius ladder needs exactly one of mass or density")
        dens = [_make_density(shape, mass if mass is not None else density * 4 * math.pi / 3 * R**3, R) for R in vals]
    else:
        raise DomainError(f"unknown axis {axis!r}")
    res = parallel_map(lambda d: solve_localization(model, d, constants, **solve_kw), dens, workers)
    a = [r.a_c for r in res]
    regimes = [r.regime for r in res]
    fit = fit_loglog(vals, a)
    warnings, per = [], {}
    if len(set(regimes)) > 1:
        warnings.append("split-regime: classification changes across the grid; fitted per regime")
        for reg in sorted(set(regimes)):
            idx = [i for i, r in enumerate(regimes) if r == reg]
            if len(idx) >= 2:
                fr = fit_loglog([vals[i] for i in idx], [a[i] for i in idx])
                per[reg] = {"slope": fr.slope, "slope_stderr": fr.slope_stderr, "n": len(idx)}
    return SurveyResult(model, shape, axis, vals, a, [r.tau_c for r in res], regimes, fit.slope, fit.slope_stderr,
                        fit.prefactor, warnings, per)


@dataclass(frozen=True)
class TransitionPoint:
    a_tr: float
    m_tr: float
    tau_tr: float
    log_a: LogMagnitude
    log_m: LogMagnitude
    log_tau: LogMagnitude

    def as_dict(self):
        return {"a_tr": self.a_tr, "m_tr": self.m_tr, "tau_tr": self.tau_tr}


def transition_point(density: float, constants: PhysicalConstants = CGS) -> TransitionPoint:
    """a_c = R on the macro law with m = density (4 pi / 3) R^3.

    R^10 = hbar^2 / (G (4 pi density / 3)^3); then m and tau = m R^2 / hbar.
    """
    if not density > 0:
        raise DomainError("density must be positive")
    h, G = constants.hbar, constants.G
    q = 4.0 * math.pi * density / 3.0
    la = log_eval([(h, 0.2), (G, -0.1), (q, -0.3)])
    R = float(la)
    lm = log_eval([(q, 1), (R, 3)])
    lt = log_eval([(float(lm), 1), (R, 2), (h, -1)])
    return TransitionPoint(R, float(lm), float(lt), la, lm, lt)


@dataclass
class PhaseVarianceCurve:
    separations: list
    times: list
    variance: np.ndarray
    model: str
    density: MassDensity


def phase_variance_curve(model: str, d: MassDensity, separations: Sequence[float], times: Sequence[float],
                         constants: PhysicalConstants = CGS, band=(0.0, math.inf),
                         workers: int = 1) -> PhaseVarianceCurve:
    a = [float(x) for x in separations]
    t = [float(x) for x in times]
    if model == "K":
        fn = lambda at: k_phase_variance(d, at[0], at[1], band, constants)
    elif model == "D":
        fn = lambda at: d_phase_variance(d, at[0], at[1], constants)
    else:
        raise DomainError(f"unknown model {model!r}")
    vals = parallel_map(fn, [(x, y) for x in a for y in t], workers)
    return PhaseVarianceCurve(a, t, np.array(vals).reshape(len(a), len(t)), model, d)
