"""Density-matrix evolution on 1-D centre-of-mass grids.

Each grid point is the centre of a rigid copy of the body.  In the position basis
both models reduce (without recoil) to pure dephasing of rho_ij at a pairwise
rate: the D model at the constant rate Lambda_ij = (G / 2 hbar) Delta(|x_i - x_j|),
the K model at a rate Gamma_ij(t) = int_0^t K_ij(tau) dtau built from the colored
memory kernel

    K(a, tau) = (c^4 l_p^(4/3) M^2 / (2 pi^2 hbar^2)) int k^(1/3) <|g|^2 (1 - cos k.a)> cos(c k tau) dk / M^2

which is finite only for smeared densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decoherence import MassDensity, PointMass, d_decay_rate
from .errors import DomainError, NumericalError, OutOfRangeError, RegularizationError, ResourceError, StabilityError
from .units import CGS, PhysicalConstants

__all__ = [
    "DensityMatrixGrid",
    "DecoherenceFunctional",
    "d_decoherence_functional",
    "kinetic_matrix",
    "evolve_markovian",
    "k_memory_kernel",
    "evolve_nonmarkovian_k",
    "coherence_length_from_evolution",
    "decay_by_separation",
]

MAX_N = 256
HERM_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_FLOOR = -1e-8


@dataclass
class DensityMatrixGrid:
    positions: np.ndarray
    rho: np.ndarray
    mass: float
    density: MassDensity | None = None
    t: float = 0.0
    rho0: np.ndarray | None = None
    history: dict = field(default_factory=lambda: {"t": [], "abs_rho": []})
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        n = self.positions.size
        if n < 2 or n > MAX_N:
            raise ResourceError(f"grid must have 2..{MAX_N} points, got {n}")
        self.rho = np.array(self.rho, dtype=complex)
        if self.rho.shape != (n, n):
            raise DomainError("rho shape does not match the grid")
        if self.rho0 is None:
            self.rho0 = self.rho.copy()
        check_state(self.rho, check_positivity=True)

    @classmethod
    def uniform(cls, positions, density: MassDensity) -> "DensityMatrixGrid":
        """Equal-weight superposition over every grid point, rho_ij = 1/N."""
        n = len(positions)
        return cls(np.asarray(positions, float), np.full((n, n), 1.0 / n, dtype=complex), density.total_mass, density)

    @classmethod
    def from_wavefunction(cls, positions, psi, density: MassDensity) -> "DensityMatrixGrid":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.asarray(positions, float), np.outer(psi, psi.conj()), density.total_mass, density)

    @property
    def separations(self) -> np.ndarray:
        return np.abs(self.positions[:, None] - self.positions[None, :])

    def copy(self) -> "DensityMatrixGrid":
        g = DensityMatrixGrid(self.positions.copy(), self.rho.copy(), self.mass, self.density, self.t, self.rho0.copy())
        g.history = {"t": list(self.history["t"]), "abs_rho": list(self.history["abs_rho"])}
        g.diagnostics = dict(self.diagnostics)
        return g


def check_state(rho: np.ndarray, check_positivity: bool = True) -> dict:
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = abs(complex(np.trace(rho)) - 1.0)
    out = {"hermiticity": herm, "trace_error": tr}
    if herm > HERM_TOL:
        raise NumericalError(f"density matrix lost Hermiticity ({herm:.3g})")
    if tr > TRACE_TOL:
        raise NumericalError(f"trace drifted by {tr:.3g}")
    if check_positivity:
        ev = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        out["min_eigenvalue"] = ev
        if ev < EIG_FLOOR:
            raise NumericalError(f"negative eigenvalue {ev:.3g}")
    return out


@dataclass
class DecoherenceFunctional:
    Lambda: np.ndarray
    model: str = "D"

    def __post_init__(self):
        L = np.asarray(self.Lambda, dtype=float)
        if np.any(np.diag(L) != 0) or not np.allclose(L, L.T, rtol=0, atol=0) or np.any(L < 0):
            raise DomainError("Lambda must be symmetric, nonnegative, with zero diagonal")
        self.Lambda = L

    def threshold_time(self, threshold: float = math.pi**2) -> np.ndarray:
        """Time at which the accumulated phase variance 2 Lambda t reaches ``threshold``."""
        with np.errstate(divide="ignore"):
            return threshold / (2.0 * self.Lambda)


def d_decoherence_functional(positions, d: MassDensity, constants: PhysicalConstants = CGS) -> DecoherenceFunctional:
    """Lambda_ij = (G / 2 hbar) Delta(|x_i - x_j|)."""
    if not d.finite_size:
        raise RegularizationError("D functional needs a finite-size density")
    x = np.asarray(positions, dtype=float)
    sep = np.abs(x[:, None] - x[None, :])
    cache: dict[float, float] = {}
    L = np.zeros_like(sep)
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            s = float(sep[i, j])
            if s not in cache:
                cache[s] = d_decay_rate(d, s, constants)
            L[i, j] = L[j, i] = cache[s]
    return DecoherenceFunctional(L, "D")


def kinetic_matrix(positions, mass: float, constants: PhysicalConstants = CGS) -> np.ndarray:
    """Band-limited (sinc-DVR) kinetic energy on a uniform grid."""
    x = np.asarray(positions, dtype=float)
    dx = np.diff(x)
    if not np.allclose(dx, dx[0], rtol=1e-9):
        raise DomainError("free-particle H needs a uniform grid")
    n = len(x)
    i = np.arange(n)
    d = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        T = np.where(d == 0, math.pi**2 / 3.0, 2.0 * (-1.0) ** np.abs(d) / np.where(d == 0, 1, d) ** 2)
    return constants.hbar**2 / (2.0 * mass * dx[0] ** 2) * T


def _record(state, every, step):
    if every and step % every == 0:
        state.history["t"].append(state.t)
        state.history["abs_rho"].append(np.abs(state.rho))


def _monitor(state, diag, positivity):
    info = check_state(state.rho, positivity)
    diag["max_hermiticity"] = max(diag.get("max_hermiticity", 0.0), info["hermiticity"])
    diag["max_trace_error"] = max(diag.get("max_trace_error", 0.0), info["trace_error"])
    if "min_eigenvalue" in info:
        diag["min_eigenvalue"] = min(diag.get("min_eigenvalue", 1.0), info["min_eigenvalue"])


def evolve_markovian(
    state: DensityMatrixGrid,
    L: DecoherenceFunctional,
    H: str = "none",
    dt: float = 1.0,
    steps: int = 1,
    constants: PhysicalConstants = CGS,
    record_every: int = 0,
    positivity_every: int = 1,
) -> DensityMatrixGrid:
    """RK4 for drho/dt = -(i/hbar)[H, rho] - Lambda o rho."""
    Lam = L.Lambda
    if Lam.shape != state.rho.shape:
        raise DomainError("functional and grid sizes differ")
    if dt * float(Lam.max(initial=0.0)) >= 0.1:
        raise StabilityError(f"dt * max(Lambda) = {dt * Lam.max():.3g} >= 0.1")
    if H == "none":
        Hm = None
    elif H == "free-particle":
        Hm = kinetic_matrix(state.positions, state.mass, constants)
        scale = float(np.abs(np.linalg.eigvalsh(Hm)).max()) / constants.hbar
        if dt * scale >= 0.1:
            raise StabilityError(f"dt * kinetic scale = {dt * scale:.3g} >= 0.1")
    else:
        raise DomainError(f"unknown Hamiltonian {H!r}")
    out = state.copy()
    ih = 1j / constants.hbar

    def f(r):
        d = -Lam * r
        if Hm is not None:
            d = d - ih * (Hm @ r - r @ Hm)
        return d

    diag = out.diagnostics
    _record(out, record_every, 0)
    for n in range(1, steps + 1):
        r = out.rho
        k1 = f(r)
        k2 = f(r + 0.5 * dt * k1)
        k3 = f(r + 0.5 * dt * k2)
        k4 = f(r + dt * k3)
        out.rho = r + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.t = state.t + n * dt
        _monitor(out, diag, positivity_every and n % positivity_every == 0)
        _record(out, record_every, n)
    return out


def _kgrid(k_hi: float, dk: float, nodes: int = 8):
    n_pan = max(1, int(math.ceil(k_hi / dk)))
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, k_hi, n_pan + 1)
    h = 0.5 * np.diff(edges)
    k = ((edges[:-1] + h)[:, None] + h[:, None] * x[None, :]).ravel()
    wk = (h[:, None] * w[None, :]).ravel()
    return k, wk


def k_memory_kernel(d: MassDensity, seps, lags, constants: PhysicalConstants = CGS, k_cut: float = 200.0,
                    nodes: int = 8) -> np.ndarray:
    """K(a, tau) on a (separation, lag) grid by fixed composite Gauss-Legendre in k.

    The k range extends to k_cut / size and the panel width resolves cos(c k tau)
    up to the largest lag.  Point masses give a divergent kernel.
    """
    if isinstance(d, PointMass) or not d.finite_size:
        raise RegularizationError("the colored memory kernel diverges for point masses; smear the density")
    c, hbar = constants.c, constants.hbar
    M = d.total_mass
    lags = np.asarray(lags, dtype=float)
    seps = np.asarray(seps, dtype=float)
    if M == 0:
        return np.zeros((seps.size, lags.size))
    k_hi = k_cut / d.size
    tmax = float(lags.max(initial=0.0))
    amax = float(seps.max(initial=0.0))
    dk = min(2.0 * math.pi / max(c * tmax, 1e-300), 2.0 * math.pi / max(amax, 1e-300), 0.5 / d.size) / 2.0
    k, wk = _kgrid(k_hi, dk, nodes)
    pref = c**4 * constants.l_p ** (4.0 / 3.0) * M**2 / (2.0 * math.pi**2 * hbar**2)
    cosm = np.cos(c * np.outer(k, lags))  # (nk, nlag)
    out = np.empty((seps.size, lags.size))
    for i, a in enumerate(seps):
        h = np.array([kk ** (1.0 / 3.0) * d.pair(kk, a) for kk in k]) * wk
        out[i] = pref * (h @ cosm)
    return out


def _gamma_history(Kmat: np.ndarray, h: float) -> np.ndarray:
    """Cumulative trapezoid of K over lags spaced h: Gamma at every lag point."""
    G = np.zeros_like(Kmat)
    G[:, 1:] = np.cumsum(0.5 * h * (Kmat[:, 1:] + Kmat[:, :-1]), axis=1)
    return G


def _evolve_nm(state, d, H, t_final, dt, constants, k_cut, record_every, positivity_every):
    steps = int(round(t_final / dt))
    if steps < 1 or abs(steps * dt - t_final) > 1e-9 * t_final:
        raise DomainError("t_final must be a positive multiple of dt")
    sep = state.separations
    useps, inv = np.unique(sep, return_inverse=True)
    inv = inv.reshape(sep.shape)
    lags = 0.5 * dt * np.arange(2 * steps + 1)
    Kmat = k_memory_kernel(d, useps, lags, constants, k_cut)
    Gam = _gamma_history(Kmat, 0.5 * dt)  # Gamma at half-step times
    Hm = None
    if H == "free-particle":
        Hm = kinetic_matrix(state.positions, state.mass, constants)
    elif H != "none":
        raise DomainError(f"unknown Hamiltonian {H!r}")
    out = state.copy()
    ih = 1j / constants.hbar

    def f(r, idx):
        d_ = -Gam[:, idx][inv] * r
        if Hm is not None:
            d_ = d_ - ih * (Hm @ r - r @ Hm)
        return d_

    diag = out.diagnostics
    _record(out, record_every, 0)
    for n in range(steps):
        r = out.rho
        i0 = 2 * n
        k1 = f(r, i0)
        k2 = f(r + 0.5 * dt * k1, i0 + 1)
        k3 = f(r + 0.5 * dt * k2, i0 + 1)
        k4 = f(r + dt * k3, i0 + 2)
        out.rho = r + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.t = state.t + (n + 1) * dt
        _monitor(out, diag, positivity_every and (n + 1) % positivity_every == 0)
        _record(out, record_every, n + 1)
    # accumulated variance 2 int Gamma, for the perturbativity monitor
    var_acc = 2.0 * np.sum(0.5 * 0.5 * dt * (Gam[:, 1:] + Gam[:, :-1]), axis=1)
    out.diagnostics["max_accumulated_variance"] = float(var_acc.max())
    out.diagnostics["late_rate_change"] = float(abs(Gam[:, -1] - Gam[:, -3]).max() / max(abs(Gam[:, -1]).max(), 1e-300))
    return out


def evolve_nonmarkovian_k(
    state: DensityMatrixGrid,
    d: MassDensity,
    H: str = "none",
    t_final: float = 1.0,
    dt: float = 0.01,
    constants: PhysicalConstants = CGS,
    k_cut: float = 200.0,
    refine_check: bool = True,
    refine_tol: float = 1e-3,
    record_every: int = 0,
    positivity_every: int = 1,
    var_limit: float = 10.0,
) -> DensityMatrixGrid:
    """Second-order colored-noise master equation, recoil-free dissipator.

    drho_ij/dt = -(i/hbar)[H, rho]_ij - Gamma_ij(t) rho_ij, Gamma from the stored
    kernel history by trapezoidal accumulation.  With refine_check the run is
    repeated at dt/2 and the relative change of every log-coherence must stay
    below refine_tol.
    """
    out = _evolve_nm(state, d, H, t_final, dt, constants, k_cut, record_every, positivity_every)
    warnings = []
    if out.diagnostics["max_accumulated_variance"] > var_limit:
        warnings.append(f"accumulated variance {out.diagnostics['max_accumulated_variance']:.3g} exceeds "
                        f"{var_limit}: outside weak-coupling validity")
    if refine_check:
        fine = _evolve_nm(state, d, H, t_final, dt / 2.0, constants, k_cut, 0, 0)
        la = np.log(np.abs(out.rho) / np.abs(state.rho))
        lb = np.log(np.abs(fine.rho) / np.abs(state.rho))
        mask = np.abs(lb) > 1e-12
        change = float(np.max(np.abs(la[mask] - lb[mask]) / np.abs(lb[mask]))) if mask.any() else 0.0
        out.diagnostics["refinement_change"] = change
        if change > refine_tol:
            raise NumericalError(f"halving dt changed log-coherences by {change:.3g} > {refine_tol}")
    out.diagnostics["warnings"] = warnings
    return out


def decay_by_separation(state: DensityMatrixGrid, rho=None) -> tuple[np.ndarray, np.ndarray]:
    """Unique separations and the mean |rho_ij| / |rho0_ij| over pairs at each separation."""
    r = state.rho if rho is None else rho
    sep = state.separations
    ratio = np.abs(r) / np.abs(state.rho0)
    useps = np.unique(np.round(sep, 12))
    vals = np.array([ratio[np.isclose(sep, s, rtol=1e-9, atol=0)].mean() if s > 0 else 1.0 for s in useps])
    return useps, vals


def coherence_length_from_evolution(final: DensityMatrixGrid, threshold: float) -> float:
    """First separation where |rho| / |rho0| falls below ``threshold`` (log-linear interpolation)."""
    if threshold >= 1.0:
        return 0.0
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    seps, vals = decay_by_separation(final)
    for i in range(1, len(seps)):
        if vals[i] < threshold:
            l0, l1 = math.log(vals[i - 1]), math.log(vals[i])
            lt = math.log(threshold)
            return float(seps[i - 1] + (lt - l0) / (l1 - l0) * (seps[i] - seps[i - 1]))
    raise OutOfRangeError("coherence never falls below the threshold on this grid")
