"""Stochastic potentials: the colored metric field, the white potential and the power family.

The metric perturbation is synthesized as a finite Fourier sum

    gamma(x, t) = sum_j A_j cos(k_j . x - c |k_j| t + alpha_j),   A_j = 2 f(k_j) sqrt(w_j)

with f(k) = l_p^(2/3) k^(-5/6), a uniform random phase alpha_j per realization and
w_j the k-space volume per mode divided by (2 pi)^3.  With that weight the
ensemble two-point function converges to (1/pi^2) int k^2 f^2 sinc(kr) cos(kc tau) dk,
the band-limited version of the analytic kernel in ``correlation``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ._numerics import rng_for, spawn_seeds
from .errors import ConfigurationError, DomainError, ResourceError
from .units import PLANCK, PhysicalConstants

__all__ = [
    "ModeSet",
    "FieldRealization",
    "Ensemble",
    "build_mode_set",
    "sample_gamma",
    "mode_amplitude",
    "point_variance",
    "WhiteNoisePotential",
    "sample_white_potential",
    "sample_white_steps",
    "ball_mutual_kernel",
    "PowerFamilySpec",
    "family_sample_variance",
]

SAMPLINGS = ("isotropic-random", "lattice")
MEASURES = ("k2", "log")
MAX_MODES = 1_000_000

# stream ids below one realization seed
_S_MODES, _S_PHASE, _S_AMP, _S_POINTS = 0, 1, 2, 3


def mode_amplitude(k, constants: PhysicalConstants = PLANCK):
    """f(k) = l_p^(2/3) k^(-5/6)."""
    return constants.l_p ** (2.0 / 3.0) * np.asarray(k, dtype=float) ** (-5.0 / 6.0)


def point_variance(k_min: float, k_max: float, constants: PhysicalConstants = PLANCK) -> float:
    """(2/(2 pi)^3) int f^2 d^3k over the shell, i.e. <gamma^2> of the band-limited field."""
    # (1/pi^2) l_p^(4/3) int k^(1/3) dk
    return constants.l_p ** (4.0 / 3.0) * 0.75 * (k_max ** (4.0 / 3.0) - k_min ** (4.0 / 3.0)) / math.pi**2


def _draw_isotropic(rng, n, k_min, k_max, measure):
    u = rng.random(n)
    if measure == "k2":
        k = (k_min**3 + u * (k_max**3 - k_min**3)) ** (1.0 / 3.0)
        w = np.full(n, (k_max**3 - k_min**3) / (6.0 * math.pi**2 * n))
    else:
        lr = math.log(k_max / k_min)
        k = k_min * np.exp(u * lr)
        w = 4.0 * math.pi * k**3 * lr / ((2.0 * math.pi) ** 3 * n)
    cos_t = 2.0 * rng.random(n) - 1.0
    phi = 2.0 * math.pi * rng.random(n)
    sin_t = np.sqrt(1.0 - cos_t**2)
    kv = k[:, None] * np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=1)
    return kv, w


@dataclass(frozen=True, eq=False)
class ModeSet:
    """A finite set of wave vectors with their f(k) amplitudes and volume weights.

    For isotropic-random sampling the stored vectors are one draw; realizations
    redraw their own vectors by default (``redraw=True``) so the ensemble average
    is the band-limited continuum kernel rather than that of one fixed lattice.
    ``phase`` holds reference phases (zeros unless given); realizations draw theirs.
    """

    k_vec: np.ndarray
    weight: np.ndarray
    box_length: float
    k_min: float
    k_max: float
    sampling: str = "isotropic-random"
    measure: str = "k2"
    constants: PhysicalConstants = PLANCK
    phase: np.ndarray | None = None
    redraw: bool = True
    amplitude_stats: str = "fixed"

    def __post_init__(self):
        k = self.k_norm
        if k.size and (k.min() < self.k_min * (1 - 1e-12) or k.max() > self.k_max * (1 + 1e-12)):
            raise DomainError("mode outside [k_min, k_max]")
        if self.amplitude_stats not in ("fixed", "gaussian"):
            raise ConfigurationError(f"amplitude_stats must be 'fixed' or 'gaussian', got {self.amplitude_stats!r}")

    @property
    def n_modes(self) -> int:
        return int(self.k_vec.shape[0])

    @property
    def k_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.k_vec**2, axis=1))

    @property
    def amplitude(self) -> np.ndarray:
        return mode_amplitude(self.k_norm, self.constants)

    @property
    def omega(self) -> np.ndarray:
        """Angular frequencies c|k| (the wave-equation dispersion)."""
        return self.constants.c * self.k_norm

    @property
    def modes(self) -> list[dict]:
        ph = self.phase if self.phase is not None else np.zeros(self.n_modes)
        return [
            {"k_vec": tuple(map(float, kv)), "amplitude": float(a), "phase": float(p)}
            for kv, a, p in zip(self.k_vec, self.amplitude, ph)
        ]

    def to_dict(self) -> dict:
        return {
            "format": "gravdec.modeset/1",
            "k_min": self.k_min,
            "k_max": self.k_max,
            "box_length": self.box_length,
            "sampling": self.sampling,
            "measure": self.measure,
            "redraw": self.redraw,
            "amplitude_stats": self.amplitude_stats,
            "constants": self.constants.as_dict(),
            "k_vec": self.k_vec.tolist(),
            "weight": self.weight.tolist(),
            "phase": None if self.phase is None else self.phase.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ModeSet":
        if d.get("format") != "gravdec.modeset/1":
            raise ConfigurationError("not a serialized mode set")
        return cls(
            k_vec=np.asarray(d["k_vec"], dtype=float).reshape(-1, 3),
            weight=np.asarray(d["weight"], dtype=float),
            box_length=float(d["box_length"]),
            k_min=float(d["k_min"]),
            k_max=float(d["k_max"]),
            sampling=d["sampling"],
            measure=d.get("measure", "k2"),
            constants=PhysicalConstants.from_mapping(d["constants"]),
            phase=None if d.get("phase") is None else np.asarray(d["phase"], dtype=float),
            redraw=bool(d.get("redraw", True)),
            amplitude_stats=d.get("amplitude_stats", "fixed"),
        )

    @classmethod
    def from_json(cls, s: str) -> "ModeSet":
        return cls.from_dict(json.loads(s))


def build_mode_set(
    k_min: float,
    k_max: float,
    n_modes: int,
    box_length: float,
    sampling: str = "isotropic-random",
    constants: PhysicalConstants = PLANCK,
    seed: int = 0,
    measure: str = "k2",
    redraw: bool = True,
    amplitude_stats: str = "fixed",
    max_modes: int = MAX_MODES,
) -> ModeSet:
    """Populate a mode set on the shell k_min <= |k| <= k_max.

    isotropic-random: directions uniform on the sphere, |k| from the k^2 dk
    measure (or log-uniform with ``measure='log'``, importance weights recorded).
    lattice: every wave vector 2 pi n / box_length in the shell; ``n_modes`` is
    then only checked against the budget.
    """
    if not (k_min > 0):
        raise DomainError(f"k_min must be positive, got {k_min}")
    if not (k_max > k_min):
        raise DomainError("need k_min < k_max")
    if sampling not in SAMPLINGS:
        raise ConfigurationError(f"unknown sampling {sampling!r}")
    if measure not in MEASURES:
        raise ConfigurationError(f"unknown k measure {measure!r}")
    if sampling == "lattice":
        dk = 2.0 * math.pi / box_length
        nmax = int(math.floor(k_max / dk))
        est = 4.0 / 3.0 * math.pi * (nmax + 1) ** 3
        if est > 8 * max_modes:
            raise ResourceError(f"lattice shell holds ~{est:.3g} modes, budget {max_modes}")
        r = np.arange(-nmax, nmax + 1)
        n = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
        kv = dk * n.astype(float)
        kn = np.sqrt(np.sum(kv**2, axis=1))
        keep = (kn >= k_min * (1 - 1e-12)) & (kn <= k_max * (1 + 1e-12))
        kv = kv[keep]
        if kv.shape[0] > max_modes:
            raise ResourceError(f"{kv.shape[0]} lattice modes exceed budget {max_modes}")
        w = np.full(kv.shape[0], 1.0 / box_length**3)
        return ModeSet(kv, w, float(box_length), float(k_min), float(k_max), sampling, measure,
                       constants, None, False, amplitude_stats)
    if n_modes < 1:
        raise DomainError("n_modes must be >= 1")
    if n_modes > max_modes:
        raise ResourceError(f"{n_modes} modes exceed budget {max_modes}")
    kv, w = _draw_isotropic(rng_for(seed, _S_MODES), int(n_modes), k_min, k_max, measure)
    return ModeSet(kv, w, float(box_length), float(k_min), float(k_max), sampling, measure,
                   constants, None, redraw, amplitude_stats)


@dataclass(frozen=True, eq=False)
class FieldRealization:
    """Member beta of the metric family: a mode set plus the seed fixing its phases."""

    mode_set: ModeSet
    seed: int
    label: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def arrays(self):
        """(k_vec, omega, A, alpha) for this realization; pure function of (seed, mode_set)."""
        if "arr" not in self._cache:
            ms = self.mode_set
            n = ms.n_modes
            if ms.sampling == "isotropic-random" and ms.redraw:
                kv, w = _draw_isotropic(rng_for(self.seed, _S_MODES), n, ms.k_min, ms.k_max, ms.measure)
            else:
                kv, w = ms.k_vec, ms.weight
            alpha = 2.0 * math.pi * rng_for(self.seed, _S_PHASE).random(n)
            kn = np.sqrt(np.sum(kv**2, axis=1))
            amp = 2.0 * mode_amplitude(kn, ms.constants) * np.sqrt(w)
            if ms.amplitude_stats == "gaussian":
                # complex Gaussian c: |c|^2 exponential with mean f^2
                amp = amp * np.sqrt(rng_for(self.seed, _S_AMP).exponential(1.0, n))
            self._cache["arr"] = (kv, ms.constants.c * kn, amp, alpha)
        return self._cache["arr"]


def sample_gamma(r: FieldRealization, x, t) -> np.ndarray | float:
    """gamma_beta(x, t).  x has shape (3,) or (n, 3); t is a scalar or length-n array."""
    kv, om, amp, alpha = r.arrays()
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    t = np.broadcast_to(np.asarray(t, dtype=float), (x2.shape[0],))
    ph = x2 @ kv.T - t[:, None] * om[None, :] + alpha[None, :]
    g = np.cos(ph) @ amp
    return float(g[0]) if single else g


class Ensemble:
    """n realizations whose seeds are spawned from one master seed."""

    def __init__(self, mode_set: ModeSet, n: int, master_seed: int = 0):
        if n < 1:
            raise DomainError("ensemble needs at least one realization")
        self.mode_set = mode_set
        self.master_seed = int(master_seed)
        self.seeds = spawn_seeds(master_seed, n)

    def __len__(self):
        return len(self.seeds)

    def __getitem__(self, i) -> FieldRealization:
        return FieldRealization(self.mode_set, self.seeds[i], i)

    def __iter__(self) -> Iterator[FieldRealization]:
        return (self[i] for i in range(len(self)))

    def to_json(self) -> str:
        return json.dumps({"format": "gravdec.ensemble/1", "master_seed": self.master_seed,
                           "seeds": self.seeds, "mode_set": self.mode_set.to_dict()})

    @classmethod
    def from_json(cls, s: str) -> "Ensemble":
        d = json.loads(s)
        if d.get("format") != "gravdec.ensemble/1":
            raise ConfigurationError("not a serialized ensemble")
        e = cls(ModeSet.from_dict(d["mode_set"]), len(d["seeds"]), d["master_seed"])
        if e.seeds != d["seeds"]:
            raise ConfigurationError("stored seeds do not match the master seed")
        return e


# ---------------------------------------------------------------------------
# white potential


def ball_mutual_kernel(r, b: float):
    """Mutual 1/|x - x'| integral of two unit-mass uniform balls of radius b at distance r.

    Equals 1/r once the balls are disjoint (r >= 2b) and (6/5)/b at r = 0.
    """
    r = np.asarray(r, dtype=float)
    x = r / b
    inner = (1.2 - 0.5 * x**2 + 0.1875 * x**3 - x**5 / 160.0) / b
    with np.errstate(divide="ignore"):
        outer = 1.0 / r
    return np.where(x < 2.0, inner, outer)


class WhiteNoisePotential:
    """Spatially correlated, temporally white potential on a cubic lattice.

    Each cell is represented by a uniform ball of the cell volume; the cell
    covariance is G hbar W(|x_i - x_j|) / dt with W the ball mutual kernel, i.e.
    exactly G hbar / r for cells farther apart than one ball diameter and the
    cell-averaged value below that.  Steps draw from independent sub-streams.
    """

    def __init__(self, dx: float, shape: Sequence[int], dt: float, seed: int = 0,
                 constants: PhysicalConstants = PLANCK, n_steps: int | None = None, max_cells: int = 4096):
        shape = tuple(int(s) for s in shape)
        if dx <= 0 or dt <= 0 or not shape or min(shape) < 1:
            raise DomainError("need dx > 0, dt > 0 and a nonempty grid")
        n = int(np.prod(shape))
        if n > max_cells:
            raise ResourceError(f"{n} cells exceed the dense-covariance budget {max_cells}")
        self.dx, self.shape, self.dt, self.seed = float(dx), shape, float(dt), int(seed)
        self.constants, self.n_steps = constants, n_steps
        self.cell_radius = dx * (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0)
        idx = np.stack(np.meshgrid(*[np.arange(s) for s in shape], indexing="ij"), axis=-1).reshape(n, -1)
        self.positions = dx * idx.astype(float)
        d = np.sqrt(((self.positions[:, None, :] - self.positions[None, :, :]) ** 2).sum(-1))
        self.covariance = constants.G * constants.hbar * ball_mutual_kernel(d, self.cell_radius) / dt
        self._chol = np.linalg.cholesky(self.covariance)
        self._last = (None, None)

    @property
    def strength(self) -> float:
        return math.sqrt(self.constants.G * self.constants.hbar)

    def cell_index(self, cell) -> int:
        c = np.atleast_1d(np.asarray(cell))
        if c.size == 1 and len(self.shape) > 1:
            flat = int(c[0])
            if not 0 <= flat < self.positions.shape[0]:
                raise DomainError(f"cell {cell} outside grid")
            return flat
        if c.size != len(self.shape) or np.any(c < 0) or np.any(c >= np.array(self.shape)):
            raise DomainError(f"cell {cell} outside grid {self.shape}")
        return int(np.ravel_multi_index(tuple(int(v) for v in c), self.shape))

    def field(self, step: int) -> np.ndarray:
        step = int(step)
        if step < 0 or (self.n_steps is not None and step >= self.n_steps):
            raise DomainError(f"step {step} outside [0, {self.n_steps})")
        if self._last[0] != step:
            z = rng_for(self.seed, step).standard_normal(self.positions.shape[0])
            self._last = (step, self._chol @ z)
        return self._last[1]


def sample_white_potential(w: WhiteNoisePotential, cell, step: int) -> float:
    """Potential value (cm^2/s^2 in CGS) at one cell during one time step."""
    i = w.cell_index(cell)
    return float(w.field(step)[i])


def sample_white_steps(w: WhiteNoisePotential, steps: Sequence[int]) -> np.ndarray:
    """Fields for many steps at once, shape (len(steps), n_cells)."""
    out = np.empty((len(steps), w.positions.shape[0]))
    for i, s in enumerate(steps):
        out[i] = w.field(s)
    return out


# ---------------------------------------------------------------------------
# power family


@dataclass(frozen=True)
class PowerFamilySpec:
    """Separable correlation K^2 P(x, x') T^m t^n1 t'^n2 with P(x, x) = R^(2j)."""

    j: float
    m: float
    n1: float
    n2: float
    K_const: float = 1.0

    def __post_init__(self):
        if not (self.n1 > -1 and self.n2 > -1):
            raise DomainError(f"need n1, n2 > -1 for finite time integrals, got {self.n1}, {self.n2}")

    @property
    def time_power(self) -> float:
        return self.m + self.n1 + self.n2 + 2.0

    def as_dict(self) -> dict:
        return {"j": self.j, "m": self.m, "n1": self.n1, "n2": self.n2, "K_const": self.K_const}


def family_sample_variance(spec: PowerFamilySpec, R: float, T: float, constants: PhysicalConstants = PLANCK) -> float:
    """Delta s^2 = (K^2 c^2 / 4) R^(2j) T^(m+n1+n2+2) / ((n1+1)(n2+1))."""
    if not (spec.n1 > -1 and spec.n2 > -1):
        raise DomainError("n1, n2 must exceed -1")
    if R <= 0 or T <= 0:
        raise DomainError("R and T must be positive")
    c = constants.c
    return spec.K_const**2 * c**2 / 4.0 * R ** (2 * spec.j) * T**spec.time_power / ((spec.n1 + 1) * (spec.n2 + 1))
