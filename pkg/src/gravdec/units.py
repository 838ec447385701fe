"""Physical constants, CGS and Planck-scaled unit systems, log-safe products.

Every physics routine in the package takes a :class:`PhysicalConstants`
instance expressed in *its own* unit system.  In CGS mode that is the
configured set (``CGS``); in scaled mode it is ``G = hbar = c = 1`` so the
Planck length is exactly one internal length unit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError, DomainError

__all__ = [
    "PhysicalConstants",
    "CGS",
    "PLANCK",
    "PROTON_MASS",
    "UnitMode",
    "UnitSystem",
    "Quantity",
    "DIMENSIONS",
    "to_internal",
    "to_physical",
    "log_eval",
    "LogMagnitude",
]

#: Proton mass in grams; an input datum, not a constant of the models.
PROTON_MASS = 1.67262192e-24


@dataclass(frozen=True)
class PhysicalConstants:
    """G (cm^3 g^-1 s^-2), hbar (erg s) and c (cm/s), or their scaled images."""

    G: float = 6.674e-8
    hbar: float = 1.0546e-27
    c: float = 2.9979e10

    def __post_init__(self):
        for name in ("G", "hbar", "c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigurationError(f"constant {name} must be positive and finite, got {v!r}")

    @property
    def l_p(self) -> float:
        """Planck length sqrt(hbar G / c^3)."""
        return math.sqrt(self.hbar * self.G / self.c**3)

    @property
    def t_p(self) -> float:
        return self.l_p / self.c

    @property
    def m_p(self) -> float:
        """Planck mass sqrt(hbar c / G)."""
        return math.sqrt(self.hbar * self.c / self.G)

    @property
    def hbar2_over_G(self) -> float:
        """The mass^3 length scale separating micro and macro regimes."""
        return self.hbar**2 / self.G

    @classmethod
    def from_mapping(cls, data: Mapping[str, float]) -> "PhysicalConstants":
        unknown = set(data) - {"G", "hbar", "c"}
        if unknown:
            raise ConfigurationError(f"unknown constant keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def as_dict(self) -> dict:
        return {"G": self.G, "hbar": self.hbar, "c": self.c}


CGS = PhysicalConstants()
PLANCK = PhysicalConstants(G=1.0, hbar=1.0, c=1.0)


# (length, time, mass) exponents
DIMENSIONS: dict[str, tuple[int, int, int]] = {
    "dimensionless": (0, 0, 0),
    "length": (1, 0, 0),
    "area": (2, 0, 0),
    "volume": (3, 0, 0),
    "length^5": (5, 0, 0),
    "wavenumber": (-1, 0, 0),
    "time": (0, 1, 0),
    "rate": (0, -1, 0),
    "mass": (0, 0, 1),
    "density": (-3, 0, 1),
    "velocity": (1, -1, 0),
    "acceleration": (1, -2, 0),
    "potential": (2, -2, 0),
    "energy": (2, -2, 1),
    "action": (2, -1, 1),
    "G": (3, -2, -1),
}


class UnitMode(str, enum.Enum):
    CGS = "CGS"
    SCALED = "Scaled"


@dataclass(frozen=True)
class Quantity:
    value: float
    dims: tuple[int, int, int]

    @classmethod
    def of(cls, value: float, kind: str | Sequence[int]) -> "Quantity":
        return cls(float(value), _signature(kind))


def _signature(kind: str | Sequence[int]) -> tuple[int, int, int]:
    if isinstance(kind, str):
        try:
            return DIMENSIONS[kind]
        except KeyError:
            raise ConfigurationError(f"unknown dimension signature {kind!r}") from None
    sig = tuple(kind)
    if len(sig) != 3 or not all(isinstance(p, int) for p in sig):
        raise ConfigurationError(f"dimension signature must be three integer powers, got {kind!r}")
    return sig  # type: ignore[return-value]


@dataclass(frozen=True)
class UnitSystem:
    """Scales (cm, s, g per internal unit) relating internal numbers to CGS.

    ``UnitSystem.scaled(consts)`` uses Planck units of ``consts``.
    """

    mode: UnitMode = UnitMode.CGS
    length_scale: float = 1.0
    time_scale: float = 1.0
    mass_scale: float = 1.0
    physical: PhysicalConstants = field(default=CGS)

    @classmethod
    def cgs(cls, consts: PhysicalConstants = CGS) -> "UnitSystem":
        return cls(UnitMode.CGS, 1.0, 1.0, 1.0, consts)

    @classmethod
    def scaled(cls, consts: PhysicalConstants = CGS) -> "UnitSystem":
        return cls(UnitMode.SCALED, consts.l_p, consts.t_p, consts.m_p, consts)

    @classmethod
    def from_name(cls, name: str, consts: PhysicalConstants = CGS) -> "UnitSystem":
        try:
            mode = {m.value.lower(): m for m in UnitMode}[str(name).lower()]
        except KeyError:
            raise ConfigurationError(f"unknown unit mode {name!r}") from None
        return cls.cgs(consts) if mode is UnitMode.CGS else cls.scaled(consts)

    def factor(self, kind: str | Sequence[int]) -> float:
        L, T, M = _signature(kind)
        return self.length_scale**L * self.time_scale**T * self.mass_scale**M

    @property
    def constants(self) -> PhysicalConstants:
        """The physical constants expressed in this system's internal units."""
        if self.mode is UnitMode.CGS:
            return self.physical
        p = self.physical
        return PhysicalConstants(
            G=p.G / self.factor("G"),
            hbar=p.hbar / self.factor("action"),
            c=p.c / self.factor("velocity"),
        )


def to_internal(q: Quantity | float, units: UnitSystem, kind: str | Sequence[int] | None = None) -> float:
    """Rescale a CGS value into ``units``.  Pass a Quantity, or a bare value plus ``kind``."""
    if not isinstance(q, Quantity):
        if kind is None:
            raise ConfigurationError("a bare value needs a dimension signature")
        q = Quantity.of(q, kind)
    return q.value / units.factor(q.dims)


def to_physical(value: float, units: UnitSystem, kind: str | Sequence[int]) -> float:
    """Inverse of :func:`to_internal`: internal number -> CGS value."""
    return value * units.factor(kind)


@dataclass(frozen=True)
class LogMagnitude:
    mantissa: float
    exponent: int

    @property
    def log10(self) -> float:
        return math.log10(self.mantissa) + self.exponent

    def __float__(self) -> float:
        return self.mantissa * 10.0**self.exponent

    def __repr__(self) -> str:
        return f"{self.mantissa:.6g}e{self.exponent:+d}"


def log_eval(factors: Iterable[tuple[float, float] | float]) -> LogMagnitude:
    """Evaluate a product of powers ``prod(x_i ** p_i)`` in base-10 logs.

    ``factors`` holds ``(magnitude, power)`` pairs or bare magnitudes (power 1).
    Returns mantissa in [1, 10) and integer exponent, so products such as
    hbar^2 / (G m^3) never overflow intermediate steps.
    """
    total = []
    for f in factors:
        x, p = (f, 1.0) if not isinstance(f, tuple) else f
        if not x > 0:
            raise DomainError(f"log_eval needs positive factors, got {x!r}")
        total.append(p * math.log10(x))
    s = math.fsum(total)
    e = math.floor(s)
    m = 10.0 ** (s - e)
    if m >= 10.0:  # rounding at the boundary
        m, e = m / 10.0, e + 1
    return LogMagnitude(m, int(e))
