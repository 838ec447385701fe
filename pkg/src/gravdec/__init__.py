"""gravdec: gravity-induced decoherence, colored (K) versus white (D) metric noise.

Modules: units, noise, correlation, bounds, decoherence, master, cli.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigurationError,
    DivergenceError,
    DomainError,
    GravdecError,
    LightConeError,
    NumericalError,
    OutOfRangeError,
    PerturbativityError,
    RegularizationError,
    ResourceError,
    StabilityError,
)
from .units import CGS, PLANCK, PROTON_MASS, PhysicalConstants, UnitSystem  # noqa: F401
