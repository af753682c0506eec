"""Meson-system parameters and their dimensionless reduction."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ValidationError

__all__ = [
    "KAON_LIFETIME_RATIO",
    "KAON_Y",
    "MesonSystem",
    "ReducedSystem",
    "SystemBound",
    "BuiltinSystem",
    "make_system",
    "reduce",
    "builtin_systems",
    "get_builtin",
    "kaon_y_from_lifetime_ratio",
]

# tau(K_L) / tau(K_S)
KAON_LIFETIME_RATIO = 579.0


def kaon_y_from_lifetime_ratio(ratio: float) -> float:
    """Width asymmetry y = 2 (G_S - G_L) / (G_S + G_L) for G_S / G_L = ``ratio``."""
    if not (math.isfinite(ratio) and ratio >= 1.0):
        raise ValidationError(f"lifetime ratio must be finite and >= 1, got {ratio!r}", "ratio")
    return 2.0 * (ratio - 1.0) / (ratio + 1.0)


KAON_Y = round(kaon_y_from_lifetime_ratio(KAON_LIFETIME_RATIO), 3)


class SystemBound(enum.Enum):
    """How a tabulated x value should be read."""

    EXACT = "exact"
    UPPER_BOUND = "upper_bound"
    LOWER_BOUND = "lower_bound"


@dataclass(frozen=True)
class MesonSystem:
    """Physical parameters of a neutral meson pair, with hbar = 1.

    Widths and mass difference share one inverse-time unit; only ``delta_m``
    enters the correlations, individual masses are not modelled.
    """

    name: str
    gamma1: float
    gamma2: float
    delta_m: float

    def __post_init__(self):
        for field in ("gamma1", "gamma2"):
            value = getattr(self, field)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{field} must be a positive finite number, got {value!r}", field)
        if not (isinstance(self.delta_m, (int, float)) and math.isfinite(self.delta_m)):
            raise ValidationError(f"delta_m must be finite, got {self.delta_m!r}", "delta_m")

    @property
    def gamma(self) -> float:
        """Average width (gamma1 + gamma2) / 2."""
        return 0.5 * (self.gamma1 + self.gamma2)


@dataclass(frozen=True)
class ReducedSystem:
    """Dimensionless parameters x = |dm| / G and y = |dG| / G."""

    x: float
    y: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and self.x >= 0):
            raise ValidationError(f"x must be finite and >= 0, got {self.x!r}", "x")
        if not (math.isfinite(self.y) and 0 <= self.y < 2):
            raise ValidationError(f"y must lie in [0, 2), got {self.y!r}", "y")


@dataclass(frozen=True)
class BuiltinSystem:
    name: str
    reduced: ReducedSystem
    bound: SystemBound
    label: str

    def __iter__(self):
        # unpacks as (reduced, bound, name)
        return iter((self.reduced, self.bound, self.name))


def make_system(name: str, gamma1: float, gamma2: float, delta_m: float) -> MesonSystem:
    return MesonSystem(name, gamma1, gamma2, delta_m)


def reduce(system: MesonSystem) -> ReducedSystem:
    """Reduce a meson system to its dimensionless (x, y).

    Examples
    --------
    >>> reduce(make_system("B0", 1.0, 1.0, 0.77))
    ReducedSystem(x=0.77, y=0.0)
    """
    gamma = system.gamma
    return ReducedSystem(abs(system.delta_m) / gamma, abs(system.gamma1 - system.gamma2) / gamma)


def builtin_systems(kaon_y: float = KAON_Y) -> list[BuiltinSystem]:
    """The four tabulated meson systems, in table order.

    D0 is stored at its upper bound and Bs at its lower bound; ``bound``
    records how to read the value. Only the kaon carries a width splitting,
    configurable through ``kaon_y``.
    """
    return [
        BuiltinSystem("B0", ReducedSystem(0.77, 0.0), SystemBound.EXACT, "B0 B0bar"),
        BuiltinSystem("K0", ReducedSystem(0.95, kaon_y), SystemBound.EXACT, "K0 K0bar"),
        BuiltinSystem("D0", ReducedSystem(0.03, 0.0), SystemBound.UPPER_BOUND, "D0 D0bar"),
        BuiltinSystem("Bs", ReducedSystem(20.60, 0.0), SystemBound.LOWER_BOUND, "Bs Bsbar"),
    ]


def get_builtin(name: str, kaon_y: float = KAON_Y) -> BuiltinSystem:
    for entry in builtin_systems(kaon_y):
        if entry.name.lower() == name.lower():
            return entry
    known = ", ".join(e.name for e in builtin_systems())
    raise ValidationError(f"unknown system {name!r}; known systems: {known}", "system")
