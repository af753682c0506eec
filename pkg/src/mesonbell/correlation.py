"""Correlation kernels of an entangled neutral-meson pair.

All times are dimensionless, tau = G * t with G the average width. The two
mass eigenstates decay with reduced widths ``1 + y/2`` and ``1 - y/2``.

Three kernels are provided:

* non-unitary: flavour question on surviving mesons only (decay scores 0),
* unitary: "meson or not" question, decay products answer "not",
* renormalized: the non-unitary value conditioned on both mesons surviving.

:func:`joint_table` gives outcome-level probabilities derived from the
amplitudes of the evolved singlet state; the closed forms follow from it and
the tests check that identity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DegenerateConditioningError, DomainError, ValidationError

__all__ = [
    "CorrelationKind",
    "Outcome",
    "TimePair",
    "JointOutcomeTable",
    "corr_nonunitary",
    "corr_unitary",
    "corr_renormalized",
    "correlation",
    "kernel",
    "joint_table",
    "corr_from_table",
    "survival_probability",
]

# exponent beyond which exp(-r) is flushed to zero
EXP_CUTOFF = 700.0
# negative probabilities smaller than this are rounding noise
CLAMP_TOL = 1e-15


class CorrelationKind(enum.Enum):
    NON_UNITARY = "nonunitary"
    UNITARY = "unitary"
    RENORMALIZED = "renormalized"

    @classmethod
    def parse(cls, value) -> "CorrelationKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValidationError(
            f"unknown correlation kind {value!r}; expected one of "
            + ", ".join(k.value for k in cls),
            "kind",
        )


class Outcome(enum.IntEnum):
    """Per-side measurement outcome, in the fixed table order."""

    MESON_ALIVE = 0
    ANTIMESON_ALIVE = 1
    DECAYED = 2


# question I: +1 for a surviving meson, -1 for anything else
_UNITARY_VALUES = np.array([1.0, -1.0, -1.0])
# question II: flavour of survivors, decay scores 0
_NON_UNITARY_VALUES = np.array([1.0, -1.0, 0.0])


@dataclass(frozen=True)
class TimePair:
    """Dimensionless left/right measurement times."""

    tau_l: float
    tau_r: float

    def __post_init__(self):
        for field in ("tau_l", "tau_r"):
            value = getattr(self, field)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"{field} must be finite and >= 0, got {value!r}", field)

    @property
    def delta(self) -> float:
        return self.tau_l - self.tau_r

    def swapped(self) -> "TimePair":
        return TimePair(self.tau_r, self.tau_l)


def _as_pair(times) -> TimePair:
    if isinstance(times, TimePair):
        return times
    tau_l, tau_r = times
    return TimePair(float(tau_l), float(tau_r))


def _check_y(y):
    if not (math.isfinite(y) and 0 <= y < 2):
        raise DomainError(f"y must lie in [0, 2), got {y!r}", "y")


def _check_x(x):
    if not (math.isfinite(x) and x >= 0):
        raise DomainError(f"x must be finite and >= 0, got {x!r}", "x")


def _decay(rate_time):
    """exp(-r) with exp(-r) := 0 for r > EXP_CUTOFF."""
    if isinstance(rate_time, np.ndarray):
        r = np.minimum(rate_time, EXP_CUTOFF)
        return np.where(rate_time > EXP_CUTOFF, 0.0, np.exp(-r))
    return 0.0 if rate_time > EXP_CUTOFF else math.exp(-rate_time)


def _one_minus_decay(rate_time):
    if isinstance(rate_time, np.ndarray):
        r = np.minimum(rate_time, EXP_CUTOFF)
        return np.where(rate_time > EXP_CUTOFF, 1.0, -np.expm1(-r))
    return 1.0 if rate_time > EXP_CUTOFF else -math.expm1(-rate_time)


def _nonunitary(x, tau_l, tau_r):
    cos = np.cos if isinstance(tau_l, np.ndarray) or isinstance(tau_r, np.ndarray) else math.cos
    return -cos(x * (tau_l - tau_r)) * _decay(tau_l + tau_r)


def _unitary(x, y, tau_l, tau_r):
    g1, g2 = 1.0 + 0.5 * y, 1.0 - 0.5 * y
    extra = 0.5 * _one_minus_decay(g1 * tau_l) * _one_minus_decay(g2 * tau_r)
    extra = extra + 0.5 * _one_minus_decay(g2 * tau_l) * _one_minus_decay(g1 * tau_r)
    return _nonunitary(x, tau_l, tau_r) + extra


def _renormalized(x, y, tau_l, tau_r):
    delta = tau_l - tau_r
    if isinstance(delta, np.ndarray):
        return -np.cos(x * delta) / np.cosh(0.5 * y * delta)
    return -math.cos(x * delta) / math.cosh(0.5 * y * delta)


def kernel(kind, x, y, tau_l, tau_r):
    """Evaluate a kernel without validation; broadcasts over numpy arrays.

    This is the hot path used by the optimizer and the vectorized grid
    search. Public callers should prefer :func:`correlation`.
    """
    kind = CorrelationKind.parse(kind)
    if kind is CorrelationKind.NON_UNITARY:
        return _nonunitary(x, tau_l, tau_r)
    if kind is CorrelationKind.UNITARY:
        return _unitary(x, y, tau_l, tau_r)
    return _renormalized(x, y, tau_l, tau_r)


def corr_nonunitary(x: float, times) -> float:
    """Flavour correlation ignoring decay products: -cos(x dtau) exp(-(tau_l + tau_r)).

    Independent of y in dimensionless form.
    """
    _check_x(x)
    t = _as_pair(times)
    return _nonunitary(x, t.tau_l, t.tau_r)


def corr_unitary(x: float, y: float, times) -> float:
    """Question-I correlation including the decay-product contributions."""
    _check_x(x)
    _check_y(y)
    t = _as_pair(times)
    return _unitary(x, y, t.tau_l, t.tau_r)


def corr_renormalized(x: float, y: float, times) -> float:
    """Flavour correlation conditioned on both mesons surviving.

    Equals -cos(x dtau) / cosh(y dtau / 2); depends on the times only
    through their difference.
    """
    _check_x(x)
    _check_y(y)
    t = _as_pair(times)
    return _renormalized(x, y, t.tau_l, t.tau_r)


def correlation(kind, x: float, y: float, times) -> float:
    kind = CorrelationKind.parse(kind)
    if kind is CorrelationKind.NON_UNITARY:
        _check_y(y)
        return corr_nonunitary(x, times)
    if kind is CorrelationKind.UNITARY:
        return corr_unitary(x, y, times)
    return corr_renormalized(x, y, times)


def survival_probability(y: float, times) -> float:
    """Probability that both mesons are still undecayed."""
    _check_y(y)
    t = _as_pair(times)
    return _decay(t.tau_l + t.tau_r) * math.cosh(0.5 * y * t.delta)


@dataclass(frozen=True, eq=False)
class JointOutcomeTable:
    """3x3 joint probabilities indexed ``p[left][right]`` in :class:`Outcome` order."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (3, 3):
            raise ValidationError(f"table must be 3x3, got shape {p.shape}", "p")
        if np.any(p < 0) or np.any(p > 1) or abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError("table entries must lie in [0, 1] and sum to 1", "p")
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    def __getitem__(self, index):
        return self.p[index]

    @property
    def both_alive(self) -> float:
        return float(self.p[:2, :2].sum())

    def swapped(self) -> "JointOutcomeTable":
        return JointOutcomeTable(self.p.T)


def joint_table(x: float, y: float, times) -> JointOutcomeTable:
    """Joint outcome probabilities at fixed left/right times.

    The evolved singlet restricted to undecayed mesons is
    ``(e^{-i l1 t_l - i l2 t_r} |1>|2> - e^{-i l2 t_l - i l1 t_r} |2>|1>) / sqrt 2``
    with ``|1,2> = (|M> +- |Mbar>) / sqrt 2``. Projecting onto flavour pairs
    gives the four alive-alive cells. A single side's survival probability
    does not depend on the other side's evolution, so alive-decayed cells
    follow from the one-sided marginals, and decayed-decayed from
    normalization.

    Raises
    ------
    DomainError
        If ``y`` is outside [0, 2) or ``x`` is negative.
    ConsistencyError
        If a cell comes out more negative than rounding can explain.
    """
    _check_x(x)
    _check_y(y)
    t = _as_pair(times)
    tl, tr = t.tau_l, t.tau_r
    g1, g2 = 1.0 + 0.5 * y, 1.0 - 0.5 * y

    direct = _decay(g1 * tl + g2 * tr) + _decay(g2 * tl + g1 * tr)
    interference = 2.0 * _decay(tl + tr) * math.cos(x * (tl - tr))
    like = 0.125 * (direct - interference)
    unlike = 0.125 * (direct + interference)
    left_alive = 0.25 * (_decay(g1 * tl) + _decay(g2 * tl))
    right_alive = 0.25 * (_decay(g1 * tr) + _decay(g2 * tr))

    p = np.empty((3, 3))
    p[0, 0] = p[1, 1] = like
    p[0, 1] = p[1, 0] = unlike
    p[0, 2] = p[1, 2] = left_alive - like - unlike
    p[2, 0] = p[2, 1] = right_alive - like - unlike
    p[2, 2] = 1.0 - p[:2, :].sum() - p[2, :2].sum()

    worst = p.min()
    if worst < -CLAMP_TOL:
        raise ConsistencyError(f"negative probability {worst:.3e} in joint table at {t}")
    np.clip(p, 0.0, None, out=p)
    return JointOutcomeTable(p)


def corr_from_table(table: JointOutcomeTable, kind) -> float:
    """Product expectation of the per-side answers under a question.

    Renormalized divides the non-unitary value by the both-alive mass.
    """
    kind = CorrelationKind.parse(kind)
    p = table.p
    if kind is CorrelationKind.UNITARY:
        return float(_UNITARY_VALUES @ p @ _UNITARY_VALUES)
    value = float(_NON_UNITARY_VALUES @ p @ _NON_UNITARY_VALUES)
    if kind is CorrelationKind.NON_UNITARY:
        return value
    mass = table.both_alive
    if mass <= 0.0:
        raise DegenerateConditioningError("no probability mass on both-alive outcomes")
    return value / mass
