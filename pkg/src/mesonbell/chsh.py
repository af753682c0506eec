"""Bell-CHSH functional over measurement times, its maximization and threshold.

The four measurement times play the role of analyzer settings:

    S = |E(A, B) - E(A, B')| + |E(A', B) + E(A', B')|

Local realistic models obey S <= 2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .correlation import CorrelationKind, _check_x, _check_y, kernel
from .errors import BracketingError, ValidationError
from .model import BuiltinSystem, ReducedSystem, SystemBound

__all__ = [
    "CHSH_LOCAL_BOUND",
    "TSIRELSON_BOUND",
    "VIOLATION_MARGIN",
    "ChshSettings",
    "OptimizerOptions",
    "MaxResult",
    "ThresholdResult",
    "KindVerdict",
    "chsh_value",
    "chsh_values",
    "maximize_chsh",
    "find_threshold",
    "scan_x",
    "violates",
    "verdict",
]

CHSH_LOCAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
VIOLATION_MARGIN = 1e-6


@dataclass(frozen=True)
class ChshSettings:
    """Alice's times (A, A') and Bob's times (B, B'), dimensionless."""

    tau_a: float
    tau_a_prime: float
    tau_b: float
    tau_b_prime: float

    def __post_init__(self):
        for name in ("tau_a", "tau_a_prime", "tau_b", "tau_b_prime"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"{name} must be finite and >= 0, got {value!r}", name)

    @classmethod
    def from_sequence(cls, values) -> "ChshSettings":
        values = [float(v) for v in values]
        if len(values) != 4:
            raise ValidationError(f"expected four times, got {len(values)}", "settings")
        return cls(*values)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.tau_a, self.tau_a_prime, self.tau_b, self.tau_b_prime)

    def pairs(self) -> list[tuple[float, float]]:
        """Time pairs in the order AB, AB', A'B, A'B'."""
        a, ap, b, bp = self.as_tuple()
        return [(a, b), (a, bp), (ap, b), (ap, bp)]

    def check_cap(self, t_max: float):
        if max(self.as_tuple()) > t_max:
            raise ValidationError(f"settings exceed the time cap {t_max}", "settings")


@dataclass(frozen=True)
class OptimizerOptions:
    """Knobs of the deterministic multistart maximizer.

    ``grid_points`` nodes per axis are placed on [0, t_max] with quadratic
    spacing so that the region near tau = 0, where the extrema of the
    decaying kernels sit, is resolved. Every face of the box (some times
    pinned at 0) is searched separately with an equal point budget: ``face_k`` best seeds per face plus
    the ``top_k`` best seeds overall are refined by bounded Nelder-Mead.
    """

    t_max: float = 8.0
    grid_points: int = 13
    top_k: int = 32
    face_k: int = 4
    xatol: float = 1e-7
    fatol: float = 1e-14
    max_iter: int = 4000
    agree_tol: float = 1e-6

    def __post_init__(self):
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValidationError("t_max must be positive", "t_max")
        if self.grid_points < 2:
            raise ValidationError("grid_points must be >= 2", "grid_points")
        if self.top_k < 1 or self.face_k < 0:
            raise ValidationError("top_k must be >= 1 and face_k >= 0", "top_k")

    def grid(self) -> np.ndarray:
        u = np.linspace(0.0, 1.0, self.grid_points)
        return self.t_max * u * u


@dataclass(frozen=True)
class MaxResult:
    s_max: float
    settings: ChshSettings
    evaluations: int
    converged: bool
    kind: CorrelationKind = CorrelationKind.UNITARY
    x: float = 0.0
    y: float = 0.0

    @property
    def violates(self) -> bool:
        return violates(self.s_max)


@dataclass(frozen=True)
class ThresholdResult:
    critical_x: float
    bracket: tuple[float, float]
    s_at_critical: float
    iterations: int
    kind: CorrelationKind = CorrelationKind.UNITARY
    y: float = 0.0
    scan: tuple[tuple[float, float], ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class KindVerdict:
    violates: bool
    s_max: float
    settings: ChshSettings
    caveat: str | None = None


def violates(s: float, margin: float = VIOLATION_MARGIN) -> bool:
    return s > CHSH_LOCAL_BOUND + margin


def _combine(e_ab, e_abp, e_apb, e_apbp):
    return abs(e_ab - e_abp) + abs(e_apb + e_apbp)


def chsh_values(kind, x, y, points):
    """S for an array of settings of shape (4, n); no validation."""
    a, ap, b, bp = points
    e = [kernel(kind, x, y, l, r) for l, r in ((a, b), (a, bp), (ap, b), (ap, bp))]
    return np.abs(e[0] - e[1]) + np.abs(e[2] + e[3])


def chsh_value(kind, x: float, y: float, settings: ChshSettings) -> float:
    """S for one set of measurement times.

    >>> chsh_value("unitary", 1.0, 0.0, ChshSettings(0, 0, 0, 0))
    2.0
    """
    kind = CorrelationKind.parse(kind)
    _check_x(x)
    _check_y(y)
    if not isinstance(settings, ChshSettings):
        settings = ChshSettings.from_sequence(settings)
    return float(_combine(*(kernel(kind, x, y, l, r) for l, r in settings.pairs())))


def _scalar_objective(kind, x, y, free, t_max):
    """Negated S as a function of the free coordinates only."""
    fixed = [0.0, 0.0, 0.0, 0.0]
    idx = [i for i in range(4) if free[i]]

    def f(q):
        p = list(fixed)
        for i, v in zip(idx, q):
            p[i] = min(max(float(v), 0.0), t_max)
        a, ap, b, bp = p
        return -_combine(
            kernel(kind, x, y, a, b),
            kernel(kind, x, y, a, bp),
            kernel(kind, x, y, ap, b),
            kernel(kind, x, y, ap, bp),
        )

    return f, idx


def face_nodes(opts: OptimizerOptions, dim: int) -> np.ndarray:
    """Non-zero grid nodes for one axis of a ``dim``-dimensional face.

    Every face receives about (grid_points - 1)**4 points, so low-dimensional
    faces are resolved much more finely than the full box.
    """
    n = max(1, int(round((opts.grid_points - 1) ** (4.0 / dim))))
    u = np.arange(1, n + 1) / n
    return opts.t_max * u * u


def _face_seeds(kind, x, y, opts):
    """Grid values per face of [0, t_max]^4, faces keyed by their free-mask."""
    out = []
    for free in itertools.product((False, True), repeat=4):
        nf = sum(free)
        if nf == 0:
            pts = np.zeros((4, 1))
        else:
            nodes = face_nodes(opts, nf)
            mesh = np.meshgrid(*([nodes] * nf), indexing="ij")
            pts = np.zeros((4, mesh[0].size))
            pts[np.array(free)] = np.stack([m.ravel() for m in mesh])
        out.append((free, pts, chsh_values(kind, x, y, pts)))
    return out


def _ranked(values, k):
    order = np.argsort(-values, kind="stable")
    return order[:k]


def maximize_chsh(kind, x: float, y: float = 0.0, options: OptimizerOptions | None = None) -> MaxResult:
    """Maximize S over all four times in [0, t_max].

    Deterministic: grid seeding, stable ranking, and a final
    value-then-lexicographic tie-break make repeated runs identical.

    ``converged`` is False when the best refinement hit the iteration cap or
    when the two best refined seeds disagree by more than ``agree_tol``.
    """
    kind = CorrelationKind.parse(kind)
    _check_x(x)
    _check_y(y)
    opts = options or OptimizerOptions()
    faces = _face_seeds(kind, x, y, opts)

    evaluations = sum(v.size for _, _, v in faces)
    candidates = []  # (value, settings tuple)
    for _, pts, vals in faces:
        j = int(_ranked(vals, 1)[0])
        candidates.append((float(vals[j]), tuple(float(t) for t in pts[:, j])))

    all_vals = np.concatenate([v for _, _, v in faces])
    offsets = np.cumsum([0] + [v.size for _, _, v in faces])
    chosen = set(int(i) for i in _ranked(all_vals, opts.top_k))
    for f, (_, _, vals) in enumerate(faces):
        chosen.update(int(offsets[f] + j) for j in _ranked(vals, opts.face_k))

    refined = []
    success = {}
    for gi in sorted(chosen):
        f = int(np.searchsorted(offsets, gi, side="right") - 1)
        free, pts, vals = faces[f]
        if not any(free):
            continue
        seed = pts[np.array(free), gi - offsets[f]]
        objective, idx = _scalar_objective(kind, x, y, free, opts.t_max)
        res = minimize(
            objective,
            seed,
            method="Nelder-Mead",
            bounds=[(0.0, opts.t_max)] * len(idx),
            options={"xatol": opts.xatol, "fatol": opts.fatol, "maxiter": opts.max_iter},
        )
        evaluations += int(res.nfev)
        p = [0.0] * 4
        for i, v in zip(idx, res.x):
            p[i] = min(max(float(v), 0.0), opts.t_max)
        value = -float(res.fun)
        refined.append(value)
        candidates.append((value, tuple(p)))
        success[tuple(p)] = bool(res.success)

    candidates.sort(key=lambda c: (-c[0], c[1]))
    best_value, best_point = candidates[0]
    refined.sort(reverse=True)
    agree = len(refined) < 2 or refined[0] - refined[1] <= opts.agree_tol
    # a grid point winning outright means no refinement matched it
    converged = agree and success.get(best_point, refined[0] >= best_value - opts.agree_tol if refined else True)
    settings = ChshSettings(*best_point)
    # report the value recomputed at the returned settings
    s_max = chsh_value(kind, x, y, settings)
    return MaxResult(s_max, settings, evaluations, bool(converged), kind, float(x), float(y))


def scan_x(kind, y: float, x_grid, options: OptimizerOptions | None = None) -> list[MaxResult]:
    """Maximize S independently at each x of a strictly increasing grid."""
    xs = [float(v) for v in x_grid]
    if any(v < 0 for v in xs) or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValidationError("x_grid must be non-negative and strictly increasing", "x_grid")
    out = []
    for x in xs:
        try:
            out.append(maximize_chsh(kind, x, y, options))
        except Exception as exc:
            raise type(exc)(f"at x={x}: {exc}") from exc
    return out


def find_threshold(
    kind,
    y: float = 0.0,
    tol: float = 1e-3,
    options: OptimizerOptions | None = None,
    bracket: tuple[float, float] = (0.5, 10.0),
    scan_points: int = 8,
    margin: float = VIOLATION_MARGIN,
) -> ThresholdResult:
    """Smallest x at which the maximized S exceeds 2.

    Below the threshold the supremum is exactly 2 (all times zero give
    S = 2), so the search runs on the violation predicate
    ``s_max > 2 + margin`` rather than on the sign of ``s_max - 2``.

    A coarse scan across the bracket must show a single crossing, otherwise
    :class:`BracketingError` is raised; the crossing interval is then bisected
    down to width ``tol``.
    """
    kind = CorrelationKind.parse(kind)
    if kind is CorrelationKind.RENORMALIZED:
        raise ValidationError("the renormalized kernel exceeds 2 for every x > 0; no threshold exists", "kind")
    _check_y(y)
    if not tol > 0:
        raise ValidationError("tol must be positive", "tol")
    opts = options or OptimizerOptions()

    def s_at(x):
        return maximize_chsh(kind, x, y, opts).s_max

    lo, hi = bracket
    s_lo, s_hi = s_at(lo), s_at(hi)
    while violates(s_lo, margin) and lo > 0.01:
        lo = max(lo / 2.0, 0.01)
        s_lo = s_at(lo)
    while not violates(s_hi, margin) and hi < 100.0:
        hi = min(hi * 2.0, 100.0)
        s_hi = s_at(hi)
    if violates(s_lo, margin) or not violates(s_hi, margin):
        raise BracketingError(f"no sign change of S_max - 2 in [{lo}, {hi}] for {kind.value}, y={y}")

    xs = np.linspace(lo, hi, max(scan_points, 2))
    scan = [(float(lo), s_lo)] + [(float(v), s_at(float(v))) for v in xs[1:-1]] + [(float(hi), s_hi)]
    flags = [violates(s, margin) for _, s in scan]
    crossings = sum(1 for a, b in zip(flags, flags[1:]) if a != b)
    if crossings != 1:
        raise BracketingError(f"S_max - 2 changes sign {crossings} times across the bracket; expected one")
    k = flags.index(True)
    lo, hi = scan[k - 1][0], scan[k][0]

    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if violates(s_at(mid), margin):
            hi = mid
        else:
            lo = mid
        iterations += 1
    critical = 0.5 * (lo + hi)
    return ThresholdResult(critical, (lo, hi), s_at(critical), iterations, kind, float(y), tuple(scan))


def verdict(system, kinds=(CorrelationKind.NON_UNITARY, CorrelationKind.UNITARY), options=None, bound=None):
    """Violation verdict per correlation kind for a meson system.

    ``system`` is a :class:`BuiltinSystem` or a :class:`ReducedSystem`; for
    the latter ``bound`` says how to read its x value.
    """
    if isinstance(system, BuiltinSystem):
        reduced, bound = system.reduced, system.bound
    elif isinstance(system, ReducedSystem):
        reduced, bound = system, bound or SystemBound.EXACT
    else:
        raise ValidationError("system must be a BuiltinSystem or ReducedSystem", "system")
    out = {}
    for kind in kinds:
        kind = CorrelationKind.parse(kind)
        res = maximize_chsh(kind, reduced.x, reduced.y, options)
        flag = res.violates
        caveat = None
        if bound is SystemBound.UPPER_BOUND:
            caveat = (
                "x is an upper bound: no violation for all x below it"
                if not flag
                else "x is an upper bound: smaller true values may not violate"
            )
        elif bound is SystemBound.LOWER_BOUND:
            caveat = (
                "x is a lower bound: violation for all x above it given monotone crossing"
                if flag
                else "x is a lower bound: larger true values may violate"
            )
        out[kind] = KindVerdict(flag, res.s_max, res.settings, caveat)
    return out


def with_options(options: OptimizerOptions | None, **changes) -> OptimizerOptions:
    return replace(options or OptimizerOptions(), **changes)
