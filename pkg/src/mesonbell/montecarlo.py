"""Pseudo-experiments: event generation and correlation estimators.

Random numbers come from numpy's Philox4x64 counter-based generator. The key
is ``(seed, setting_index)`` and event ``i`` of a setting consumes output word
``i`` of that stream, so every event is a pure function of
``(seed, setting_index, i)``. Blocks of events can therefore be generated in
any order or on any number of workers with identical results.

Each event's outcome pair is drawn by inverse CDF over the 9 cells of
:func:`~mesonbell.correlation.joint_table` in row-major order::

    (M, M) (M, Mbar) (M, decayed) (Mbar, M) ... (decayed, decayed)
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chsh import ChshSettings
from .correlation import CorrelationKind, Outcome, joint_table
from .errors import DegenerateSampleError, ValidationError

__all__ = [
    "SettingPair",
    "EventRecord",
    "EventSample",
    "EstimatorResult",
    "sample_events",
    "estimate_correlation",
    "estimate_chsh",
]

_SEED_MASK = (1 << 64) - 1
# Philox emits 4 words per counter step
_WORDS_PER_STEP = 4


class SettingPair(enum.IntEnum):
    AB = 0
    AB_PRIME = 1
    A_PRIME_B = 2
    A_PRIME_B_PRIME = 3

    @property
    def label(self) -> str:
        return ("AB", "AB'", "A'B", "A'B'")[self]


@dataclass(frozen=True)
class EventRecord:
    setting_index: SettingPair
    left_outcome: Outcome
    right_outcome: Outcome


@dataclass(frozen=True, eq=False)
class EventSample:
    """Column-oriented event list: one int8 array per field."""

    setting_index: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        n = len(self.setting_index)
        if len(self.left) != n or len(self.right) != n:
            raise ValidationError("event columns must have equal length", "events")

    def __len__(self):
        return len(self.setting_index)

    def __eq__(self, other):
        if not isinstance(other, EventSample):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in ("setting_index", "left", "right")
        )

    @classmethod
    def from_records(cls, records) -> "EventSample":
        records = list(records)
        cols = np.array(
            [(int(r.setting_index), int(r.left_outcome), int(r.right_outcome)) for r in records], dtype=np.int8
        ).reshape(-1, 3)
        return cls(cols[:, 0].copy(), cols[:, 1].copy(), cols[:, 2].copy())

    def records(self):
        for s, l, r in zip(self.setting_index, self.left, self.right):
            yield EventRecord(SettingPair(int(s)), Outcome(int(l)), Outcome(int(r)))

    def for_setting(self, setting) -> "EventSample":
        mask = self.setting_index == int(setting)
        return EventSample(self.setting_index[mask], self.left[mask], self.right[mask])

    def settings_present(self) -> list[SettingPair]:
        return [SettingPair(int(s)) for s in np.unique(self.setting_index)]


@dataclass(frozen=True)
class EstimatorResult:
    value: float
    std_error: float
    n_used: int
    n_total: int
    flags: tuple[str, ...] = ()


def _uniforms(seed: int, setting: int, start: int, count: int) -> np.ndarray:
    key = np.array([seed & _SEED_MASK, setting], dtype=np.uint64)
    bitgen = np.random.Philox(key=key)
    bitgen.advance(start // _WORDS_PER_STEP)
    return np.random.Generator(bitgen).random(count)


def _draw_block(cdf, seed, setting, start, count):
    u = _uniforms(seed, setting, start, count)
    cells = np.searchsorted(cdf, u, side="right")
    return np.minimum(cells, 8).astype(np.int8)


def sample_events(
    x: float,
    y: float,
    settings: ChshSettings,
    n_per_setting: int,
    seed: int,
    n_workers: int = 1,
    block_size: int = 1 << 18,
) -> EventSample:
    """Draw ``n_per_setting`` events at each of the four time pairs.

    Events are ordered by setting (AB, AB', A'B, A'B') and then by event
    index. The output is bit-identical for any ``n_workers`` and
    ``block_size``.
    """
    if int(n_per_setting) < 1:
        raise ValidationError("n_per_setting must be >= 1", "n_per_setting")
    if n_workers < 1:
        raise ValidationError("n_workers must be >= 1", "n_workers")
    if block_size < _WORDS_PER_STEP or block_size % _WORDS_PER_STEP:
        raise ValidationError(f"block_size must be a positive multiple of {_WORDS_PER_STEP}", "block_size")
    if not isinstance(settings, ChshSettings):
        settings = ChshSettings.from_sequence(settings)
    n = int(n_per_setting)
    seed = int(seed)

    cdfs = []
    for pair in settings.pairs():
        cdf = np.cumsum(joint_table(x, y, pair).p.ravel())
        cdf[-1] = 1.0
        cdfs.append(cdf)

    jobs = [(s, start, min(block_size, n - start)) for s in range(4) for start in range(0, n, block_size)]

    def run(job):
        s, start, count = job
        return _draw_block(cdfs[s], seed, s, start, count)

    if n_workers == 1:
        blocks = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            blocks = list(pool.map(run, jobs))

    cells = np.concatenate(blocks)
    setting_index = np.repeat(np.arange(4, dtype=np.int8), n)
    return EventSample(setting_index, (cells // 3).astype(np.int8), (cells % 3).astype(np.int8))


def _as_sample(events) -> EventSample:
    if isinstance(events, EventSample):
        return events
    return EventSample.from_records(events)


_UNITARY = np.array([1, -1, -1], dtype=np.int8)
_NON_UNITARY = np.array([1, -1, 0], dtype=np.int8)


def _mean_and_error(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = float(values.mean())
    if n < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(n))


def estimate_correlation(events, kind) -> EstimatorResult:
    """Estimate a correlation from events taken at a single time pair.

    Unitary and non-unitary use every event with per-side values
    (+1, -1, -1) and (+1, -1, 0) respectively. Renormalized keeps only
    events where both mesons survived and reports
    ``(N_same - N_opposite) / (N_same + N_opposite)``.
    ``std_error`` is the sample standard deviation of the per-event products
    over the square root of the number of events used.
    """
    kind = CorrelationKind.parse(kind)
    sample = _as_sample(events)
    if len(sample) == 0:
        raise DegenerateSampleError("no events")
    if len(np.unique(sample.setting_index)) > 1:
        raise ValidationError("events must come from a single setting pair", "events")
    left = sample.left.astype(np.intp)
    right = sample.right.astype(np.intp)
    n_total = len(sample)

    if kind is CorrelationKind.UNITARY:
        products = _UNITARY[left] * _UNITARY[right]
    elif kind is CorrelationKind.NON_UNITARY:
        products = _NON_UNITARY[left] * _NON_UNITARY[right]
    else:
        alive = (left != Outcome.DECAYED) & (right != Outcome.DECAYED)
        if not alive.any():
            raise DegenerateSampleError("no events with both mesons surviving")
        products = _NON_UNITARY[left[alive]] * _NON_UNITARY[right[alive]]

    value, error = _mean_and_error(products.astype(float))
    return EstimatorResult(value, error, int(products.size), n_total)


def estimate_chsh(events, kind) -> EstimatorResult:
    """CHSH estimate from a full event list covering all four settings.

    Errors of the four independent estimates add in quadrature; an absolute
    value whose argument is within one standard error of zero is flagged,
    since the propagation is unreliable there.
    """
    kind = CorrelationKind.parse(kind)
    sample = _as_sample(events)
    est = []
    for setting in SettingPair:
        part = sample.for_setting(setting)
        if len(part) == 0:
            raise DegenerateSampleError(f"setting {setting.label}: no events")
        try:
            est.append(estimate_correlation(part, kind))
        except DegenerateSampleError as exc:
            raise DegenerateSampleError(f"setting {setting.label}: {exc}") from exc

    first = est[0].value - est[1].value
    second = est[2].value + est[3].value
    err_first = math.hypot(est[0].std_error, est[1].std_error)
    err_second = math.hypot(est[2].std_error, est[3].std_error)
    flags = []
    if abs(first) < err_first:
        flags.append("near-zero argument in |E(A,B) - E(A,B')|")
    if abs(second) < err_second:
        flags.append("near-zero argument in |E(A',B) + E(A',B')|")
    return EstimatorResult(
        abs(first) + abs(second),
        math.hypot(err_first, err_second),
        sum(e.n_used for e in est),
        sum(e.n_total for e in est),
        tuple(flags),
    )
