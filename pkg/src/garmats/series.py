"""Time-series container, differencing, descriptive statistics and splitting."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DegenerateSplit, InputError, NothingToInvert, SeriesTooShort


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real-valued observations.

    ``origin_head`` holds, for every differencing pass applied so far, the
    first value of the series as it was before that pass. Together with
    ``d_applied`` this is enough to undo the differencing.
    """

    values: np.ndarray
    index: Optional[tuple] = None
    d_applied: int = 0
    origin_head: tuple = ()
    name: str = "series"

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1:
            raise InputError("values must be one-dimensional")
        if values.size < 1:
            raise SeriesTooShort("a series needs at least one observation")
        if not np.all(np.isfinite(values)):
            raise InputError("series contains NaN or infinite values")
        object.__setattr__(self, "values", values)

        if self.index is not None:
            index = tuple(self.index)
            if len(index) != values.size:
                raise InputError(
                    f"index has {len(index)} entries but series has {values.size}"
                )
            for a, b in zip(index, index[1:]):
                if not a < b:
                    raise InputError(f"dates must be strictly increasing ({a} !< {b})")
            object.__setattr__(self, "index", index)

        if self.d_applied < 0:
            raise InputError("d_applied must be non-negative")
        head = tuple(float(h) for h in self.origin_head)
        if len(head) != self.d_applied:
            raise InputError("origin_head must hold one value per differencing pass")
        object.__setattr__(self, "origin_head", head)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @classmethod
    def from_values(cls, values, index=None, name: str = "series") -> "TimeSeries":
        return cls(values=values, index=index, name=name)

    def slice(self, start: int, stop: Optional[int] = None) -> "TimeSeries":
        """Positional slice; the differencing record is kept only for ``start == 0``."""
        index = None if self.index is None else self.index[start:stop]
        if start == 0:
            return TimeSeries(self.values[:stop], index, self.d_applied, self.origin_head, self.name)
        return TimeSeries(self.values[start:stop], index, name=self.name)


@dataclass(frozen=True)
class SummaryStats:
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float
    sd: float
    var: float

    def as_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    train_len: int
    test_len: int


def difference(s: TimeSeries, d: int = 1) -> TimeSeries:
    """Apply ``d`` first-difference passes."""
    if d < 0:
        raise InputError("d must be non-negative")
    if len(s) <= d:
        raise SeriesTooShort(f"cannot difference {len(s)} values {d} times")
    values = s.values
    head = list(s.origin_head)
    for _ in range(d):
        head.append(values[0])
        values = np.diff(values)
    index = None if s.index is None else s.index[d:]
    return TimeSeries(values, index, s.d_applied + d, tuple(head), s.name)


def undifference(s: TimeSeries, passes: Optional[int] = None) -> TimeSeries:
    """Invert the most recent ``passes`` differencing passes (all by default).

    Integer-valued data round-trip exactly; for arbitrary reals the result
    carries the usual cumulative-sum rounding (a few ulps).
    """
    if s.d_applied == 0:
        raise NothingToInvert("series has not been differenced")
    passes = s.d_applied if passes is None else passes
    if not 1 <= passes <= s.d_applied:
        raise InputError(f"can invert between 1 and {s.d_applied} passes, got {passes}")
    values = s.values
    head = list(s.origin_head)
    for _ in range(passes):
        start = head.pop()
        values = np.concatenate(([start], start + np.cumsum(values)))
    index = s.index
    if index is not None:
        # Dates of removed observations are not tracked; extend backwards by one day per pass
        # only when the spacing is daily, otherwise drop the index.
        index = _extend_index_back(index, passes)
    return TimeSeries(values, index, s.d_applied - passes, tuple(head), s.name)


def _extend_index_back(index: tuple, k: int):
    if len(index) >= 2 and all(isinstance(x, dt.date) for x in index[:2]):
        step = index[1] - index[0]
        return tuple(index[0] - step * i for i in range(k, 0, -1)) + index
    if len(index) == 1 and isinstance(index[0], dt.date):
        step = dt.timedelta(days=1)
        return tuple(index[0] - step * i for i in range(k, 0, -1)) + index
    return None


def summarize(s: TimeSeries) -> SummaryStats:
    x = s.values
    if x.size < 2:
        raise SeriesTooShort("summary statistics need at least two observations")
    # numpy's default "linear" method is the (n-1)p interpolation rule.
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    var = float(np.var(x, ddof=1))
    return SummaryStats(
        min=float(x.min()),
        q1=float(q1),
        median=float(med),
        mean=float(x.mean()),
        q3=float(q3),
        max=float(x.max()),
        sd=math.sqrt(var),
        var=var,
    )


def split_spec(n: int, train_fraction: float) -> SplitSpec:
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplit(f"train_fraction must lie in (0, 1), got {train_fraction}")
    # Exact decimal arithmetic so 0.29 * 100 floors to 29, not 28.
    train = math.floor(Fraction(repr(float(train_fraction))) * n)
    test = n - train
    if train < 2 or test < 1:
        raise DegenerateSplit(
            f"fraction {train_fraction} of {n} observations gives train={train}, test={test}"
        )
    return SplitSpec(train_fraction, train, test)


def split(s: TimeSeries, train_fraction: float = 0.9) -> tuple[TimeSeries, TimeSeries]:
    """Chronological train/test split with ``floor(f * n)`` training points."""
    spec = split_spec(len(s), train_fraction)
    return s.slice(0, spec.train_len), s.slice(spec.train_len)


def as_series(x, name: str = "series") -> TimeSeries:
    if isinstance(x, TimeSeries):
        return x
    return TimeSeries(np.asarray(x, dtype=float), name=name)
