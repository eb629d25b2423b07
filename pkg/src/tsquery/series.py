"""Time-series records, relations, normal forms, and moving averages."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSeriesError, InvalidInputError
from .spectral import as_signal


@dataclass(frozen=True)
class TimeSeries:
    """An identified real-valued sequence.

    Optional metadata: `source` is a free-form label, `start_date` an
    ISO-8601 date string.
    """

    id: str
    values: np.ndarray
    source: str | None = None
    start_date: str | None = None

    def __post_init__(self):
        if not self.id:
            raise InvalidInputError("series id must be nonempty")
        object.__setattr__(self, "values", as_signal(self.values))

    def __len__(self) -> int:
        return self.values.size


class Relation:
    """An ordered collection of equal-length series with unique ids."""

    def __init__(self, series: list[TimeSeries] | tuple[TimeSeries, ...] = ()):
        series = tuple(series)
        seen: set[str] = set()
        for ts in series:
            if ts.id in seen:
                raise InvalidInputError(f"duplicate series id {ts.id!r}")
            seen.add(ts.id)
        lengths = {len(ts) for ts in series}
        if len(lengths) > 1:
            raise InvalidInputError(
                f"relation requires uniform series length, got lengths {sorted(lengths)}"
            )
        self._series = series
        self._by_id = {ts.id: ts for ts in series}

    @property
    def length(self) -> int | None:
        """Common series length, or None for an empty relation."""
        return len(self._series[0]) if self._series else None

    @property
    def ids(self) -> list[str]:
        return [ts.id for ts in self._series]

    def matrix(self) -> np.ndarray:
        """All values as an (n_series, length) float64 array."""
        if not self._series:
            return np.empty((0, 0))
        return np.stack([ts.values for ts in self._series])

    def __len__(self) -> int:
        return len(self._series)

    def __iter__(self):
        return iter(self._series)

    def __getitem__(self, key: int | str) -> TimeSeries:
        if isinstance(key, str):
            return self._by_id[key]
        return self._series[key]

    def __contains__(self, sid: str) -> bool:
        return sid in self._by_id


@dataclass(frozen=True)
class NormalForm:
    """Zero-mean, unit-std version of a signal plus the inverting (mean, std)."""

    normalized: np.ndarray
    mean: float
    std: float


def normal_form(s) -> NormalForm:
    """Shift to zero mean and scale to unit standard deviation.

    Uses the population standard deviation (divide by n), which makes the
    normalized signal's energy exactly n. Constant series raise
    DegenerateSeriesError carrying the mean, so the caller can decide how
    to store them.
    """
    x = s.values if isinstance(s, TimeSeries) else as_signal(s)
    if x.size < 2:
        raise InvalidInputError("normal form requires length >= 2")
    mean = float(np.mean(x))
    std = float(np.std(x))
    if std == 0.0:
        raise DegenerateSeriesError(
            f"constant series (mean {mean}) has no normal form", mean=mean
        )
    return NormalForm(normalized=(x - mean) / std, mean=mean, std=std)


def moving_average_time(s, m: int, weights=None) -> np.ndarray:
    """Circular moving average with a trailing window of width m.

    out_i = sum_{t=0}^{m-1} w_t * s_{(i-t) mod n}

    The window wraps around the start of the sequence, so the output has the
    same length as the input. Default weights are uniform 1/m; custom weights
    must sum to 1.
    """
    x = s.values if isinstance(s, TimeSeries) else as_signal(s)
    n = x.size
    if not (1 <= m <= n):
        raise InvalidInputError(f"window m={m} out of range for length {n}")
    w = _window_weights(m, weights)
    out = np.zeros(n)
    for t in range(m):
        out += w[t] * np.roll(x, t)
    return out


def _window_weights(m: int, weights) -> np.ndarray:
    if weights is None:
        return np.full(m, 1.0 / m)
    w = as_signal(weights)
    if w.size != m:
        raise InvalidInputError(f"expected {m} weights, got {w.size}")
    if abs(float(np.sum(w)) - 1.0) >= 1e-9:
        raise InvalidInputError(f"weights must sum to 1, got {float(np.sum(w))!r}")
    return w
