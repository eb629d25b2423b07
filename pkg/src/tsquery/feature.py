"""Polar feature space: mapping series to (magnitude, angle) feature points,
query search rectangles, and transformation of points and rectangles.

Layouts:
  * raw(k): 2k dims; pairs (magnitude, angle) of coefficients 0..k-1.
  * normal(k): 2k+2 dims; dim 0 mean, dim 1 std, then pairs (magnitude,
    angle) of coefficients 1..k of the normalized series (coefficient 0 of a
    normal form is always zero and is dropped).

Angle dimensions are circular: stored intervals are (center, half-width)
pairs that may wrap across +-pi. Distances between feature points are always
taken through the complex-plane embedding of each (magnitude, angle) pair,
never as raw differences of polar coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsafeTransformationError
from .series import TimeSeries, normal_form
from .spectral import TWO_PI, angle, as_signal, dft, wrap_angle
from .transform import Transformation

FULL_RANGE = (-math.inf, math.inf)


@dataclass(frozen=True)
class SpaceMode:
    """Feature-space layout: which coefficients are indexed and whether the
    mean/std dimensions are present."""

    kind: str  # "raw" | "normal"
    k: int

    def __post_init__(self):
        if self.kind not in ("raw", "normal"):
            raise InvalidInputError(f"unknown space mode {self.kind!r}")
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")

    @property
    def ndims(self) -> int:
        return 2 * self.k + (2 if self.kind == "normal" else 0)

    @property
    def stat_dims(self) -> tuple[int, ...]:
        return (0, 1) if self.kind == "normal" else ()

    @property
    def coefficient_indices(self) -> np.ndarray:
        """Spectrum indices of the retained coefficients, in dim order."""
        if self.kind == "normal":
            return np.arange(1, self.k + 1)
        return np.arange(self.k)

    @property
    def pairs(self) -> list[tuple[int, int, int]]:
        """(magnitude dim, angle dim, spectrum index) per retained coefficient."""
        base = 2 if self.kind == "normal" else 0
        return [
            (base + 2 * i, base + 2 * i + 1, int(f))
            for i, f in enumerate(self.coefficient_indices)
        ]

    @property
    def angle_mask(self) -> np.ndarray:
        mask = np.zeros(self.ndims, dtype=bool)
        for _, ang_dim, _ in self.pairs:
            mask[ang_dim] = True
        return mask

    def min_series_length(self) -> int:
        return max(2, self.k + 1) if self.kind == "normal" else self.k

    def comparison_signal(self, values) -> np.ndarray:
        """The signal actually compared by queries: the normal form in
        normal mode, the raw values in raw mode."""
        x = values.values if isinstance(values, TimeSeries) else as_signal(values)
        if self.kind == "normal":
            return normal_form(x).normalized
        return x


@dataclass(frozen=True)
class FeaturePoint:
    dims: np.ndarray
    record_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", np.asarray(self.dims, dtype=np.float64))


@dataclass(frozen=True)
class FeatureRect:
    """Axis-aligned box. For linear dims `lo`/`hi` are the closed interval
    bounds; for angle dims `lo` holds the interval center (in [-pi, pi)) and
    `hi` the half-width (in [0, pi], pi meaning the full circle)."""

    angle_mask: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "angle_mask", np.asarray(self.angle_mask, dtype=bool))
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=np.float64))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=np.float64))
        lin = ~self.angle_mask
        if np.any(self.lo[lin] > self.hi[lin]):
            raise InvalidInputError("linear interval with lo > hi")
        if np.any(self.hi[self.angle_mask] < 0):
            raise InvalidInputError("negative angular half-width")

    @property
    def ndims(self) -> int:
        return self.lo.size

    @classmethod
    def from_point(cls, dims, angle_mask) -> "FeatureRect":
        dims = np.asarray(dims, dtype=np.float64)
        angle_mask = np.asarray(angle_mask, dtype=bool)
        lo = dims.copy()
        hi = dims.copy()
        hi[angle_mask] = 0.0
        lo[angle_mask] = wrap_angle(dims[angle_mask])
        return cls(angle_mask, lo, hi)

    def side_lengths(self) -> np.ndarray:
        out = self.hi - self.lo
        out[self.angle_mask] = 2.0 * self.hi[self.angle_mask]
        return out


def circ_dist(a, b):
    """Shorter arc distance between two angles, in [0, pi]."""
    return np.abs(wrap_angle(np.asarray(a) - np.asarray(b)))


def _cover_arcs(centers: np.ndarray, halfwidths: np.ndarray) -> tuple[float, float]:
    """Minimal circular interval covering the given arcs, as (center, hw)."""
    if np.any(halfwidths >= math.pi):
        return 0.0, math.pi
    starts = wrap_angle(centers - halfwidths)
    extents = 2.0 * halfwidths
    if starts.size == 1:
        return float(wrap_angle(centers[0])), float(halfwidths[0])
    order = np.argsort(starts, kind="stable")
    starts = starts[order]
    extents = extents[order]
    best_cover = math.inf
    best_start = 0.0
    for i in range(starts.size):
        offsets = np.mod(starts - starts[i], TWO_PI)
        cover = float(np.max(offsets + extents))
        if cover < best_cover - 1e-15:
            best_cover = cover
            best_start = float(starts[i])
    if best_cover >= TWO_PI:
        return 0.0, math.pi
    hw = min(best_cover / 2.0, math.pi)
    return float(wrap_angle(best_start + hw)), hw


def bound_of_rects(rects: list[FeatureRect]) -> FeatureRect:
    """Tight bound of a nonempty list of rects (minimal covering arcs on
    angle dims, min/max on linear dims)."""
    if not rects:
        raise InvalidInputError("cannot bound an empty list of rects")
    mask = rects[0].angle_mask
    lo = np.min(np.stack([r.lo for r in rects]), axis=0)
    hi = np.max(np.stack([r.hi for r in rects]), axis=0)
    for d in np.flatnonzero(mask):
        c, h = _cover_arcs(
            np.array([r.lo[d] for r in rects]), np.array([r.hi[d] for r in rects])
        )
        lo[d] = c
        hi[d] = h
    return FeatureRect(mask, lo, hi)


# -- extraction ---------------------------------------------------------------


def coefficient_dims(coeffs: np.ndarray, mode: SpaceMode) -> np.ndarray:
    """Interleaved (magnitude, angle) values of the retained coefficients."""
    retained = coeffs[mode.coefficient_indices]
    out = np.empty(2 * mode.k)
    out[0::2] = np.abs(retained)
    out[1::2] = angle(retained)
    return out


def extract_features(s, mode: SpaceMode) -> FeaturePoint:
    """Map a series to its feature point.

    Normal mode: (mean, std, |X_1|, angle(X_1), ..., |X_k|, angle(X_k)) of
    the normalized series. Raw mode: magnitudes/angles of X_0..X_{k-1} of
    the raw series. Constant series raise DegenerateSeriesError in normal
    mode.
    """
    rid = s.id if isinstance(s, TimeSeries) else None
    x = s.values if isinstance(s, TimeSeries) else as_signal(s)
    if x.size < mode.min_series_length():
        raise InvalidInputError(
            f"series length {x.size} below minimum {mode.min_series_length()} "
            f"for mode {mode.kind}(k={mode.k})"
        )
    if mode.kind == "normal":
        nf = normal_form(x)
        dims = np.concatenate(
            [[nf.mean, nf.std], coefficient_dims(dft(nf.normalized), mode)]
        )
    else:
        dims = coefficient_dims(dft(x), mode)
    return FeaturePoint(dims=dims, record_id=rid)


# -- query rectangle ----------------------------------------------------------


def search_rectangle(
    q: FeaturePoint | np.ndarray,
    epsilon: float,
    mode: SpaceMode,
    stat_bounds: dict[int, tuple[float, float]] | None = None,
) -> FeatureRect:
    """Minimum bounding rectangle of the epsilon-ball around the query.

    Per retained coefficient with magnitude m and angle alpha: magnitude in
    [max(0, m - eps), m + eps]; angle within asin(eps/m) of alpha when
    eps < m, the full circle otherwise. Mean/std dimensions are unconstrained
    unless explicit bounds are supplied.
    """
    if epsilon < 0:
        raise InvalidInputError("epsilon must be nonnegative")
    dims = q.dims if isinstance(q, FeaturePoint) else np.asarray(q, dtype=np.float64)
    if dims.size != mode.ndims:
        raise InvalidInputError(f"expected {mode.ndims} dims, got {dims.size}")
    mask = mode.angle_mask
    lo = np.empty(mode.ndims)
    hi = np.empty(mode.ndims)
    for d in mode.stat_dims:
        lo[d], hi[d] = (stat_bounds or {}).get(d, FULL_RANGE)
        if lo[d] > hi[d]:
            raise InvalidInputError(f"stat bound on dim {d} has lo > hi")
    for mag_dim, ang_dim, _ in mode.pairs:
        m = dims[mag_dim]
        lo[mag_dim] = max(0.0, m - epsilon)
        hi[mag_dim] = m + epsilon
        lo[ang_dim] = dims[ang_dim]
        hi[ang_dim] = math.asin(epsilon / m) if epsilon < m else math.pi
    return FeatureRect(mask, lo, hi)


# -- transformation of points and rectangles ----------------------------------


def _multipliers_for(T: Transformation, mode: SpaceMode) -> np.ndarray:
    if not T.polar_safe:
        raise UnsafeTransformationError(
            f"transformation {T.name!r} is not safe for the polar representation"
            " (b must be zero)"
        )
    max_f = int(mode.coefficient_indices[-1])
    a, _ = T.prefix(max_f + 1)
    return a


def _apply_stat_affine(value: float, action: tuple[float, float]) -> float:
    alpha, beta = action
    return alpha * value + beta


def transform_point(T: Transformation, p: FeaturePoint, mode: SpaceMode) -> FeaturePoint:
    """Apply a polar-safe transformation: scale magnitudes by |a_f|, shift
    angles by angle(a_f), map mean/std dims affinely."""
    a = _multipliers_for(T, mode)
    dims = p.dims.copy()
    if dims.size != mode.ndims:
        raise InvalidInputError(f"expected {mode.ndims} dims, got {dims.size}")
    if mode.stat_dims:
        dims[0] = _apply_stat_affine(dims[0], T.mean_action)
        dims[1] = _apply_stat_affine(dims[1], T.std_action)
    for mag_dim, ang_dim, f in mode.pairs:
        dims[mag_dim] = abs(a[f]) * dims[mag_dim]
        dims[ang_dim] = wrap_angle(dims[ang_dim] + angle(a[f]))
    return FeaturePoint(dims=dims, record_id=p.record_id)


def transform_rect(T: Transformation, r: FeatureRect, mode: SpaceMode) -> FeatureRect:
    """Apply a polar-safe transformation to a rectangle: magnitude intervals
    scale by |a_f| (order preserved), angle interval centers shift by
    angle(a_f) with half-widths unchanged, linear dims map affinely with
    endpoint swap under negative scale."""
    a = _multipliers_for(T, mode)
    if r.ndims != mode.ndims:
        raise InvalidInputError(f"expected {mode.ndims} dims, got {r.ndims}")
    lo = r.lo.copy()
    hi = r.hi.copy()
    for d, action in zip(mode.stat_dims, (T.mean_action, T.std_action)):
        alpha, beta = action
        if alpha == 0.0:
            lo[d] = hi[d] = beta
        elif alpha > 0:
            lo[d], hi[d] = alpha * lo[d] + beta, alpha * hi[d] + beta
        else:
            lo[d], hi[d] = alpha * hi[d] + beta, alpha * lo[d] + beta
    for mag_dim, ang_dim, f in mode.pairs:
        scale = abs(a[f])
        lo[mag_dim] *= scale
        hi[mag_dim] *= scale
        lo[ang_dim] = wrap_angle(lo[ang_dim] + angle(a[f]))
    return FeatureRect(r.angle_mask, lo, hi)


# -- geometric predicates -------------------------------------------------


def _check_dims(n1: int, n2: int):
    if n1 != n2:
        raise InvalidInputError(f"dimension mismatch: {n1} != {n2}")


def point_in_rect(p: FeaturePoint | np.ndarray, r: FeatureRect) -> bool:
    dims = p.dims if isinstance(p, FeaturePoint) else np.asarray(p, dtype=np.float64)
    _check_dims(dims.size, r.ndims)
    lin = ~r.angle_mask
    if np.any(dims[lin] < r.lo[lin]) or np.any(dims[lin] > r.hi[lin]):
        return False
    ang = r.angle_mask
    return bool(np.all(circ_dist(dims[ang], r.lo[ang]) <= r.hi[ang]))


def rect_overlap(r1: FeatureRect, r2: FeatureRect) -> bool:
    _check_dims(r1.ndims, r2.ndims)
    lin = ~r1.angle_mask
    if np.any(r1.lo[lin] > r2.hi[lin]) or np.any(r2.lo[lin] > r1.hi[lin]):
        return False
    ang = r1.angle_mask
    return bool(
        np.all(circ_dist(r1.lo[ang], r2.lo[ang]) <= r1.hi[ang] + r2.hi[ang])
    )


def _sector_gap_sq(m_p: float, alpha_p: float, m_lo: float, m_hi: float,
                   center: float, hw: float) -> float:
    """Squared min complex-plane distance from the point (m_p, alpha_p) to
    the annular sector {m e^{j a} : m in [m_lo, m_hi], |a - center| <= hw}."""
    delta = max(0.0, float(circ_dist(alpha_p, center)) - hw)
    if delta == 0.0:
        g = max(0.0, m_lo - m_p, m_p - m_hi)
        return g * g
    c = math.cos(delta)
    m_star = min(max(m_p * c, m_lo), m_hi)
    return m_p * m_p + m_star * m_star - 2.0 * m_p * m_star * c


def mindist(
    p: FeaturePoint | np.ndarray,
    r: FeatureRect,
    mode: SpaceMode,
    include_stats: bool = True,
) -> float:
    """Lower bound on the complex-embedding feature distance from p to any
    point of r: exact per-coefficient sector distances plus linear gaps.

    `include_stats=False` drops the mean/std dimensions (used by
    nearest-neighbor ranking, whose distance is over sequences only).
    """
    dims = p.dims if isinstance(p, FeaturePoint) else np.asarray(p, dtype=np.float64)
    _check_dims(dims.size, r.ndims)
    total = 0.0
    if include_stats:
        for d in mode.stat_dims:
            g = max(0.0, r.lo[d] - dims[d], dims[d] - r.hi[d])
            total += g * g
    for mag_dim, ang_dim, _ in mode.pairs:
        total += _sector_gap_sq(
            dims[mag_dim], dims[ang_dim],
            r.lo[mag_dim], r.hi[mag_dim], r.lo[ang_dim], r.hi[ang_dim],
        )
    return math.sqrt(total)
