"""R-tree over polar feature points with transformation-aware traversal.

The tree is built once over a relation and is immutable during queries. A
query carrying a (polar-safe) transformation descends the original tree,
transforming each node MBR and each leaf point on the fly, so one index
serves every safe transformation. Candidates are verified against stored
full sequences; verified answers are exact (no false dismissals by the
lower-bounding chain, no false hits by postprocessing).
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSeriesError,
    InvalidInputError,
    NumericConsistencyError,
    UnsafeTransformationError,
)
from .feature import (
    FeaturePoint,
    FeatureRect,
    SpaceMode,
    bound_of_rects,
    circ_dist,
    coefficient_dims,
    extract_features,
    mindist,
    point_in_rect,
    rect_overlap,
    search_rectangle,
    transform_point,
    transform_rect,
)
from .series import Relation, TimeSeries
from .spectral import dft, energy_greedy_order, idft, wrap_angle
from .transform import Transformation

DEFAULT_CAPACITY = 16


# -- queries ------------------------------------------------------------------


@dataclass(frozen=True)
class RangeQuery:
    """Find stored series o with D(T(o), q) < epsilon (strict)."""

    values: np.ndarray
    epsilon: float
    transform: Transformation | None = None
    stat_bounds: dict[int, tuple[float, float]] | None = None


@dataclass(frozen=True)
class KnnQuery:
    """Find the `count` stored series nearest to q under D(T(o), q)."""

    values: np.ndarray
    count: int
    transform: Transformation | None = None


@dataclass(frozen=True)
class JoinQuery:
    """Self-join: unordered pairs closer than epsilon after transformation.

    sides="both" compares D(T(a), T(b)); sides="right" compares the pair
    under one-sided transformation (the r-join-T(r) form), taking the
    smaller of the two directions.
    """

    epsilon: float
    transform: Transformation | None = None
    sides: str = "both"
    raw_pairs: bool = False


@dataclass
class Counters:
    nodes_visited: int = 0
    leaf_points: int = 0
    candidates: int = 0
    postprocessed: int = 0
    coefficient_touches: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "nodes_visited": self.nodes_visited,
            "leaf_points": self.leaf_points,
            "candidates": self.candidates,
            "postprocessed": self.postprocessed,
            "coefficient_touches": self.coefficient_touches,
        }


@dataclass(frozen=True)
class QueryResult:
    """Matches ordered by (distance, id), plus per-query instrumentation."""

    matches: tuple[tuple[str, float], ...]
    counters: Counters
    visited_nodes: tuple[int, ...] = ()


@dataclass(frozen=True)
class JoinResult:
    pairs: tuple[tuple[str, str, float], ...]
    counters: Counters


# -- tree structure -----------------------------------------------------------


class _Entry:
    __slots__ = ("rect", "child", "dims", "rid")

    def __init__(self, rect, child=None, dims=None, rid=None):
        self.rect = rect
        self.child = child
        self.dims = dims
        self.rid = rid


class _Node:
    __slots__ = ("uid", "leaf", "entries")

    def __init__(self, uid: int, leaf: bool, entries: list[_Entry] | None = None):
        self.uid = uid
        self.leaf = leaf
        self.entries = entries if entries is not None else []

    def mbr(self) -> FeatureRect:
        return bound_of_rects([e.rect for e in self.entries])


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    problems: tuple[str, ...]
    nodes: int
    height: int
    entries: int


class RTree:
    """Height-balanced index over feature points with a full-sequence store.

    `series` keeps every ingested series (including degenerate skips) for
    postprocessing and emission. `prenormalized` marks trees whose stored
    values already are the comparison signals (produced by
    materialize_transformed_index), so they must not be re-normalized.
    """

    def __init__(self, mode: SpaceMode, capacity: int = DEFAULT_CAPACITY,
                 prenormalized: bool = False):
        if capacity < 4:
            raise InvalidInputError("node capacity must be >= 4")
        self.mode = mode
        self.capacity = capacity
        self.min_fill = math.ceil(0.4 * capacity)
        self.prenormalized = prenormalized
        self.series: dict[str, np.ndarray] = {}
        self.skipped: list[str] = []
        self.height = 1
        self.count = 0
        self._uid = itertools.count()
        self.root = _Node(next(self._uid), leaf=True)
        self._comparison: dict[str, np.ndarray] = {}
        self._spectra: dict[str, np.ndarray] = {}

    # -- construction ------------------------------------------------------

    @property
    def series_length(self) -> int | None:
        if not self.series:
            return None
        return next(iter(self.series.values())).size

    def comparison_signal(self, values) -> np.ndarray:
        if self.prenormalized:
            return np.asarray(values, dtype=np.float64)
        return self.mode.comparison_signal(values)

    def insert_series(self, ts: TimeSeries) -> bool:
        """Insert one series; returns False when it was skipped as degenerate
        (constant series in normal mode)."""
        if ts.id in self.series:
            raise InvalidInputError(f"duplicate series id {ts.id!r}")
        n = self.series_length
        if n is not None and len(ts) != n:
            raise InvalidInputError(
                f"series {ts.id!r} length {len(ts)} != index length {n}"
            )
        if len(ts) < self.mode.min_series_length():
            raise InvalidInputError(
                f"series {ts.id!r} shorter than minimum "
                f"{self.mode.min_series_length()} for this mode"
            )
        try:
            comp = self.comparison_signal(ts.values)
        except DegenerateSeriesError:
            self.series[ts.id] = ts.values
            self.skipped.append(ts.id)
            return False
        self.series[ts.id] = ts.values
        self._comparison[ts.id] = comp
        self._spectra[ts.id] = dft(comp)
        point = self._point_for(ts.id, ts.values)
        self._insert_point(point.dims, ts.id)
        self.count += 1
        return True

    def _point_for(self, rid: str, values: np.ndarray) -> FeaturePoint:
        if self.prenormalized:
            raise InvalidInputError(
                "cannot insert into a materialized (pre-transformed) index"
            )
        return extract_features(TimeSeries(id=rid, values=values), self.mode)

    def _insert_point(self, dims: np.ndarray, rid: str):
        rect = FeatureRect.from_point(dims, self.mode.angle_mask)
        entry = _Entry(rect, dims=dims, rid=rid)
        split = self._insert(self.root, entry)
        if split is not None:
            old_root = self.root
            self.root = _Node(next(self._uid), leaf=False)
            self.root.entries.append(_Entry(old_root.mbr(), child=old_root))
            self.root.entries.append(_Entry(split.mbr(), child=split))
            self.height += 1

    def _insert(self, node: _Node, entry: _Entry) -> _Node | None:
        if node.leaf:
            node.entries.append(entry)
        else:
            chosen = _choose_subtree(node.entries, entry.rect)
            split = self._insert(chosen.child, entry)
            chosen.rect = chosen.child.mbr()
            if split is not None:
                node.entries.append(_Entry(split.mbr(), child=split))
        if len(node.entries) > self.capacity:
            return self._split(node)
        return None

    def _split(self, node: _Node) -> _Node:
        g1, g2 = _rstar_split(node.entries, self.min_fill)
        node.entries = g1
        return _Node(next(self._uid), leaf=node.leaf, entries=g2)

    # -- introspection -------------------------------------------------------

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.leaf:
                stack.extend(e.child for e in node.entries)

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    @property
    def indexed_ids(self) -> list[str]:
        return sorted(self._spectra.keys())

    def audit(self) -> AuditReport:
        """Full structural audit: uniform leaf depth, fill bounds, exact MBR
        tightness, entry count, and point-coordinate validity."""
        problems: list[str] = []
        entries_seen = 0
        nodes = 0

        def walk(node: _Node, depth: int, is_root: bool, leaf_depths: list[int]):
            nonlocal entries_seen, nodes
            nodes += 1
            n_e = len(node.entries)
            if is_root:
                if not node.leaf and n_e < 2:
                    problems.append(f"internal root has {n_e} entries")
            elif not (self.min_fill <= n_e <= self.capacity):
                problems.append(
                    f"node {node.uid} fill {n_e} outside "
                    f"[{self.min_fill}, {self.capacity}]"
                )
            if node.leaf:
                leaf_depths.append(depth)
                entries_seen += n_e
                for e in node.entries:
                    if e.rid not in self._spectra:
                        problems.append(f"leaf entry {e.rid!r} has no stored spectrum")
                    mags = e.dims[[p[0] for p in self.mode.pairs]]
                    angs = e.dims[[p[1] for p in self.mode.pairs]]
                    if np.any(mags < 0):
                        problems.append(f"negative magnitude in {e.rid!r}")
                    if np.any(angs < -math.pi) or np.any(angs >= math.pi):
                        problems.append(f"angle out of range in {e.rid!r}")
                return
            for e in node.entries:
                expected = e.child.mbr()
                if not (
                    np.array_equal(e.rect.lo, expected.lo)
                    and np.array_equal(e.rect.hi, expected.hi)
                ):
                    problems.append(f"loose or stale MBR above node {e.child.uid}")
                walk(e.child, depth + 1, False, leaf_depths)

        leaf_depths: list[int] = []
        walk(self.root, 1, True, leaf_depths)
        if len(set(leaf_depths)) > 1:
            problems.append(f"leaves at unequal depths {sorted(set(leaf_depths))}")
        if leaf_depths and max(leaf_depths) != self.height:
            problems.append(
                f"height {self.height} != leaf depth {max(leaf_depths)}"
            )
        if entries_seen != self.count:
            problems.append(f"entry count {entries_seen} != recorded {self.count}")
        return AuditReport(
            ok=not problems,
            problems=tuple(problems),
            nodes=nodes,
            height=self.height,
            entries=entries_seen,
        )


def build(relation: Relation, mode: SpaceMode, capacity: int = DEFAULT_CAPACITY) -> RTree:
    """Index a uniform-length relation; degenerate series land in the skip
    list rather than failing the build."""
    tree = RTree(mode, capacity)
    for ts in relation:
        tree.insert_series(ts)
    return tree


# -- insertion heuristics -----------------------------------------------------


def _volume(rect: FeatureRect) -> float:
    return float(np.prod(rect.side_lengths()))


def _margin(rect: FeatureRect) -> float:
    return float(np.sum(rect.side_lengths()))


def _choose_subtree(entries: list[_Entry], rect: FeatureRect) -> _Entry:
    best = None
    best_key = None
    for i, e in enumerate(entries):
        union = bound_of_rects([e.rect, rect])
        vol = _volume(e.rect)
        key = (_volume(union) - vol, _margin(union) - _margin(e.rect), vol, i)
        if best_key is None or key < best_key:
            best_key = key
            best = e
    return best


def _sort_keys(entries: list[_Entry], dim: int, by_upper: bool) -> np.ndarray:
    lo = np.array([e.rect.lo[dim] for e in entries])
    hi = np.array([e.rect.hi[dim] for e in entries])
    if entries[0].rect.angle_mask[dim]:
        # circular dims sort by wrapped arc start / end
        return wrap_angle(lo + hi) if by_upper else wrap_angle(lo - hi)
    return hi if by_upper else lo


def _group_bounds(entries: list[_Entry], order: np.ndarray, split_at: int):
    g1 = [entries[j] for j in order[:split_at]]
    g2 = [entries[j] for j in order[split_at:]]
    return g1, g2, bound_of_rects([e.rect for e in g1]), bound_of_rects(
        [e.rect for e in g2]
    )


def _overlap_measure(r1: FeatureRect, r2: FeatureRect) -> float:
    total = 1.0
    mask = r1.angle_mask
    for d in range(r1.ndims):
        if mask[d]:
            gap = float(circ_dist(r1.lo[d], r2.lo[d]))
            ov = min(r1.hi[d] + r2.hi[d] - gap, 2 * r1.hi[d], 2 * r2.hi[d])
            ov = max(ov, 0.0)
        else:
            ov = max(0.0, min(r1.hi[d], r2.hi[d]) - max(r1.lo[d], r2.lo[d]))
        total *= ov
    return total


def _rstar_split(entries: list[_Entry], min_fill: int):
    """R*-style split: choose the axis minimizing the summed group margins,
    then the distribution minimizing group overlap (ties: total volume)."""
    ndims = entries[0].rect.ndims
    count = len(entries)
    splits = range(min_fill, count - min_fill + 1)

    best_axis = None
    best_margin = math.inf
    for d in range(ndims):
        margin_sum = 0.0
        for by_upper in (False, True):
            order = np.argsort(_sort_keys(entries, d, by_upper), kind="stable")
            for s in splits:
                _, _, b1, b2 = _group_bounds(entries, order, s)
                margin_sum += _margin(b1) + _margin(b2)
        if margin_sum < best_margin:
            best_margin = margin_sum
            best_axis = d

    best_key = None
    best_groups = None
    for by_upper in (False, True):
        order = np.argsort(_sort_keys(entries, best_axis, by_upper), kind="stable")
        for s in splits:
            g1, g2, b1, b2 = _group_bounds(entries, order, s)
            key = (_overlap_measure(b1, b2), _volume(b1) + _volume(b2))
            if best_key is None or key < best_key:
                best_key = key
                best_groups = (g1, g2)
    return best_groups


# -- query machinery ----------------------------------------------------------


class _Prep:
    """Per-query precomputation: the query spectrum in the transformation's
    output basis, full-length multipliers for stored spectra, and the fold
    order used by early-abandoning distance accumulation."""

    __slots__ = (
        "mode", "transform", "n", "basis_len", "Q", "q_coeff_dims",
        "a_full", "b_full", "mod_idx", "fold", "Q_fold",
    )

    def __init__(self, tree: RTree, transform: Transformation | None):
        self.mode = tree.mode
        self.transform = transform
        self.n = tree.series_length
        if transform is None:
            self.basis_len = self.n
            self.a_full = None
            self.b_full = None
            self.mod_idx = None
        else:
            self.basis_len = transform.output_length(self.n)
            self.a_full, self.b_full = transform.prefix(self.basis_len)
            self.mod_idx = (
                np.arange(self.basis_len) % self.n
                if transform.warp_factor > 1
                else None
            )

    def _finish(self, Q: np.ndarray):
        self.Q = Q
        self.q_coeff_dims = coefficient_dims(Q, self.mode)
        self.fold = energy_greedy_order(self.basis_len)
        self.Q_fold = Q[self.fold]

    @classmethod
    def for_signal(cls, tree: RTree, values,
                   transform: Transformation | None) -> "_Prep":
        prep = cls(tree, transform)
        comp = tree.mode.comparison_signal(values)
        if comp.size != prep.basis_len:
            raise InvalidInputError(
                f"query length {comp.size} != expected length {prep.basis_len}"
                + (
                    f" (series length {prep.n}, transformation {transform.name!r})"
                    if transform is not None
                    else ""
                )
            )
        prep._finish(dft(comp) if transform is None else transform.query_spectrum(comp))
        return prep

    @classmethod
    def for_stored(cls, tree: RTree, rid: str,
                   transform: Transformation | None, sides: str) -> "_Prep":
        """Join probe: the query side is a stored series; for sides='both'
        its own spectrum is transformed as well."""
        prep = cls(tree, transform)
        X = tree._spectra[rid]
        if transform is not None and sides == "both":
            prep._finish(prep.transformed_spectrum(X))
        else:
            prep._finish(X)
        return prep

    def transformed_spectrum(self, X: np.ndarray) -> np.ndarray:
        if self.transform is None:
            return X
        if self.mod_idx is not None:
            return self.a_full * X[self.mod_idx]
        return self.a_full * X + self.b_full

    def distance_sq(self, X: np.ndarray, limit_sq: float | None):
        """(distance^2 or None if abandoned, coefficients touched).

        Accumulates squared coefficient gaps in fold order, abandoning once
        the running sum strictly exceeds limit_sq.
        """
        TX = self.transformed_spectrum(X)
        gaps = np.abs(TX[self.fold] - self.Q_fold) ** 2
        if limit_sq is None or math.isinf(limit_sq):
            return float(np.sum(gaps)), gaps.size
        csum = np.cumsum(gaps)
        over = csum > limit_sq
        if over[-1]:
            first = int(np.argmax(over))
            return None, first + 1
        return float(csum[-1]), gaps.size


def _point_feature_distance(dims_a: np.ndarray, dims_b: np.ndarray,
                            mode: SpaceMode) -> float:
    """Complex-embedding distance between the coefficient dims of two
    feature points (a lower bound on the full sequence distance)."""
    total = 0.0
    for mag_dim, ang_dim, _ in mode.pairs:
        m1, a1 = dims_a[mag_dim], dims_a[ang_dim]
        m2, a2 = dims_b[mag_dim], dims_b[ang_dim]
        total += (
            m1 * m1 + m2 * m2 - 2.0 * m1 * m2 * math.cos(a1 - a2)
        )
    return math.sqrt(max(total, 0.0))


def _q_point_dims(prep: _Prep, tree: RTree) -> np.ndarray:
    """Query feature dims (stat dims zero-filled; only coefficient dims are
    meaningful for ranking)."""
    return _q_point_dims_from(prep.q_coeff_dims, tree.mode)


def _require_safe(transform: Transformation | None):
    if transform is not None and not transform.polar_safe:
        raise UnsafeTransformationError(
            f"transformation {transform.name!r} is unsafe for the polar index"
            " (requires b = 0)"
        )


# -- range search ---------------------------------------------------------------


def transformed_range_search(tree: RTree, q: RangeQuery) -> QueryResult:
    """Exact range query: all stored ids with D(T(o), q) < epsilon, with
    their true distances, found by descending the on-the-fly transformed
    index and verifying candidates against stored sequences."""
    if q.epsilon < 0:
        raise InvalidInputError("epsilon must be nonnegative")
    _require_safe(q.transform)
    counters = Counters()
    if tree.count == 0:
        return QueryResult((), counters)
    prep = _Prep.for_signal(tree, q.values, q.transform)
    q_rect = search_rectangle(
        _q_point_dims(prep, tree), q.epsilon, tree.mode, q.stat_bounds
    )
    candidates, visited = _collect_candidates(tree, prep, q_rect, counters)
    eps_sq = q.epsilon * q.epsilon
    matches = []
    for rid in candidates:
        counters.postprocessed += 1
        d_sq, touched = prep.distance_sq(tree._spectra[rid], eps_sq)
        counters.coefficient_touches += touched
        if d_sq is not None and d_sq < eps_sq:
            matches.append((rid, math.sqrt(d_sq)))
    matches.sort(key=lambda t: (t[1], t[0]))
    return QueryResult(tuple(matches), counters, tuple(visited))


def _collect_candidates(tree: RTree, prep: _Prep, q_rect: FeatureRect,
                        counters: Counters) -> tuple[list[str], list[int]]:
    mode = tree.mode
    T = prep.transform
    k = len(mode.pairs)
    candidates: list[str] = []
    visited: list[int] = []
    stack = [tree.root]
    while stack:
        node = stack.pop()
        counters.nodes_visited += 1
        visited.append(node.uid)
        if node.leaf:
            for e in node.entries:
                counters.leaf_points += 1
                counters.coefficient_touches += k
                dims = (
                    transform_point(T, FeaturePoint(e.dims), mode).dims
                    if T is not None
                    else e.dims
                )
                if point_in_rect(dims, q_rect):
                    counters.candidates += 1
                    candidates.append(e.rid)
        else:
            for e in node.entries:
                if T is not None:
                    counters.coefficient_touches += k
                    rect = transform_rect(T, e.rect, mode)
                else:
                    rect = e.rect
                if rect_overlap(rect, q_rect):
                    stack.append(e.child)
    candidates.sort()
    return candidates, visited


# -- nearest neighbors ----------------------------------------------------------


def transformed_knn(tree: RTree, q: KnnQuery) -> QueryResult:
    """Exact k-nearest-neighbor query under the transformed distance,
    branch-and-bound over transformed MBR mindists (valid lower bounds on
    the full distance), final ranking by full-sequence distance with ties
    broken by record id."""
    if q.count < 1:
        raise InvalidInputError("count must be >= 1")
    _require_safe(q.transform)
    if q.count > tree.count:
        raise InvalidInputError(
            f"count {q.count} exceeds indexed entry count {tree.count}"
        )
    counters = Counters()
    prep = _Prep.for_signal(tree, q.values, q.transform)
    q_dims = _q_point_dims(prep, tree)
    mode = tree.mode
    T = prep.transform
    k_dims = len(mode.pairs)

    best: list[tuple[float, str]] = []  # sorted ascending, len <= count

    def kth_dist() -> float:
        return best[-1][0] if len(best) == q.count else math.inf

    seq = itertools.count()
    heap: list[tuple[float, int, _Node]] = [(0.0, next(seq), tree.root)]
    visited: list[int] = []
    while heap:
        md, _, node = heapq.heappop(heap)
        if md > kth_dist():
            break
        counters.nodes_visited += 1
        visited.append(node.uid)
        if node.leaf:
            for e in node.entries:
                counters.leaf_points += 1
                counters.coefficient_touches += k_dims
                dims = (
                    transform_point(T, FeaturePoint(e.dims), mode).dims
                    if T is not None
                    else e.dims
                )
                lb = _point_feature_distance(dims, q_dims, mode)
                if lb > kth_dist():
                    continue
                counters.candidates += 1
                counters.postprocessed += 1
                limit = None if math.isinf(kth_dist()) else kth_dist() ** 2
                d_sq, touched = prep.distance_sq(tree._spectra[e.rid], limit)
                counters.coefficient_touches += touched
                if d_sq is None:
                    continue
                item = (math.sqrt(d_sq), e.rid)
                if len(best) < q.count:
                    best.append(item)
                    best.sort()
                elif item < best[-1]:
                    best[-1] = item
                    best.sort()
        else:
            for e in node.entries:
                if T is not None:
                    counters.coefficient_touches += k_dims
                    rect = transform_rect(T, e.rect, mode)
                else:
                    rect = e.rect
                md_e = mindist(q_dims, rect, mode, include_stats=False)
                if md_e <= kth_dist():
                    heapq.heappush(heap, (md_e, next(seq), e.child))
    return QueryResult(
        tuple((rid, d) for d, rid in best), counters, tuple(visited)
    )


# -- join -----------------------------------------------------------------------


def transformed_join(tree: RTree, q: JoinQuery) -> JoinResult:
    """Self-join: probe the transformed index once per stored series.

    With sides="both" the pair predicate is D(T(a), T(b)) < epsilon; with
    sides="right" it is the one-sided r-join-T(r) predicate, reporting the
    smaller direction. Pairs are deduplicated (idA < idB) unless raw_pairs
    asks for the doubled both-orders convention.
    """
    if q.epsilon < 0:
        raise InvalidInputError("epsilon must be nonnegative")
    if q.sides not in ("both", "right"):
        raise InvalidInputError(f"sides must be 'both' or 'right', got {q.sides!r}")
    _require_safe(q.transform)
    if q.transform is not None and q.transform.warp_factor != 1 and q.sides == "right":
        raise InvalidInputError("one-sided join is undefined for a time warp")
    counters = Counters()
    pairs: dict[tuple[str, str], float] = {}
    mode = tree.mode
    eps_sq = q.epsilon * q.epsilon
    for rid in tree.indexed_ids:
        prep = _Prep.for_stored(tree, rid, q.transform, q.sides)
        q_rect = search_rectangle(
            _q_point_dims_from(prep.q_coeff_dims, mode), q.epsilon, mode
        )
        candidates, _ = _collect_candidates(tree, prep, q_rect, counters)
        for other in candidates:
            if other == rid:
                continue
            key = (rid, other) if rid < other else (other, rid)
            counters.postprocessed += 1
            d_sq, touched = prep.distance_sq(tree._spectra[other], eps_sq)
            counters.coefficient_touches += touched
            if d_sq is None or not d_sq < eps_sq:
                continue
            d = math.sqrt(d_sq)
            if key not in pairs or d < pairs[key]:
                pairs[key] = d
    out = [(a, b, d) for (a, b), d in pairs.items()]
    if q.raw_pairs:
        out = out + [(b, a, d) for (a, b, d) in out]
    out.sort(key=lambda t: (t[2], t[0], t[1]))
    return JoinResult(tuple(out), counters)


def _q_point_dims_from(coeff_dims: np.ndarray, mode: SpaceMode) -> np.ndarray:
    dims = np.zeros(mode.ndims)
    base = 2 if mode.kind == "normal" else 0
    dims[base:] = coeff_dims
    return dims


# -- materialization --------------------------------------------------------------


def materialize_transformed_index(tree: RTree, T: Transformation) -> RTree:
    """Standalone index over the transformed data set: identical topology
    (same node uids, fan-outs, height), transformed MBRs and points, and a
    store of transformed comparison signals. Querying it with the identity
    transformation equals querying the original with T."""
    _require_safe(T)
    n = tree.series_length
    if n is not None and T.output_length(n) != n:
        raise InvalidInputError(
            "length-changing transformations cannot be materialized"
        )
    out = RTree(tree.mode, tree.capacity, prenormalized=True)
    out.height = tree.height
    out.count = tree.count
    out.skipped = list(tree.skipped)
    mode = tree.mode

    def clone(node: _Node) -> _Node:
        new = _Node(node.uid, node.leaf)
        for e in node.entries:
            if node.leaf:
                dims = transform_point(T, FeaturePoint(e.dims, e.rid), mode).dims
                rect = FeatureRect.from_point(dims, mode.angle_mask)
                new.entries.append(_Entry(rect, dims=dims, rid=e.rid))
            else:
                child = clone(e.child)
                new.entries.append(
                    _Entry(transform_rect(T, e.rect, mode), child=child)
                )
        return new

    out.root = clone(tree.root)
    for rid, X in tree._spectra.items():
        TX = T.transform_full_spectrum(X)
        try:
            comp = idft(TX)
        except NumericConsistencyError as exc:
            raise InvalidInputError(
                f"transformation {T.name!r} does not map {rid!r} to a real"
                f" series; cannot materialize: {exc}"
            ) from exc
        out.series[rid] = comp
        out._comparison[rid] = comp
        out._spectra[rid] = TX
    for rid in tree.skipped:
        out.series[rid] = tree.series[rid]
    return out


# -- convenience -------------------------------------------------------------------


def query_signal_for_id(tree: RTree, rid: str) -> np.ndarray:
    """The stored raw values of a series (query-by-id support)."""
    if rid not in tree.series:
        raise InvalidInputError(f"unknown series id {rid!r}")
    return tree.series[rid]
