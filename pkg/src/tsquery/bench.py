"""Benchmark harness: the four query-processing methods compared by work
counts on one workload.

Methods (range workloads run every query with each method; join workloads
run one self-join):
  a  scan-naive          full-distance sequential scan over stored spectra
  b  scan-early-abandon  sequential scan aborting each series past epsilon
  c  index-plain         materialize the transformed index once, then query
                         it with no transformation
  d  index-transformed   query the original index, transforming on the fly

All four compute the same answer sets (after uniform pair deduplication for
joins); wall times are reported but only the work counters are meaningful
across machines.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .rtree import (
    JoinQuery,
    RangeQuery,
    RTree,
    materialize_transformed_index,
    transformed_join,
    transformed_range_search,
)
from .scan import scan_join, sequential_scan, store_from_index
from .transform import Transformation

METHODS = ("a", "b", "c", "d")
METHOD_LABELS = {
    "a": "scan-naive",
    "b": "scan-early-abandon",
    "c": "index-plain",
    "d": "index-transformed",
}


@dataclass(frozen=True)
class BenchRow:
    method: str
    label: str
    wall_ms: float
    nodes_visited: int
    coefficient_touches: int
    candidates: int
    answers: int


@dataclass(frozen=True)
class BenchReport:
    workload: str
    queries: int
    epsilon: float
    transform: str
    rows: tuple[BenchRow, ...]
    consistent: bool

    def csv_lines(self) -> list[str]:
        lines = [
            "method,label,wall_ms,nodes_visited,coefficient_touches,"
            "candidates,answers"
        ]
        for r in self.rows:
            lines.append(
                f"{r.method},{r.label},{r.wall_ms:.3f},{r.nodes_visited},"
                f"{r.coefficient_touches},{r.candidates},{r.answers}"
            )
        return lines


def _sample_queries(tree: RTree, count: int, seed: int) -> list[np.ndarray]:
    ids = tree.indexed_ids
    if not ids:
        raise InvalidInputError("cannot benchmark an empty index")
    rng = np.random.default_rng(int(seed))
    picks = rng.integers(0, len(ids), size=count)
    return [tree.series[ids[int(i)]] for i in picks]


def run_bench(
    tree: RTree,
    workload: str = "range",
    methods: tuple[str, ...] = METHODS,
    epsilon: float = 1.0,
    transform: Transformation | None = None,
    queries: int = 20,
    seed: int = 0,
) -> BenchReport:
    """Run the selected methods on one workload and compare their work.

    Range workloads pose `queries` stored series as range queries; join
    workloads run one deduplicated self-join. Method answer sets are
    compared for equality (the `consistent` flag).
    """
    for m in methods:
        if m not in METHODS:
            raise InvalidInputError(f"unknown bench method {m!r}")
    if workload not in ("range", "join"):
        raise InvalidInputError(f"unknown workload {workload!r}")
    store = store_from_index(tree)
    rows: list[BenchRow] = []
    answer_sets: dict[str, tuple] = {}
    if workload == "range":
        q_values = _sample_queries(tree, queries, seed)
        for m in methods:
            t0 = time.perf_counter()
            nodes = touches = candidates = answers = 0
            per_query: list[tuple] = []
            mat = None
            if m == "c" and transform is not None:
                mat = materialize_transformed_index(tree, transform)
            for values in q_values:
                if m == "a":
                    res = sequential_scan(
                        store, values, epsilon, transform, early_abandon=False
                    )
                elif m == "b":
                    res = sequential_scan(
                        store, values, epsilon, transform, early_abandon=True
                    )
                elif m == "c":
                    res = transformed_range_search(
                        mat if mat is not None else tree,
                        RangeQuery(values, epsilon, None),
                    )
                else:
                    res = transformed_range_search(
                        tree, RangeQuery(values, epsilon, transform)
                    )
                nodes += res.counters.nodes_visited
                touches += res.counters.coefficient_touches
                candidates += res.counters.candidates
                answers += len(res.matches)
                per_query.append(tuple(rid for rid, _ in res.matches))
            wall = (time.perf_counter() - t0) * 1e3
            answer_sets[m] = tuple(per_query)
            rows.append(
                BenchRow(m, METHOD_LABELS[m], wall, nodes, touches, candidates, answers)
            )
    else:
        for m in methods:
            t0 = time.perf_counter()
            if m in ("a", "b"):
                pairs, counters = scan_join(
                    store, epsilon, transform, early_abandon=(m == "b")
                )
            elif m == "c":
                target = (
                    materialize_transformed_index(tree, transform)
                    if transform is not None
                    else tree
                )
                res = transformed_join(target, JoinQuery(epsilon, None))
                pairs, counters = res.pairs, res.counters
            else:
                res = transformed_join(tree, JoinQuery(epsilon, transform))
                pairs, counters = res.pairs, res.counters
            wall = (time.perf_counter() - t0) * 1e3
            answer_sets[m] = tuple((a, b) for a, b, _ in pairs)
            rows.append(
                BenchRow(
                    m,
                    METHOD_LABELS[m],
                    wall,
                    counters.nodes_visited,
                    counters.coefficient_touches,
                    counters.candidates,
                    len(pairs),
                )
            )
    sets = list(answer_sets.values())
    consistent = all(s == sets[0] for s in sets[1:])
    return BenchReport(
        workload=workload,
        queries=queries if workload == "range" else 1,
        epsilon=epsilon,
        transform=transform.name if transform is not None else "identity",
        rows=tuple(rows),
        consistent=consistent,
    )
