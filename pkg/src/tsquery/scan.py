"""Sequential-scan baselines over a relation stored in the frequency domain.

Spectra are scanned in an energy-greedy coefficient order (lowest
frequencies and their conjugate mirrors first), so an early-abandoning scan
typically rejects a non-answer within a handful of coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, InvalidInputError
from .feature import SpaceMode
from .rtree import Counters, QueryResult, RTree
from .series import Relation
from .spectral import dft, energy_greedy_order
from .transform import Transformation


@dataclass(frozen=True)
class SpectralStore:
    """ids plus an (n_series, n) complex matrix of comparison-signal spectra."""

    ids: tuple[str, ...]
    spectra: np.ndarray
    mode: SpaceMode
    skipped: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.spectra.shape[1] if self.spectra.size else 0

    def __len__(self) -> int:
        return len(self.ids)


def store_from_relation(rel: Relation, mode: SpaceMode) -> SpectralStore:
    """Degenerate series (constant, normal mode) are skipped, mirroring the
    index build, so scan and index answer over the same population."""
    ids: list[str] = []
    rows: list[np.ndarray] = []
    skipped: list[str] = []
    for ts in rel:
        try:
            comp = mode.comparison_signal(ts.values)
        except DegenerateSeriesError:
            skipped.append(ts.id)
            continue
        ids.append(ts.id)
        rows.append(dft(comp))
    spectra = np.stack(rows) if rows else np.empty((0, 0), dtype=np.complex128)
    return SpectralStore(tuple(ids), spectra, mode, tuple(skipped))


def store_from_index(tree: RTree) -> SpectralStore:
    ids = tree.indexed_ids
    spectra = (
        np.stack([tree._spectra[rid] for rid in ids])
        if ids
        else np.empty((0, 0), dtype=np.complex128)
    )
    return SpectralStore(tuple(ids), spectra, tree.mode, tuple(tree.skipped))


def _transformed_matrix(store: SpectralStore, T: Transformation | None):
    """(matrix in the output basis, basis length)."""
    n = store.n
    if T is None:
        return store.spectra, n
    basis = T.output_length(n)
    a, b = T.prefix(basis)
    if basis != n:
        return a * store.spectra[:, np.arange(basis) % n], basis
    return a * store.spectra + b, basis


def sequential_scan(
    store: SpectralStore,
    values,
    epsilon: float,
    transform: Transformation | None = None,
    early_abandon: bool = True,
) -> QueryResult:
    """Exact range answers by scanning every stored spectrum.

    With early_abandon, the running sum of squared coefficient gaps aborts a
    series once it strictly exceeds epsilon^2; the coefficient-touch counter
    records exactly how many coefficients the scan consumed.
    """
    if epsilon < 0:
        raise InvalidInputError("epsilon must be nonnegative")
    counters = Counters()
    if len(store) == 0:
        return QueryResult((), counters)
    M, basis = _transformed_matrix(store, transform)
    comp = store.mode.comparison_signal(values)
    if comp.size != basis:
        raise InvalidInputError(f"query length {comp.size} != expected {basis}")
    Q = transform.query_spectrum(comp) if transform is not None else dft(comp)
    fold = energy_greedy_order(basis)
    gaps = np.abs(M[:, fold] - Q[fold]) ** 2
    eps_sq = epsilon * epsilon
    if early_abandon and math.isfinite(eps_sq):
        csum = np.cumsum(gaps, axis=1)
        over = csum > eps_sq
        abandoned = over[:, -1]
        first_over = np.argmax(over, axis=1)
        touches = np.where(abandoned, first_over + 1, basis)
        totals = csum[:, -1]
        hit = ~abandoned & (totals < eps_sq)
    else:
        totals = np.sum(gaps, axis=1)
        touches = np.full(len(store), basis)
        hit = totals < eps_sq
    counters.postprocessed = len(store)
    counters.coefficient_touches = int(np.sum(touches))
    matches = sorted(
        ((store.ids[i], float(math.sqrt(totals[i]))) for i in np.flatnonzero(hit)),
        key=lambda t: (t[1], t[0]),
    )
    return QueryResult(tuple(matches), counters)


def scan_join(
    store: SpectralStore,
    epsilon: float,
    transform: Transformation | None = None,
    early_abandon: bool = True,
    sides: str = "both",
    raw_pairs: bool = False,
):
    """Nested-loop self-join baseline, each unordered pair evaluated once.

    Returns (pairs, counters) with pairs as (idA, idB, distance), idA < idB
    unless raw_pairs doubles them.
    """
    if epsilon < 0:
        raise InvalidInputError("epsilon must be nonnegative")
    if sides not in ("both", "right"):
        raise InvalidInputError(f"sides must be 'both' or 'right', got {sides!r}")
    counters = Counters()
    N = len(store)
    if N == 0:
        return (), counters
    TM, basis = _transformed_matrix(store, transform)
    if sides == "right" and basis != store.n:
        raise InvalidInputError("one-sided join is undefined for a time warp")
    fold = energy_greedy_order(basis)
    TMf = TM[:, fold]
    plain_f = store.spectra[:, fold] if sides == "right" else TMf
    eps_sq = epsilon * epsilon

    def row_block(gaps: np.ndarray):
        """(totals, touches) under the abandon policy for a gap block."""
        if early_abandon and math.isfinite(eps_sq):
            csum = np.cumsum(gaps, axis=1)
            over = csum > eps_sq
            abandoned = over[:, -1]
            touches = np.where(abandoned, np.argmax(over, axis=1) + 1, basis)
            return csum[:, -1], touches
        return np.sum(gaps, axis=1), np.full(gaps.shape[0], basis)

    pairs: list[tuple[str, str, float]] = []
    order = np.argsort(np.asarray(store.ids))
    ids_sorted = [store.ids[i] for i in order]
    for pos, i in enumerate(order[:-1]):
        rest = order[pos + 1:]
        # pair (a, b): both sides -> D(T(a), T(b)); right -> the smaller of
        # D(a, T(b)) and D(b, T(a))
        totals, touches = row_block(np.abs(TMf[rest] - plain_f[i]) ** 2)
        if sides == "right":
            t2, touch2 = row_block(np.abs(plain_f[rest] - TMf[i]) ** 2)
            totals = np.minimum(totals, t2)
            touches = touches + touch2
        counters.postprocessed += len(rest)
        counters.coefficient_touches += int(np.sum(touches))
        hit = totals < eps_sq
        a = ids_sorted[pos]
        for j in np.flatnonzero(hit):
            b = store.ids[rest[j]]
            pairs.append((a, b, float(math.sqrt(totals[j]))))
    if raw_pairs:
        pairs = pairs + [(b, a, d) for (a, b, d) in pairs]
    pairs.sort(key=lambda t: (t[2], t[0], t[1]))
    return tuple(pairs), counters
