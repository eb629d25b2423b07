"""Linear transformations on spectra: moving average, reversal, time warping,
scale/shift; safety classification; cost-bounded transformed distance.

A transformation is a pair (a, b) of complex vectors acting on a coefficient
vector X as Y_f = a_f * X_f + b_f, together with affine actions on the mean
and std feature dimensions and a nonnegative cost.

Safety (whether the transformation maps feature-space rectangles to
rectangles, interiors to interiors, exteriors to exteriors):
  * polar representation: safe iff b == 0 (a may be complex);
  * rectangular representation: safe iff a is real (b may be complex).
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, UnknownTransformError
from .series import _window_weights
from .spectral import as_signal, as_spectrum, dft, euclidean_distance, idft

BUILTIN_KINDS = ("identity", "mavg", "rev", "warp", "affine")


@dataclass(frozen=True)
class Transformation:
    """Per-coefficient complex stretch `a` and translation `b`, plus affine
    actions on the mean/std dimensions and a cost.

    `kind`/`params` record how generated transformations (identity, mavg,
    rev, warp) extend their coefficient vectors to other lengths; `affine`
    transformations built from explicit vectors cannot be extended.
    """

    name: str
    a: np.ndarray
    b: np.ndarray
    mean_action: tuple[float, float] = (1.0, 0.0)
    std_action: tuple[float, float] = (1.0, 0.0)
    cost: float = 0.0
    kind: str = "affine"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        a = as_spectrum(self.a)
        b = np.asarray(self.b, dtype=np.complex128)
        if b.ndim == 0:
            b = np.full(a.size, complex(b))
        b = as_spectrum(b)
        if a.size != b.size:
            raise InvalidInputError(f"a and b lengths differ: {a.size} != {b.size}")
        if self.cost < 0:
            raise InvalidInputError("transformation cost must be nonnegative")
        if self.kind not in BUILTIN_KINDS:
            raise InvalidInputError(f"unknown transformation kind {self.kind!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    # -- safety ------------------------------------------------------------

    @property
    def polar_safe(self) -> bool:
        """Safe for the (magnitude, angle) representation: requires b == 0."""
        return bool(np.all(self.b == 0))

    @property
    def rect_safe(self) -> bool:
        """Safe for the (real, imaginary) representation: requires real a."""
        return bool(np.all(self.a.imag == 0))

    @property
    def index_safe(self) -> bool:
        return self.polar_safe or self.rect_safe

    # -- shape -------------------------------------------------------------

    @property
    def warp_factor(self) -> int:
        return int(self.params.get("m", 1)) if self.kind == "warp" else 1

    def output_length(self, n: int) -> int:
        """Length of the transformed coefficient vector for input length n."""
        return n * self.warp_factor

    def prefix(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(a, b) of exactly length k, regenerating when k exceeds the
        materialized length (possible for generated kinds only)."""
        if k < 1:
            raise InvalidInputError("prefix length must be >= 1")
        if k <= self.a.size:
            return self.a[:k], self.b[:k]
        if self.kind == "identity":
            return np.ones(k, dtype=np.complex128), np.zeros(k, dtype=np.complex128)
        if self.kind == "rev":
            return -np.ones(k, dtype=np.complex128), np.zeros(k, dtype=np.complex128)
        if self.kind == "mavg":
            return _mavg_multipliers(k, **self.params), np.zeros(k, dtype=np.complex128)
        if self.kind == "warp":
            return _warp_multipliers(k, **self.params), np.zeros(k, dtype=np.complex128)
        raise InvalidInputError(
            f"transformation {self.name!r} has only {self.a.size} coefficients, "
            f"cannot extend to {k}"
        )

    # -- application -------------------------------------------------------

    def apply_to_spectrum(self, X) -> np.ndarray:
        """Y_f = a_f * X_f + b_f over a coefficient prefix."""
        X = as_spectrum(X)
        a, b = self.prefix(X.size)
        return a * X + b

    def transform_full_spectrum(self, X) -> np.ndarray:
        """Full transformed coefficient vector.

        For length-preserving kinds this is a*X + b over all n coefficients.
        For a time warp by factor m the output has m*n coefficients
        Y_f = a_f * X_{f mod n}, the spectrum of the sample-duplicated series
        under the warp's literal normalization.
        """
        X = as_spectrum(X)
        n = X.size
        out_len = self.output_length(n)
        a, b = self.prefix(out_len)
        if out_len == n:
            return a * X + b
        return a * X[np.arange(out_len) % n]

    def transformed_signal(self, x) -> np.ndarray:
        """Time-domain action of the transformation.

        For a warp this is the literal sample duplication (each sample
        repeated m times); note the frequency-domain warp carries an extra
        sqrt(m) energy scale relative to the unitary DFT of this signal.
        """
        x = as_signal(x)
        if self.kind == "warp":
            return np.repeat(x, self.warp_factor)
        return idft(self.transform_full_spectrum(dft(x)))

    def query_spectrum(self, q) -> np.ndarray:
        """Spectrum of a query signal in this transformation's output basis.

        Length-preserving kinds use the plain unitary DFT. For a warp by m
        the query must already have the warped length m*n and its unitary
        DFT is scaled by sqrt(m) to match the warp's normalization.
        """
        q = as_signal(q)
        m = self.warp_factor
        if m == 1:
            return dft(q)
        if q.size % m != 0:
            raise InvalidInputError(
                f"warp-by-{m} query length {q.size} is not a multiple of {m}"
            )
        return math.sqrt(m) * dft(q)

    def transformed_distance(self, x, q) -> float:
        """Full transformed distance D(T(x), q) in the frequency domain.

        For length-preserving kinds this equals the time-domain Euclidean
        distance between the transformed signal and q (Parseval).
        """
        x = as_signal(x)
        TX = self.transform_full_spectrum(dft(x))
        Q = self.query_spectrum(q)
        if TX.size != Q.size:
            raise InvalidInputError(
                f"transformed length {TX.size} does not match query length {Q.size}"
            )
        return euclidean_distance(TX, Q)


# -- constructors -----------------------------------------------------------


def _mavg_multipliers(k: int, m: int, n: int, weights=None) -> np.ndarray:
    w = _window_weights(m, weights)
    f = np.arange(k)
    t = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(f, t) / n) @ w.astype(np.complex128)


def _warp_multipliers(k: int, m: int, n: int) -> np.ndarray:
    f = np.arange(k)
    t = np.arange(m)
    return np.sum(np.exp(-2j * np.pi * np.outer(f, t) / (m * n)), axis=1)


def make_identity(k: int = 1, cost: float = 0.0) -> Transformation:
    return Transformation(
        name="identity",
        a=np.ones(k, dtype=np.complex128),
        b=np.zeros(k, dtype=np.complex128),
        cost=cost,
        kind="identity",
    )


def make_moving_average(
    m: int, n: int, k: int | None = None, weights=None, cost: float = 0.0
) -> Transformation:
    """m-wide circular moving average as per-coefficient multipliers.

    a_f = sum_{t=0}^{m-1} w_t exp(-j 2 pi t f / n)

    This is the sqrt(n)-scaled unitary DFT of the zero-padded weight vector,
    so applying it in the frequency domain and inverting reproduces
    moving_average_time exactly.
    """
    if not (1 <= m <= n):
        raise InvalidInputError(f"window m={m} out of range for length {n}")
    k = n if k is None else k
    if not (1 <= k <= n):
        raise InvalidInputError(f"retained count k={k} out of range for length {n}")
    w = _window_weights(m, weights)
    params = {"m": m, "n": n}
    if weights is not None:
        params["weights"] = tuple(float(v) for v in w)
    return Transformation(
        name=f"mavg{m}",
        a=_mavg_multipliers(k, m, n, weights),
        b=np.zeros(k, dtype=np.complex128),
        cost=cost,
        kind="mavg",
        params=params,
    )


def make_reverse(k: int = 1, cost: float = 0.0) -> Transformation:
    """Series reversal (multiply every sample by -1): a = -1, b = 0."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    return Transformation(
        name="rev",
        a=-np.ones(k, dtype=np.complex128),
        b=np.zeros(k, dtype=np.complex128),
        cost=cost,
        kind="rev",
    )


def make_time_warp(m: int, n: int, k: int | None = None, cost: float = 0.0) -> Transformation:
    """Uniform time warp: every sample duplicated m times.

    a_f = sum_{t=0}^{m-1} exp(-j 2 pi t f / (m n))

    a_f * X_f is the f-th coefficient of the duplicated series of length m*n
    under the literal normalization (1/sqrt(n)) sum_t s'_t e^{-j2pi tf/(mn)}.
    """
    if m < 1:
        raise InvalidInputError("warp factor m must be >= 1")
    k = n if k is None else k
    if not (1 <= k <= n):
        raise InvalidInputError(f"retained count k={k} out of range for length {n}")
    return Transformation(
        name=f"warp{m}",
        a=_warp_multipliers(k, m, n),
        b=np.zeros(k, dtype=np.complex128),
        cost=cost,
        kind="warp",
        params={"m": m, "n": n},
    )


def make_scale_shift(
    scale,
    shift,
    k: int | None = None,
    mean_action: tuple[float, float] = (1.0, 0.0),
    std_action: tuple[float, float] = (1.0, 0.0),
    cost: float = 0.0,
    name: str = "affine",
) -> Transformation:
    """General per-coefficient scale/shift; safety flags follow from the
    values (real scale -> rect-safe, zero shift -> polar-safe).

    Construction always succeeds; an unsafe transformation only errors when
    handed to the index.
    """
    a = np.atleast_1d(np.asarray(scale, dtype=np.complex128))
    b = np.atleast_1d(np.asarray(shift, dtype=np.complex128))
    if k is not None:
        if a.size == 1:
            a = np.full(k, a[0])
        if b.size == 1:
            b = np.full(k, b[0])
    if a.size == 1 and b.size > 1:
        a = np.full(b.size, a[0])
    if b.size == 1 and a.size > 1:
        b = np.full(a.size, b[0])
    return Transformation(
        name=name,
        a=a,
        b=b,
        mean_action=mean_action,
        std_action=std_action,
        cost=cost,
        kind="affine",
    )


# -- cost-bounded transformed distance (set semantics) -----------------------


@dataclass(frozen=True)
class TransformSet:
    """Transformations available to the distance recursion, with a total
    cost budget and a recursion depth limit."""

    transforms: tuple[Transformation, ...]
    budget: float = math.inf
    depth: int = 1

    def __post_init__(self):
        object.__setattr__(self, "transforms", tuple(self.transforms))
        if self.budget < 0:
            raise InvalidInputError("budget must be nonnegative")
        if self.depth < 0:
            raise InvalidInputError("depth must be nonnegative")


def cost_distance(x, y, ts: TransformSet) -> float:
    """Cost-bounded dissimilarity: the minimum over doing nothing,
    transforming either side, or transforming both sides, charging each
    transformation's cost, recursing to the configured depth.

    Branches whose accumulated cost exceeds the budget are pruned. An empty
    transform set gives the plain Euclidean distance.
    """
    x = as_signal(x)
    y = as_signal(y)
    if x.size != y.size:
        raise InvalidInputError(f"length mismatch: {x.size} != {y.size}")

    def rec(xs: np.ndarray, ys: np.ndarray, depth: int, spent: float) -> float:
        best = euclidean_distance(xs, ys)
        if depth <= 0:
            return best
        for T in ts.transforms:
            c = T.cost
            if spent + c <= ts.budget:
                tx = T.transformed_signal(xs)
                best = min(best, c + rec(tx, ys, depth - 1, spent + c))
                ty = T.transformed_signal(ys)
                best = min(best, c + rec(xs, ty, depth - 1, spent + c))
        for T1 in ts.transforms:
            for T2 in ts.transforms:
                c = T1.cost + T2.cost
                if spent + c <= ts.budget:
                    tx = T1.transformed_signal(xs)
                    ty = T2.transformed_signal(ys)
                    best = min(best, c + rec(tx, ty, depth - 1, spent + c))
        return best

    return rec(x, y, ts.depth, 0.0)


# -- registry ----------------------------------------------------------------

_BUILTIN_SPEC_RE = re.compile(r"^(identity|rev|mavg|warp|affine)(?::(.*))?$")


def parse_transform(spec: str, n: int, k: int | None = None) -> Transformation:
    """Parse an inline transformation spec for a series length n.

    Grammar: ``identity`` | ``rev`` | ``mavg:m[:w1,w2,...]`` | ``warp:m`` |
    ``affine:scale=<c>;shift=<c>[;cost=<r>][;mean=<r>,<r>][;std=<r>,<r>]``.
    Complex constants use Python syntax, e.g. ``2-3j``.
    """
    m_ = _BUILTIN_SPEC_RE.match(spec.strip())
    if not m_:
        raise UnknownTransformError(f"unknown transformation {spec!r}")
    kind, rest = m_.group(1), m_.group(2)
    try:
        if kind == "identity":
            return make_identity(k=n)
        if kind == "rev":
            return make_reverse(k=n)
        if kind == "mavg":
            parts = (rest or "").split(":")
            if not parts[0]:
                raise InvalidInputError("mavg requires a window, e.g. mavg:3")
            m = int(parts[0])
            weights = None
            if len(parts) > 1 and parts[1]:
                weights = [float(v) for v in parts[1].split(",")]
            return make_moving_average(m, n, k=k, weights=weights)
        if kind == "warp":
            if not rest:
                raise InvalidInputError("warp requires a factor, e.g. warp:2")
            return make_time_warp(int(rest), n, k=k)
        return _parse_affine(rest or "", n)
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"bad transformation spec {spec!r}: {exc}") from exc


def _parse_affine(rest: str, n: int) -> Transformation:
    fields = {}
    for part in filter(None, (p.strip() for p in rest.split(";"))):
        key, _, val = part.partition("=")
        fields[key.strip()] = val.strip()
    scale = complex(fields.get("scale", "1"))
    shift = complex(fields.get("shift", "0"))
    cost = float(fields.get("cost", "0"))
    mean_action = _parse_pair(fields.get("mean", "1,0"))
    std_action = _parse_pair(fields.get("std", "1,0"))
    unknown = set(fields) - {"scale", "shift", "cost", "mean", "std"}
    if unknown:
        raise InvalidInputError(f"unknown affine fields {sorted(unknown)}")
    return make_scale_shift(
        scale, shift, k=n, mean_action=mean_action, std_action=std_action, cost=cost
    )


def _parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InvalidInputError(f"expected 'alpha,beta', got {text!r}")
    return float(parts[0]), float(parts[1])


def load_registry(path) -> dict[str, tuple[str, float]]:
    """Read a plain-text transformation registry.

    One entry per line: ``name, kind, params, cost``. `params` uses the
    inline grammar's argument part (``m=20`` / ``m=3;weights=...`` /
    ``scale=..;shift=..``). Blank lines and ``#`` comments are ignored.
    Returns name -> (inline spec, cost).
    """
    registry: dict[str, tuple[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in line.split(",", 3)]
            if len(cells) != 4:
                raise InvalidInputError(
                    f"{path}:{lineno}: expected 'name, kind, params, cost'"
                )
            name, kind, params, cost = cells
            if kind not in BUILTIN_KINDS:
                raise InvalidInputError(f"{path}:{lineno}: unknown kind {kind!r}")
            try:
                registry[name] = (_registry_spec(kind, params), float(cost or 0.0))
            except (KeyError, ValueError) as exc:
                raise InvalidInputError(f"{path}:{lineno}: bad entry: {exc}") from exc
    return registry


def _registry_spec(kind: str, params: str) -> str:
    args = dict(
        p.split("=", 1) for p in filter(None, (s.strip() for s in params.split(";")))
    )
    if kind in ("identity", "rev"):
        return kind
    if kind == "mavg":
        spec = f"mavg:{args['m']}"
        if "weights" in args:
            spec += f":{args['weights']}"
        return spec
    if kind == "warp":
        return f"warp:{args['m']}"
    return "affine:" + params


def resolve_transform(
    name: str,
    n: int,
    k: int | None = None,
    registry: dict[str, tuple[str, float]] | None = None,
) -> Transformation:
    """Resolve a registry name or inline spec to a Transformation."""
    if registry and name in registry:
        spec, cost = registry[name]
        T = parse_transform(spec, n, k=k)
        return dataclasses.replace(T, name=name, cost=cost) if cost else dataclasses.replace(T, name=name)
    return parse_transform(name, n, k=k)
