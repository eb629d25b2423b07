"""tsquery: similarity search over time series.

Series are indexed by the leading coefficients of their unitary DFT in a
polar-coordinate R-tree. Range, k-NN, and all-pairs join queries can carry a
linear transformation (moving average, reversal, time warping, scale/shift)
that is applied to the index on the fly, with no false dismissals.
"""

from .errors import (
    DataFormatError,
    DegenerateSeriesError,
    InvalidInputError,
    NumericConsistencyError,
    SnapshotChecksumError,
    SnapshotError,
    SnapshotTruncatedError,
    SnapshotVersionError,
    TsQueryError,
    UnknownTransformError,
    UnsafeTransformationError,
)
from .feature import (
    FeaturePoint,
    FeatureRect,
    SpaceMode,
    extract_features,
    mindist,
    point_in_rect,
    rect_overlap,
    search_rectangle,
    transform_point,
    transform_rect,
)
from .rtree import (
    JoinQuery,
    KnnQuery,
    RangeQuery,
    RTree,
    build,
    materialize_transformed_index,
    transformed_join,
    transformed_knn,
    transformed_range_search,
)
from .scan import SpectralStore, sequential_scan, store_from_index, store_from_relation
from .series import NormalForm, Relation, TimeSeries, moving_average_time, normal_form
from .spectral import (
    circular_convolution,
    dft,
    energy,
    euclidean_distance,
    idft,
)
from .transform import (
    TransformSet,
    Transformation,
    cost_distance,
    load_registry,
    make_identity,
    make_moving_average,
    make_reverse,
    make_scale_shift,
    make_time_warp,
    parse_transform,
    resolve_transform,
)

__version__ = "0.1.0"
