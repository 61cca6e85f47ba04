"""Ball Mapper: epsilon-net ball covers of point clouds and their graphs."""

__version__ = "0.1.0"

from .cloud import (
    PointCloud,
    PrepReport,
    filter_range,
    load_csv,
    normalize_minmax,
    rolling_cloud,
    rolling_moments,
    write_csv,
)
from .color import (
    Coloring,
    ReferenceSpec,
    color_by_axis,
    color_by_distance,
    color_by_outcome,
    color_by_year,
    scale_to_palette,
)
from .errors import BallMapperError, CSVFormatError, DataError, MismatchError
from .graph import BallSummary, BMGraph, ball_summary, build_graph, connected_components, list_outliers
from .kernels import BACKEND
from .net import BallCover, Metric, NetPolicy, PickOrder, greedy_net, pairwise_distance
from .render import Layout, export_dot, layout_graph, render_svg
from .synth import (
    OutcomeSpec,
    SyntheticSpec,
    gen_correlated,
    gen_grid,
    gen_normal_cloud,
    gen_outcome,
    standardize,
)
