"""Generative reduced basis toolkit: Python bindings for the C++ core."""

from grb._core import (  # noqa: F401
    Activation,
    AnalyticGrid,
    ArtifactError,
    Basis,
    DiscreteSpace,
    ErrorEstimates,
    Field,
    FullOrderModel,
    GenerativeSpaces,
    GrbError,
    OnlineResult,
    OutOfRangeError,
    ParamBox,
    ParamSample,
    ReducedModel,
    SnapshotSet,
    analytic_manifold_1d,
    analytic_manifold_2d,
    analytic_manifold_3d,
    build_convdiff_fom,
    build_generative_spaces,
    build_reacdiff_fom,
    chebyshev_extended,
    error_metric,
    g_transform,
    greedy_sample,
    h_transform,
    load_rom,
    make_diagonal_space,
    make_grid_1d,
    make_grid_2d,
    make_grid_3d,
    make_training_grid,
    neighbor_table,
    offline_build,
    pod,
    save_rom,
)

__all__ = [name for name in dir() if not name.startswith("_")]
