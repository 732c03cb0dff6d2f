"""Empirical Wiener chaos toolkit.

Multiple stochastic integrals against normalized empirical measures in a
triangular-array scheme, exact evaluation on occupancy counts, sampling of the
limiting Wiener chaos, and the moment/convergence verification checks.
"""

from ._ewc import (
    CellCounts,
    CellFrame,
    CellwiseFunction,
    ChaosVector,
    ConfigError,
    ControlMeasure,
    GaussianCellRealization,
    GaussianFrame,
    Grid,
    Interval,
    Schedule,
    SeedInfo,
    StepFunction,
    WindowRule,
    averaged_contraction,
    b_coeff,
    chaos_series,
    colored_diagram_count,
    diagram_count,
    draw_counts,
    empirical_integral,
    exact_cross_moment,
    exact_mean,
    expand_tensor_power,
    f_bilinear,
    h_norm,
    hermite,
    k_schedule,
    ks_two_sample,
    l2_inner,
    run_experiment_file,
    sample_gaussian_cells,
    set_partition_count,
    symmetrize,
    tensor,
    truncated_chaos,
    w_n,
    wiener_integral,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
