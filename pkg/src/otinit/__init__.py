"""Warm-started entropic optimal transport: Sinkhorn solver and initializers."""

from .measures import (
    CostMatrix,
    DiscreteMeasure,
    MeasureError,
    build_cost_1d,
    build_cost_sqeuclidean,
    make_measure,
)
from .sinkhorn import (
    AdaptiveMomentum,
    Anderson,
    DualPotentials,
    EpsilonDecay,
    Momentum,
    SinkhornConfig,
    SolveReport,
    TransportPlan,
    center_potential,
    coupling_from_duals,
    dual_objective,
    marginal_error,
    parse_acceleration,
    sinkhorn_solve,
    softmin_rows,
)

__version__ = "0.1.0"
