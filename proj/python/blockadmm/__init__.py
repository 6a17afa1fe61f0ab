"""Block-wise ADMM (F-ADMM, J-ADMM, H-ADMM) on top of the C++ core."""

from ._blockadmm import (
    DegenerateTauError,
    Error,
    Instance,
    InvalidConfigError,
    InvalidGroupingError,
    InvalidParameterError,
    IoError,
    NotStronglyConvexError,
    ShapeError,
    UnsupportedObjectiveError,
    gen_l1,
    gen_l2,
    l2_kkt_oracle,
    load_problem,
    prox_half_sq,
    prox_l1,
    solve,
    sweep,
    theory_tau,
)

__all__ = [
    "DegenerateTauError",
    "Error",
    "Instance",
    "InvalidConfigError",
    "InvalidGroupingError",
    "InvalidParameterError",
    "IoError",
    "NotStronglyConvexError",
    "ShapeError",
    "UnsupportedObjectiveError",
    "gen_l1",
    "gen_l2",
    "l2_kkt_oracle",
    "load_problem",
    "prox_half_sq",
    "prox_l1",
    "solve",
    "sweep",
    "theory_tau",
]
