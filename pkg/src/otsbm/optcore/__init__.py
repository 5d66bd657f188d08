"""Bundled LP/MILP engine: dense two-phase simplex plus branch and bound."""
from .kernel import KERNEL_NAME, use_kernel
from .lp import DenseLP, LinearModel, LpOutcome, NumericalFailure, solve_dense, solve_lp
from .milp import MilpOutcome, MixedIntegerModel, relative_gap, solve_milp

__all__ = [
    "KERNEL_NAME", "use_kernel", "DenseLP", "LinearModel", "LpOutcome", "NumericalFailure",
    "solve_dense", "solve_lp", "MilpOutcome", "MixedIntegerModel", "relative_gap", "solve_milp",
]
