"""Scenario linear programs and the embedded simplex solver."""
from .model import LpModel, build_rbc_lp, build_sbc_lp, solve
from .simplex import LpSolution, solve_lp

__all__ = ["LpModel", "LpSolution", "build_rbc_lp", "build_sbc_lp", "solve", "solve_lp"]
