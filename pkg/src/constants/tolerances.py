"""
This module contains the numerical tolerances and default grids.
"""

# Solvers
REE_TOL = 1e-12
RESIDUAL_BOUND = 1e-10
SIGN_BAND = 1e-12
ROOT_MERGE = 1e-6
BISECTION_XTOL = 1e-12

# Oracle scans
SCAN_GRID_N = 100_000
UNIQUENESS_GRID_N = 10_000

# Finite differences
FD_REL_STEP = 1e-5

# Quadrature
QUAD_MIN_NODES = 11
QUAD_MAX_ERROR = 1e-6
DENSITY_NORM_TOL = 1e-8

# Learning
LEARNING_TOL = 1e-10
LEARNING_TMAX = 200
MIXTURE_AGREEMENT = 1e-8

# Output
CSV_SIGNIFICANT_DIGITS = 17
