"""Numerical thresholds shared by the library and its tests.

Every tolerance that appears in an algorithmic decision or an acceptance
check is defined once here.
"""

# relative pivot threshold for every Gram-Schmidt / deflation step
RANK_RTOL = 1e-12

# raw Krylov solve refuses Hhat with a larger condition estimate
RAW_COND_MAX = 1e12

# eigenvalues below this fraction of the leading one are clamped to zero
EIG_CLAMP_RTOL = 1e-14

# quadratic forms below -PSD_ATOL * scale signal a non-PSD kernel
PSD_ATOL = 1e-8

# kernel symmetry accepted by eigendecompose
SYMMETRY_RTOL = 1e-10

# Grid.weights must sum to the interval length within this relative error
WEIGHT_SUM_RTOL = 1e-10

# acceptance
EQUIVALENCE_RTOL = 1e-6
ORACLE_CONSTRAINT_TOL = 1e-10
OPTIMALITY_SLACK = 1e-12
H_CLOSED_FORM_TOL = 1e-10
TP_FINAL_RTOL = 1e-12
RATE_SLOPE_BAND = (-0.65, -0.35)
CONSISTENCY_FLOOR_FACTOR = 1.05
CROSSOVER_FACTOR = 10.0
EXACT_RECOVERY_RTOL = 1e-10
CLT_MAX_ABS_SKEW = 0.5
CLT_MAX_ABS_EXCESS_KURTOSIS = 1.0
