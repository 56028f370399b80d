"""Numerical toolkit for the circle method with ascending even powers."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .arith import (
    ArcPoint,
    W_approx,
    complete_sum_S,
    delta_k,
    dickman_rho,
    exp_sum_f,
    exp_sum_g,
    in_major_arcs,
    minor_arc_scan,
    smooth_numbers,
    w_approx,
    weyl_sum,
)
from .counting import CountConfig, count_representations, density_scan, restricted_count
from .errors import (
    CoverageError,
    DivergenceError,
    MonotonicityError,
    NumericIntegrityError,
    ScaleLimitError,
    TableFormatError,
)
from .holder import (
    ExponentSet,
    HolderAssignment,
    ford_weights,
    mixed_phi,
    optimize_weights,
    phi,
    reciprocal_sum,
)
from .ledger import MethodParams, Stage, StageReport, full_ledger, omega_eta, stage_margin
from .partitions import PartitionShape, Shape, evaluate_partition, search_min_s
from .singular import A_coeff, chi_p, singular_integral, singular_series
from .tables import (
    LambdaTable,
    NuTable,
    builtin_diagonal,
    lambda_real,
    load_lambda_table,
    load_nu_table,
    nu_value,
)
