"""Symbolic geometry of quadratic polymomenta Hamiltonians on dual 1-jet bundles.

The package builds, for a multi-time Hamilton space (temporal metric h,
spatial data g/U/F or a raw single-time Hamiltonian), the canonical
nonlinear connection, the generalized Cartan canonical connection, and all
local torsion and curvature components, exactly as symbolic expressions,
and verifies them against independent numeric oracles.
"""

from .chart import ChartSpec, Point
from .expr import (
    Expr, Evaluator, EvalDomainError,
    constant, variable, t_var, x_var, p_var,
    differentiate, evaluate, substitute, free_variables, to_source,
)
from .parser import parse_scalar, ParseError, UnknownVariableError
from .tensors import (
    Slot, DTensor, MetricField, DegenerateMetricError,
    symbolic_inverse, temporal_christoffel, spatial_christoffel,
    christoffel_curvature_spatial, christoffel_curvature_temporal,
)
from .spaces import (
    HamiltonSpace, RawHamiltonian, Electrodynamic, NonlinearConnection,
    RegularityReport, NonQuadraticError,
    vertical_metric, check_kronecker_regularity, decompose_electrodynamic,
    canonical_nlc_general, canonical_nlc_electrodynamic,
)
from .cartan import (
    CartanCoefficients, CovariantKind,
    adapted_delta_temporal, adapted_delta_spatial,
    cartan_coefficients, cartan_coefficients_full, covariant_derivative,
)
from .torsion_curvature import (
    TableCell, TorsionSet, CurvatureSet,
    torsion_components, curvature_components, verify_table_zeros,
)
from .verify import (
    AffineChartMap, ResidualReport, SampleBoxes,
    sample_points, fd_check, metric_condition_suite,
    nlc_transformation_check, reduction_equivalence_check,
    table_zero_suite, fd_pipeline_suite, transform_space,
)
from .config import SpaceConfig, ConfigError, bundled_config, bundled_names

__version__ = "0.1.0"
