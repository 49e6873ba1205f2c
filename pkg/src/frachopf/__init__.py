"""Fractional-Laplacian singular quadrature, half-space kernel decomposition
checks along shrinking-distance scans, and a moving-planes driver."""

__version__ = "0.1.0"

from .backend import backend_name, set_backend
from .fields import (AntiSymmetricField, CoefficientField, ScalarField,
                     coefficient_from_equation, constant_field, degenerate_w,
                     gaussian, halfcircle, make_w, parse_field,
                     power_bump_coefficient, standard_bubble, x1_gaussian,
                     zero_coefficient)
from .geometry import (RegionLabel, RegionParams, classify, classify_rows,
                       default_eta, make_region_params, partition_check,
                       reflect, reflect_rows)
from .halfspace import (IdentityReport, KernelPair,
                        decomposition_identity_check, i1_region_integral,
                        i2_tail_factor, i2_tail_numeric, kernel_pair,
                        region_map)
from .integrate import QuadSpec, QuadratureResult
from .moving_planes import (MovingPlaneReport, NoStartingPlane,
                            PlaneScanConfig, find_lambda_o, hopf_slope_check,
                            min_scan, suggested_extent)
from .quadrature import (frac_laplacian, frac_laplacian_batch,
                         normalization_constant, oracle_check,
                         spectral_oracle_grid, spectral_reference)
from .verifier import (ContradictionVerdict, DecompositionReport,
                       EstimateSpec, EstimateVerdict, FitSignChange,
                       VerifyOutcome, contradiction_check, delta_scan,
                       estimate_catalog, fit_exponent, geometric_delta_grid,
                       headline_config, verify_estimates)
