"""Berezin transforms and ranges of finite-rank operators on Hardy, Bergman and C^n spaces."""

__version__ = "0.1.0"

from .errors import (BerezinError, ConvergenceError, DocumentError, DomainError,  # noqa: E402
                     NotHermitianError, NotPositiveError, SpaceMismatchError, UnsupportedSpaceError)
from .rkhs import (BERGMAN, HARDY, AnalyticPolynomial, BerezinValue, FiniteRankOperator,  # noqa: E402
                   SpaceSpec, apply_operator, berezin_transform,
                   berezin_transform_truncated_diagonal, inner_product, kernel_eval,
                   kernel_norm_sq, truncated_diagonal_operator, truncated_kernel)
from .ranges import (DiscGrid, NonconvexityWitness, RangeSample, closed_form_radius,  # noqa: E402
                     estimate_berezin_radius, find_nonconvexity_witness, locate_berezin_radius,
                     match_closed_form, real_interval_summary, real_part_value, sample_range,
                     symmetry_defect)
from .matrices import (EllipseParams, HullPolygon, berezin_quantities_finite, convex_hull,  # noqa: E402
                       elliptic_range_2x2, geometric_mean, hausdorff_distance, hermitian_eig,
                       hull_vs_numrange_gap, is_psd, numerical_range_boundary, polar_decompose,
                       psd_power)
from .inequalities import (InequalityReport, TrialConfig, angle_between, gamma, mu,  # noqa: E402
                           segment_mean_integral, verify_geomean_bounds, verify_kato,
                           verify_radius_bound, verify_refined_kato, verify_scalar_suite)
