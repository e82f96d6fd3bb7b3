"""Linear series on hyperelliptic curves and Gunning multisecants of their Kummer varieties."""

from .curve import (
    INFINITY, CurvePoint, Divisor, HyperellipticCurve, divisor_add, divisor_degree,
    divisor_leq, involution, new_curve, point_from_x, random_point,
)
from .gunning import (
    GunningTuple, HDecomposition, PartitionSigma, eta_from_system, eta_independence,
    make_gunning, verify_fiberstrat, verify_gunning_secant, verify_reciprocal, x_sigma,
    z_family_sample,
)
from .linser import (
    Hyperplane, LinearSystem, canonical, fiber, is_defined, multiple_g12, multiplicity,
    nonspecial_monomial, section_divisor, strata_level, verify_multiplicity_numeric, xi,
)
from .periods import (
    JacPoint, PeriodData, abel_jacobi, compute_periods, half_period, is_lattice,
    reduce_mod_lattice,
)
from .report import VerificationReport
from .theta import (
    ThetaChar, kummer, numerical_rank, riemann_constant, theta, theta_second_order,
)

__version__ = "0.1.0"
