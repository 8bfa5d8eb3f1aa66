"""Tensor powers of rank-1 modules over elliptic coefficient rings.

The pipeline runs base field -> shtuka data -> motive basis -> module
operators -> exponential/logarithm coefficients, with a period layer on
top (local expansions at the distinguished point and at infinity).  The
cli module drives it end to end from a small text config.
"""

from .errors import (AlgebraError, ClassNumberError, IdentityError,
                     InexactRootError, InputError, NotPrincipalError,
                     PoleError, PrecisionError, TagError)
from .fields import DenseMatrix, Fq, FqElem, UniPoly
from .curve import (BaseElement, BaseField, CurveFunction, CurveParams,
                    CurvePoint, FuncField, KLaurent, expand_at_point,
                    y_series_at)
from .series import (EXACT, InfSeries, LocalExpansion, TruncationPolicy,
                     embed, embed_expansion)
from .shtuka import (MotiveBasis, ShtukaData, StructureCoeffs, build_basis,
                     build_shtuka, closed_form_a, epsilon,
                     sigma_decompose, solve_drinfeld_divisor,
                     structure_coeffs, verify_a_routes,
                     verify_basis_duality, verify_coefficient_duality)
from .anderson import (AndersonModule, ExpLogCoeffs, TwistedOperator,
                       build_module, diagram_check, eta_display,
                       exp_log_coeffs, operator_suite, theta_display,
                       verify_formal_inverse)
from .periods import (ExpEvalResult, GenFnResult, anderson_gen_fn,
                      coordregular_check, exp_eval, gen_fn_t_action_check,
                      last_coordinate_factor, omega_at_Xi, period_vector,
                      pi_rho, pi_rho_residue_check, res_xi,
                      residue_recovers, residue_shift_check, t_map)
from .cli import FqConfig, JobConfig, parse_config, run_command

__version__ = "0.1.0"

__all__ = [
    "AlgebraError", "ClassNumberError", "IdentityError", "InexactRootError",
    "InputError", "NotPrincipalError", "PoleError", "PrecisionError",
    "TagError",
    "DenseMatrix", "Fq", "FqElem", "UniPoly",
    "BaseElement", "BaseField", "CurveFunction", "CurveParams", "CurvePoint",
    "FuncField", "KLaurent", "expand_at_point", "y_series_at",
    "EXACT", "InfSeries", "LocalExpansion", "TruncationPolicy", "embed",
    "embed_expansion",
    "MotiveBasis", "ShtukaData", "StructureCoeffs", "build_basis",
    "build_shtuka", "closed_form_a", "epsilon", "sigma_decompose",
    "solve_drinfeld_divisor", "structure_coeffs", "verify_a_routes",
    "verify_basis_duality", "verify_coefficient_duality",
    "AndersonModule", "ExpLogCoeffs", "TwistedOperator", "build_module",
    "diagram_check", "eta_display", "exp_log_coeffs", "operator_suite",
    "theta_display", "verify_formal_inverse",
    "ExpEvalResult", "GenFnResult", "anderson_gen_fn", "coordregular_check",
    "exp_eval", "gen_fn_t_action_check", "last_coordinate_factor",
    "omega_at_Xi", "period_vector", "pi_rho", "pi_rho_residue_check",
    "res_xi", "residue_recovers", "residue_shift_check", "t_map",
    "FqConfig", "JobConfig", "parse_config", "run_command",
]
