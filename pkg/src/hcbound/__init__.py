"""Certified lower bounds a_{P-bar}(exp X)^{rho_P} >= C (1 + ‖X‖²)^m for block parabolics of sl(n)."""

__version__ = "0.1.0"

from .lie_core import MatrixLieAlgebra, bracket, inner_product, make_special_linear, orthonormalize
from .parabolic import GradedStructure, grade_decompose, grading_from_blocks, rho_value
from .exterior import CyclicModule, build_cyclic_module, grade_project, wedge_action
from .psi_map import PsiValue, component_map_T, evaluate_psi, residual_u
from .certificate import (
    LowerBoundCertificate,
    build_certificate,
    check_certificate,
    polynomial_bound_M,
    sigma_norm_bound,
    trivial_scalar_bound,
)
from .oracle import LanglandsFactors, cross_check, langlands_factorize, nilpotent_exp
from .pipeline import Pipeline, build_pipeline

__all__ = [
    "MatrixLieAlgebra", "bracket", "inner_product", "make_special_linear", "orthonormalize",
    "GradedStructure", "grade_decompose", "grading_from_blocks", "rho_value",
    "CyclicModule", "build_cyclic_module", "grade_project", "wedge_action",
    "PsiValue", "component_map_T", "evaluate_psi", "residual_u",
    "LowerBoundCertificate", "build_certificate", "check_certificate",
    "polynomial_bound_M", "sigma_norm_bound", "trivial_scalar_bound",
    "LanglandsFactors", "cross_check", "langlands_factorize", "nilpotent_exp",
    "Pipeline", "build_pipeline",
]
