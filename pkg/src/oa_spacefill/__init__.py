"""Orthogonal-array based space-filling designs and their central limit behaviour."""

__version__ = "0.1.0"

from .anova import AnovaModel, covariance_matrix, decompose, residual_variance_mc
from .design import (Design, DesignKind, build_design, build_latin_hypercube, build_randomized_oa,
                     build_u_design, design_batch)
from .errors import DomainError, InputError, ParseError, ResourceError
from .experiment import (ExperimentReport, estimate_mean, moment_diagnostics, run_clt_experiment,
                         variance_comparison)
from .integrands import Integrand, branin_function, cox_function, get_integrand
from .oa import (CertificationResult, OrthogonalArray, generate_rao_hamming, generate_table1,
                 verify_coincidence_free, verify_strength)
from .rng import RandomStream, uniform_permutation
from .stratify import CellCountReport, assert_oa_stratification, audit_cells, subdivision_index

__all__ = [
    "AnovaModel", "CellCountReport", "CertificationResult", "Design", "DesignKind", "DomainError",
    "ExperimentReport", "InputError", "Integrand", "OrthogonalArray", "ParseError", "RandomStream",
    "ResourceError", "assert_oa_stratification", "audit_cells", "branin_function", "build_design",
    "build_latin_hypercube", "build_randomized_oa", "build_u_design", "covariance_matrix", "cox_function",
    "decompose", "design_batch", "estimate_mean", "generate_rao_hamming", "generate_table1", "get_integrand",
    "moment_diagnostics", "residual_variance_mc", "run_clt_experiment", "subdivision_index",
    "uniform_permutation", "variance_comparison", "verify_coincidence_free", "verify_strength",
]
