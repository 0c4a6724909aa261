"""
Siegel-zero desk lab

Workers for the conditional framework on Landau–Siegel zeros at desk scale:
- characters: the family Ψ of primitive ψ with ψχ primitive, Kronecker χ
- coefficients: ν, υ, ι, λ± tables and their identities
- lfunc: Dirichlet L-values, Δ-factors and the ς/ϑ kernels
- zeros: critical-line scans, argument-principle audit, the shifted set T(ρ,ψ)
- mollifier: F, G and 𝒦±, membership diagnostics for Ψ*, Υ(ρ,ψ)
- functional: Φ, Φ*, Ξ, Θ, U± and the error functionals ℰ₁, ℰ₂
- bvp: g₁, g₂, g₃ for the weighted Sturm-type problem
- approx: the (h, k, r) approximation of φ₀ by exponentials
- sieve_means: large-sieve ratios and zero-anchored means
"""

from .approx import solve_h_k
from .bvp import g1_g2, g3, identity_report
from .characters import FamilySpec, build_family, kronecker_character
from .functional import error_functionals, theta_functional
from .mollifier import MollifierContext, build_tables, membership_diagnostics, upsilon_functional
from .params import AnalysisParams
from .sieve_means import sieve_check, zero_anchored_mean
from .zeros import scan_zero_set, shifted_zero_set

__all__ = [
    'AnalysisParams', 'FamilySpec', 'MollifierContext', 'build_family', 'build_tables',
    'error_functionals', 'g1_g2', 'g3', 'identity_report', 'kronecker_character',
    'membership_diagnostics', 'scan_zero_set', 'shifted_zero_set', 'sieve_check',
    'solve_h_k', 'theta_functional', 'upsilon_functional', 'zero_anchored_mean',
]
