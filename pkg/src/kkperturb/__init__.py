"""Numerical evidence for conformal perturbations of spectral triples.

Submodules: ``opcore`` (Hermitian functional calculus), ``transforms``
(bounded and logarithmic transforms, resolvent quadrature), ``perturb``
(operator inequalities and conformal factors), ``torus``, ``podles``,
``heisenberg`` (model geometries) and ``lab`` (sweeps, reports, CLI).
"""
from .opcore import DEFAULT_TOL, HermitianOperator, ToleranceConfig

__version__ = "0.1.0"
__all__ = ["DEFAULT_TOL", "HermitianOperator", "ToleranceConfig", "__version__"]
