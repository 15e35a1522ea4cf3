"""Quantum SU(2), its Peter-Weyl basis and the truncated Podles sphere."""
from .algebra import SUq2, PeterWeyl
from .sphere import (PeterWeylIndex, PodlesTruncation, build_podles_dirac, haar_state,
                     mu_half_check, omega_action, podles_truncation, twisted_commutator_norm)

__all__ = ["SUq2", "PeterWeyl", "PeterWeylIndex", "PodlesTruncation", "build_podles_dirac",
           "haar_state", "mu_half_check", "omega_action", "podles_truncation",
           "twisted_commutator_norm"]
