"""Finite spectral triples: generator matrices, a Dirac matrix and an interior mask."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .opcore import HermitianOperator


@dataclass(frozen=True)
class TruncatedTriple:
    """A truncated spectral triple.

    Parameters
    ----------
    dirac : HermitianOperator
        The Dirac matrix on the truncated space.
    generators : dict
        Named algebra generators acting on the left.
    interior_mask : ndarray of bool
        Basis vectors whose images under the generators used by a check do
        not leave the truncation.
    label : str
    """

    dirac: HermitianOperator
    generators: Dict[str, np.ndarray] = field(default_factory=dict)
    interior_mask: np.ndarray = field(default=None)
    label: str = ""

    def __post_init__(self):
        if self.interior_mask is None:
            object.__setattr__(self, "interior_mask",
                               np.ones(self.dirac.dim, dtype=bool))
        mask = np.asarray(self.interior_mask, dtype=bool)
        if mask.shape != (self.dirac.dim,):
            raise ValueError("interior_mask must have one entry per basis vector")
        for name, g in self.generators.items():
            if np.shape(g) != (self.dirac.dim, self.dirac.dim):
                raise ValueError(f"generator {name!r} has the wrong shape")
        object.__setattr__(self, "interior_mask", mask)

    @property
    def dim(self) -> int:
        return self.dirac.dim

    def restrict(self, M) -> np.ndarray:
        """Compression of ``M`` to the interior indices."""
        idx = np.flatnonzero(self.interior_mask)
        return np.asarray(M)[np.ix_(idx, idx)]
