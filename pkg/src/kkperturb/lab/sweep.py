"""Parameter sweeps and their trend classification."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..perturb import BOUNDED, DIVERGENT, INCONCLUSIVE, classify_slope, top_half_slope

CLASSIFICATIONS = (BOUNDED, DIVERGENT, INCONCLUSIVE)


@dataclass
class SweepReport:
    """One observable evaluated along an increasing parameter.

    ``failure`` is ``None`` for a complete sweep; otherwise it records the
    parameter value at which the observable raised and the error text, and
    ``values`` holds only the points evaluated before it.
    """

    observable: str
    parameter: dict
    values: List[float]
    classification: str
    slope: Optional[float]
    seed: int = 0
    config_hash: str = ""
    failure: Optional[dict] = None

    def __post_init__(self):
        if len(self.values) != len(self.parameter["values"]):
            raise ValueError("values and parameter values must have equal length")
        if self.classification not in CLASSIFICATIONS:
            raise ValueError(f"unknown classification {self.classification!r}")

    @property
    def bounded(self) -> bool:
        return self.classification == BOUNDED and self.failure is None

    @property
    def divergent(self) -> bool:
        return self.classification == DIVERGENT and self.failure is None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepReport":
        return cls(**d)


def classify(params: Sequence[float], values: Sequence[float]):
    """Slope over the top half and the resulting classification."""
    slope = top_half_slope(params, values)
    return slope, classify_slope(slope)


def run_sweep(observable: Callable[[float], float], values: Sequence[float], *,
              name: str, parameter_name: str = "N", seed: int = 0,
              config_hash: str = "", max_workers: int = 1) -> SweepReport:
    """Evaluate ``observable`` at each parameter value and classify the trend.

    Parameters
    ----------
    observable : callable
        Pure function of one parameter value returning a nonnegative real.
    values : sequence
        Strictly increasing, at least three entries.
    max_workers : int
        Points are evaluated on a thread pool when larger than one.
    """
    params = [float(v) if not float(v).is_integer() else int(v) for v in values]
    if len(params) < 3:
        raise ValueError("a sweep needs at least three parameter values")
    if any(b <= a for a, b in zip(params, params[1:])):
        raise ValueError("sweep parameter values must be strictly increasing")

    def safe(p):
        try:
            v = float(observable(p))
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"observable returned {v}")
            return v, None
        except Exception as exc:  # recorded in the report, not swallowed silently
            return None, f"{type(exc).__name__}: {exc}"

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(safe, params))
    else:
        results = []
        for p in params:
            results.append(safe(p))
            if results[-1][1] is not None:
                break

    out: List[float] = []
    failure = None
    for p, (v, err) in zip(params, results):
        if err is not None:
            failure = {"parameter": p, "error": err}
            break
        out.append(v)
    done = params[:len(out)]
    if failure is None and len(out) >= 2:
        slope, cls = classify(done, out)
    else:
        slope = float(top_half_slope(done, out)) if len(out) >= 2 else None
        cls = INCONCLUSIVE
    return SweepReport(name, {"name": parameter_name, "values": done}, out, cls,
                       None if slope is None else float(slope), int(seed), config_hash, failure)
