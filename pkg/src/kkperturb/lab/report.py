"""Run configuration, hashing and report persistence (JSON plus CSV)."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from ..opcore import DEFAULT_TOL, ToleranceConfig
from .sweep import SweepReport

RNG_ALGORITHM = "numpy.PCG64"
OUT_ENV = "KKPERTURB_OUT"
DEFAULT_OUT = "kkperturb-out"
CSV_COLUMNS = ("suite", "observable", "parameter", "value", "seed", "config_hash")


class DeterminismError(RuntimeError):
    """Two runs with the same configuration hash produced different numbers."""


class ReportIOError(OSError):
    """A report could not be written."""


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):  # numpy scalar
        return _jsonable(x.item())
    return x


@dataclass
class RunConfig:
    """Everything that determines the numbers a suite produces.

    The output location is deliberately not part of the hash.
    """

    suite: str
    seed: int = 0
    tolerances: ToleranceConfig = DEFAULT_TOL
    params: Dict[str, object] = field(default_factory=dict)
    output: Optional[str] = None

    def canonical(self) -> dict:
        return {
            "suite": self.suite,
            "seed": int(self.seed),
            "rng": RNG_ALGORITHM,
            "tolerances": asdict(self.tolerances),
            "params": _jsonable(self.params),
        }

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def out_dir(self) -> Path:
        if self.output:
            return Path(self.output)
        return Path(os.environ.get(OUT_ENV, DEFAULT_OUT))


@dataclass
class CheckRow:
    draw: int
    lhs: float
    rhs: float
    holds: bool


@dataclass
class CheckReport:
    """Rows ``lhs <= rhs`` (up to slack) from a randomized or fixed check suite."""

    observable: str
    rows: List[CheckRow]
    seed: int = 0
    config_hash: str = ""

    @property
    def passed(self) -> bool:
        return all(r.holds for r in self.rows)

    @property
    def failures(self) -> List[CheckRow]:
        return [r for r in self.rows if not r.holds]

    def to_dict(self) -> dict:
        return {"observable": self.observable, "seed": self.seed,
                "config_hash": self.config_hash,
                "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(d["observable"], [CheckRow(**r) for r in d["rows"]],
                   d["seed"], d["config_hash"])


def _num(x) -> str:
    return repr(float(x))


def csv_rows(suite: str, sweeps: Sequence[SweepReport],
             checks: Sequence[CheckReport] = ()) -> List[Tuple]:
    rows = []
    for r in sweeps:
        pname = r.parameter["name"]
        for p, v in zip(r.parameter["values"], r.values):
            rows.append((suite, r.observable, f"{pname}={p}", _num(v), r.seed, r.config_hash))
    for c in checks:
        for row in c.rows:
            rows.append((suite, c.observable + "/lhs", f"draw={row.draw}", _num(row.lhs),
                         c.seed, c.config_hash))
            rows.append((suite, c.observable + "/rhs", f"draw={row.draw}", _num(row.rhs),
                         c.seed, c.config_hash))
    return rows


def render_csv(rows: Sequence[Tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def document(suite: str, sweeps: Sequence[SweepReport], checks: Sequence[CheckReport] = (),
             config: Optional[RunConfig] = None) -> dict:
    return {
        "suite": suite,
        "config": config.canonical() if config else None,
        "config_hash": config.config_hash if config else None,
        "reports": [r.to_dict() for r in sweeps],
        "checks": [c.to_dict() for c in checks],
    }


def load_document(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _fingerprints(doc: dict) -> Dict[Tuple[str, str], list]:
    out = {}
    for r in doc.get("reports", []):
        out[(r["config_hash"], r["observable"])] = list(r["values"])
    for c in doc.get("checks", []):
        out[(c["config_hash"], c["observable"])] = [(row["lhs"], row["rhs"]) for row in c["rows"]]
    return out


def check_determinism(new: dict, old: dict):
    """Raise if any (config_hash, observable) pair carries different numbers."""
    a, b = _fingerprints(new), _fingerprints(old)
    for key in a.keys() & b.keys():
        if a[key] != b[key]:
            raise DeterminismError(
                f"config {key[0][:12]} observable {key[1]!r} reproduced different values")


def emit_report(reports: Sequence[SweepReport], path, *, suite: str = "",
                checks: Sequence[CheckReport] = (), config: Optional[RunConfig] = None) -> Path:
    """Write ``path`` (JSON) and the companion ``.csv``.

    Raises
    ------
    DeterminismError
        If ``path`` already holds a document whose entries share a config
        hash and observable with this one but differ in value, or if the
        given reports contain such a conflict among themselves.
    ReportIOError
        If either file cannot be written.
    """
    path = Path(path)
    seen: Dict[Tuple[str, str], list] = {}
    for r in reports:
        key = (r.config_hash, r.observable)
        if key in seen and seen[key] != list(r.values):
            raise DeterminismError(
                f"config {r.config_hash[:12]} observable {r.observable!r} "
                f"appears twice with different values")
        seen[key] = list(r.values)
    doc = document(suite, reports, checks, config)
    if path.exists():
        try:
            old = load_document(path)
        except (OSError, ValueError):
            old = {}
        check_determinism(doc, old)
    text = json.dumps(doc, indent=2, sort_keys=True)
    csv_path = path.with_suffix(".csv")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        csv_path.write_text(render_csv(csv_rows(suite, reports, checks)))
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {path}: {exc}") from exc
    return path
