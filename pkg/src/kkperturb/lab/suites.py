"""Verification suites binding the numerical modules to reports.

Every suite returns a :class:`SuiteResult`. Randomized suites draw from
``numpy.random.Generator(PCG64(seed))`` in a fixed order, so a seed and a
parameter set determine every number written out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..opcore import (DEFAULT_TOL, HermitianOperator, ToleranceConfig, operator_norm,
                      random_hermitian, random_invertible, random_positive, random_unitary)
from ..perturb import (BOUNDED, DIVERGENT, ConformalFactor, ConsistencyError,
                       converse_decompose, inner_derivation_norm_exact, interpolation_check,
                       mu_fractional_bounds_check, sandwich_check, stampfli_bound)
from ..transforms import log_transform, resolvent_power_quadrature
from .report import CheckReport, CheckRow, RunConfig
from .sweep import SweepReport, run_sweep


@dataclass
class SuiteResult:
    suite: str
    config: RunConfig
    sweeps: List[SweepReport] = field(default_factory=list)
    checks: List[CheckReport] = field(default_factory=list)
    expected: Dict[str, str] = field(default_factory=dict)

    def failures(self) -> List[str]:
        bad = [c.observable for c in self.checks if not c.passed]
        for r in self.sweeps:
            want = self.expected.get(r.observable)
            if r.failure is not None or (want is not None and r.classification != want):
                bad.append(r.observable)
        return bad

    @property
    def passed(self) -> bool:
        return not self.failures()

    def summary_lines(self) -> List[str]:
        lines = []
        for c in self.checks:
            worst = max((r.lhs - r.rhs for r in c.rows), default=0.0)
            lines.append(f"{c.observable:<44} {len(c.rows):>6} rows  "
                         f"max(lhs-rhs)={worst: .3e}  {'PASS' if c.passed else 'FAIL'}")
        for r in self.sweeps:
            want = self.expected.get(r.observable)
            ok = r.failure is None and (want is None or r.classification == want)
            vals = ", ".join(f"{v:.6g}" for v in r.values)
            slope = "n/a" if r.slope is None else f"{r.slope:.4f}"
            lines.append(f"{r.observable:<44} [{vals}] slope={slope} "
                         f"{r.classification}  {'PASS' if ok else 'FAIL'}")
        return lines


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _check(name: str, rows, config: RunConfig) -> CheckReport:
    return CheckReport(name, list(rows), config.seed, config.config_hash)


def _log_uniform(rng, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


# -- perturbation inequalities -------------------------------------------------

ALPHAS = (0.25, 0.5, 0.75, 1.0)


def verify_interpolation(seed: int = 0, draws: int = 1000, max_dim: int = 12,
                         max_cond: float = 100.0, tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    cfg = RunConfig("verify-interpolation", seed, tol,
                    {"draws": draws, "max_dim": max_dim, "max_cond": max_cond, "alphas": ALPHAS})
    rng = make_rng(seed)
    rows = []
    for k in range(draws):
        n = int(rng.integers(1, max_dim + 1))
        alpha = float(rng.choice(ALPHAS))
        A = random_positive(rng, n, _log_uniform(rng, 1.0, max_cond))
        B = random_positive(rng, n, _log_uniform(rng, 1.0, max_cond))
        T = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        r = interpolation_check(A, B, T, alpha, tol)
        rows.append(CheckRow(k, r.lhs, r.rhs, r.holds))
    return SuiteResult(cfg.suite, cfg, checks=[_check("interpolation", rows, cfg)])


def _random_psd(rng, n: int) -> np.ndarray:
    """Positive semidefinite, occasionally singular, with a random overall scale."""
    w = np.exp(rng.uniform(np.log(1e-2), np.log(10.0), size=n))
    if n > 1 and rng.uniform() < 0.2:
        w[0] = 0.0
    U = random_unitary(rng, n)
    X = (U * w) @ U.conj().T
    return 0.5 * (X + X.conj().T)


STAMPFLI_WITNESS = (np.diag([1.0, 2.0]), np.diag([3.0, 5.0]), 4.0)


def verify_stampfli(seed: int = 0, draws: int = 1000, max_dim: int = 6,
                    tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    cfg = RunConfig("verify-stampfli", seed, tol, {"draws": draws, "max_dim": max_dim})
    rng = make_rng(seed)
    rows = []
    for k in range(draws):
        a = _random_psd(rng, int(rng.integers(1, max_dim + 1)))
        b = _random_psd(rng, int(rng.integers(1, max_dim + 1)))
        lhs = inner_derivation_norm_exact(a, b)
        rhs = stampfli_bound(a, b, tol)
        rows.append(CheckRow(k, lhs, rhs, lhs <= rhs + tol.inequality_slack))
    a, b, target = STAMPFLI_WITNESS
    exact = inner_derivation_norm_exact(a, b)
    bound = stampfli_bound(a, b, tol)
    err = max(abs(exact - target), abs(bound - target))
    witness = [CheckRow(0, err, 1e-12, err <= 1e-12)]
    return SuiteResult(cfg.suite, cfg, checks=[_check("stampfli", rows, cfg),
                                               _check("stampfli-witness", witness, cfg)])


def verify_sandwich(seed: int = 0, draws: int = 500, max_dim: int = 12, max_cond: float = 20.0,
                    tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    """Rows carry ``lhs = -min(margins)`` against ``rhs = 0``."""
    cfg = RunConfig("verify-sandwich", seed, tol,
                    {"draws": draws, "max_dim": max_dim, "max_cond": max_cond})
    rng = make_rng(seed)
    rows = []
    for k in range(draws):
        n = int(rng.integers(1, max_dim + 1))
        D = random_hermitian(rng, n, _log_uniform(rng, 0.1, 10.0))
        mu = ConformalFactor(random_invertible(rng, n, _log_uniform(rng, 1.0, max_cond),
                                               _log_uniform(rng, 0.2, 5.0)))
        r = sandwich_check(D, mu, tol)
        rows.append(CheckRow(k, -min(r.margin_lower, r.margin_upper), 0.0,
                             r.holds(tol.inequality_slack)))
    return SuiteResult(cfg.suite, cfg, checks=[_check("sandwich", rows, cfg)])


def verify_mu_fractional(seed: int = 0, draws: int = 200, max_dim: int = 12,
                         max_cond: float = 20.0, tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    cfg = RunConfig("verify-mu-fractional", seed, tol,
                    {"draws": draws, "max_dim": max_dim, "max_cond": max_cond, "alphas": ALPHAS})
    rng = make_rng(seed)
    first, second = [], []
    for k in range(draws):
        n = int(rng.integers(1, max_dim + 1))
        alpha = float(rng.choice(ALPHAS))
        D = random_hermitian(rng, n, _log_uniform(rng, 0.1, 10.0))
        mu = ConformalFactor(random_invertible(rng, n, _log_uniform(rng, 1.0, max_cond)))
        r1, r2 = mu_fractional_bounds_check(D, mu, alpha, tol)
        first.append(CheckRow(k, r1.lhs, r1.rhs, r1.holds))
        second.append(CheckRow(k, r2.lhs, r2.rhs, r2.holds))
    return SuiteResult(cfg.suite, cfg, checks=[_check("mu-fractional-left", first, cfg),
                                               _check("mu-fractional-right", second, cfg)])


QUADRATURE_DIMS = (1, 3, 8, 16, 32, 64)
QUADRATURE_ALPHAS = (0.25, 0.5, 0.75)


def verify_quadrature(seed: int = 0, dims: Sequence[int] = QUADRATURE_DIMS,
                      rtol: float = 1e-6, tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    """Relative error of the resolvent quadrature against the eigendecomposition."""
    cfg = RunConfig("verify-quadrature", seed, tol,
                    {"dims": list(dims), "alphas": QUADRATURE_ALPHAS, "rtol": rtol})
    rng = make_rng(seed)
    rows = []
    k = 0
    for n in dims:
        D = HermitianOperator(random_hermitian(rng, n, _log_uniform(rng, 0.1, 30.0)), tol)
        for alpha in QUADRATURE_ALPHAS:
            exact = D.bracket(-2.0 * alpha)
            approx = resolvent_power_quadrature(D, alpha, tol=tol).matrix
            err = operator_norm(approx - exact) / operator_norm(exact)
            rows.append(CheckRow(k, err, rtol, err < rtol))
            k += 1
    return SuiteResult(cfg.suite, cfg, checks=[_check("quadrature", rows, cfg)])


def verify_converse(seed: int = 0, draws: int = 500, max_dim: int = 12,
                    rtol: float = 1e-8, tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    """Reconstruction residual relative to ``1 + ||D2||`` plus the ``D2 = D1`` case."""
    cfg = RunConfig("verify-converse", seed, tol,
                    {"draws": draws, "max_dim": max_dim, "rtol": rtol})
    rng = make_rng(seed)
    rows, same = [], []
    for k in range(draws):
        n = int(rng.integers(1, max_dim + 1))
        D1 = random_hermitian(rng, n, _log_uniform(rng, 0.1, 10.0))
        D2 = random_hermitian(rng, n, _log_uniform(rng, 0.1, 10.0))
        try:
            parts = converse_decompose(D1, D2, tol)
            rel = parts.residual / (1.0 + operator_norm(D2))
        except ConsistencyError:
            rel = math.inf
        rows.append(CheckRow(k, rel, rtol, rel < rtol))
        if k < 50:
            p = converse_decompose(D1, D1.copy(), tol)
            dev = max(float(np.abs(p.mu.mu - np.eye(n)).max()), float(np.abs(p.T.matrix).max()))
            same.append(CheckRow(k, dev, 0.0, dev == 0.0))
    return SuiteResult(cfg.suite, cfg, checks=[_check("converse", rows, cfg),
                                               _check("converse-identity", same, cfg)])


VERIFY_SUITES = {
    "interpolation": verify_interpolation,
    "stampfli": verify_stampfli,
    "sandwich": verify_sandwich,
    "quadrature": verify_quadrature,
    "converse": verify_converse,
    "mu-fractional": verify_mu_fractional,
}


# -- torus ----------------------------------------------------------------------------

def torus_suite(theta: Optional[float] = None, tau: complex = 1j,
                n_list: Sequence[int] = (8, 12, 16, 20, 24), beta: float = 0.5,
                k_spec: Optional[Mapping[Tuple[int, int], complex]] = None, seed: int = 0,
                identity_tol: float = 1e-10, tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    from ..torus import (DEFAULT_K, DEFAULT_THETA, torus_conformal_observable,
                         torus_identity_residual)
    theta = DEFAULT_THETA if theta is None else float(theta)
    k_spec = dict(DEFAULT_K if k_spec is None else k_spec)
    cfg = RunConfig("torus", seed, tol, {
        "theta": theta, "tau": complex(tau), "n_list": list(n_list), "beta": beta,
        "k": sorted([list(key) + [complex(v)] for key, v in k_spec.items()])})
    name = f"torus:conformal-difference:beta={beta:g}"
    sweep = run_sweep(lambda N: torus_conformal_observable(int(N), theta, tau, beta, k_spec),
                      n_list, name=name, parameter_name="N", seed=seed,
                      config_hash=cfg.config_hash)
    rows = []
    for k, N in enumerate(n_list):
        r = torus_identity_residual(int(N), theta, tau, k_spec)
        rows.append(CheckRow(k, r, identity_tol, r < identity_tol))
    return SuiteResult(cfg.suite, cfg, sweeps=[sweep],
                       checks=[_check("torus:identity-residual", rows, cfg)],
                       expected={name: BOUNDED})


# -- Podles sphere ------------------------------------------------------------------

PODLES_SUITES = ("relations", "omega", "mu", "twisted")
MODULAR_PAIRS = ((("a",), ("d",)), (("b",), ("c",)), (("a", "b"), ("c", "d")),
                 (("c",), ("b",)), (("a", "c"), ("d", "b")))


def _residual_rows(values: Mapping[str, float], rtol: float):
    return [CheckRow(k, float(v), rtol, float(v) < rtol)
            for k, v in enumerate(values[key] for key in sorted(values))]


def podles_checks(q: float, L: float, suite: str, rtol: float, cfg: RunConfig) -> List[CheckReport]:
    from ..podles import sphere as ps
    tr = ps.podles_truncation(q, L)
    tag = f"podles:q={q:g}:L={L:g}"
    out = []
    if suite == "relations":
        groups = {
            "relations": ps.relation_residuals(tr),
            "leibniz": ps.leibniz_residuals(tr),
            "star-pairing": ps.star_relation_residuals(tr),
            "modular": {f"{''.join(x)}|{''.join(y)}": ps.modular_residual(tr, x, y)
                        for x, y in MODULAR_PAIRS},
            "dirac-symmetry": {"D": ps.dirac_symmetry_residual(tr)},
        }
    elif suite == "omega":
        comp = {f"{i},{ip}": ps.omega_composition_residual(tr, i, ip)
                for i in (-0.5, 0.5) for ip in (-0.5, 0.5)}
        adj = {}
        for g, (i2, j2) in ps.FUNDAMENTAL.items():
            for z in (0.0, 0.5, 1.0):
                adj[f"{g}@{z:g}"] = ps.omega_adjoint_residual(tr, ps.PeterWeylIndex(1, i2, j2), z)
        groups = {"omega-composition": comp, "omega-adjoint": adj}
    elif suite == "mu":
        rep = ps.mu_half_check(tr)
        groups = {"mu-half": {
            "display": rep.display_residual, "partition": rep.partition_residual,
            "idempotent": rep.idempotent_residual, "selfadjoint": rep.selfadjoint_residual,
            "minimal-polynomial": rep.minimal_polynomial_residual}}
    else:
        raise ValueError(f"unknown podles check suite {suite!r}")
    for key, vals in groups.items():
        out.append(_check(f"{tag}:{key}", _residual_rows(vals, rtol), cfg))
    return out


def podles_suite(q: float = 0.5, l_max: float = 3.0, suite: str = "relations",
                 l_list: Sequence[float] = (1.5, 2.5, 3.5, 4.5), generators: Sequence[str] = "abcd",
                 seed: int = 0, rtol: float = 1e-8, tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    """Algebraic residuals at ``(q, l_max)`` or, for ``suite="twisted"``, the ``L`` sweeps."""
    if suite not in PODLES_SUITES:
        raise ValueError(f"unknown podles suite {suite!r}")
    params = {"q": q, "suite": suite, "rtol": rtol}
    if suite == "twisted":
        params.update(l_list=list(l_list), generators=list(generators))
    else:
        params["L"] = l_max
    cfg = RunConfig("podles", seed, tol, params)
    if suite != "twisted":
        return SuiteResult(cfg.suite, cfg, checks=podles_checks(q, l_max, suite, rtol, cfg))

    from ..podles.sphere import podles_truncation, twisted_commutator_norm
    sweeps, expected = [], {}
    for g in generators:
        for mode, want in (("twisted", BOUNDED), ("untwisted", DIVERGENT)):
            name = f"podles:q={q:g}:{mode}:{g}"
            sweeps.append(run_sweep(
                lambda L, g=g, mode=mode: twisted_commutator_norm(
                    podles_truncation(q, L), g, 0.0, mode=mode),
                l_list, name=name, parameter_name="L", seed=seed, config_hash=cfg.config_hash))
            expected[name] = want
    return SuiteResult(cfg.suite, cfg, sweeps=sweeps, expected=expected)


# -- Heisenberg ----------------------------------------------------------------------

def heisenberg_suite(radii: Sequence[int] = (10, 20, 40, 80),
                     generators: Optional[Sequence[Tuple[int, int, int]]] = None,
                     dilations: Sequence[int] = (1, 2, 3), dilation_radius: int = 20,
                     contrast_exponent: float = -0.125, seed: int = 0,
                     tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    from ..heisenberg import GENERATORS, HeisPoint, commutator_bound_sweep, dilation_check
    gens = [tuple(g) for g in (GENERATORS if generators is None else generators)]
    cfg = RunConfig("heisenberg", seed, tol, {
        "radii": list(radii), "generators": [list(g) for g in gens],
        "dilations": list(dilations), "dilation_radius": dilation_radius,
        "contrast_exponent": contrast_exponent})
    sweeps, expected = [], {}
    for g in gens:
        r = commutator_bound_sweep(HeisPoint(*g), radii, -0.25, seed, cfg.config_hash)
        sweeps.append(r)
        expected[r.observable] = BOUNDED
    # the contrast uses the generator with the fastest-growing symbol difference
    r = commutator_bound_sweep(HeisPoint(1, 0, 0), radii, contrast_exponent, seed, cfg.config_hash)
    sweeps.append(r)
    expected[r.observable] = DIVERGENT
    rows = []
    for t in dilations:
        rep = dilation_check(int(t), dilation_radius)
        ok = rep.exact and rep.index == t ** 4
        rows.append(CheckRow(int(t), rep.max_residual, 0.0, ok))
    return SuiteResult(cfg.suite, cfg, sweeps=sweeps,
                       checks=[_check("heisenberg:dilation", rows, cfg)], expected=expected)


# -- log dampening ----------------------------------------------------------------------

def log_dampening_norm(N: int, kappa: float) -> float:
    """``||L_{kappa D} - L_D||`` for ``D = diag(-N..N)``."""
    d = np.arange(-N, N + 1, dtype=float)
    D = HermitianOperator.diag(d)
    Dk = HermitianOperator.diag(kappa * d)
    return operator_norm(log_transform(Dk).matrix - log_transform(D).matrix)


def log_dampen_suite(kappa: float = 2.0, n_list: Sequence[int] = (64, 128, 256, 512),
                     lower_slack: float = 0.01, upper_slack: float = 1e-6, seed: int = 0,
                     tol: ToleranceConfig = DEFAULT_TOL) -> SuiteResult:
    """Sweep of the log-transform difference and the band ``log kappa`` at the last ``N``.

    The band row has ``lhs = |value - log kappa|`` against the slack on the
    side the value falls.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    cfg = RunConfig("log-dampen", seed, tol, {"kappa": kappa, "n_list": list(n_list),
                                              "lower_slack": lower_slack,
                                              "upper_slack": upper_slack})
    name = f"log-dampen:kappa={kappa:g}"
    sweep = run_sweep(lambda N: log_dampening_norm(int(N), kappa), n_list, name=name,
                      parameter_name="N", seed=seed, config_hash=cfg.config_hash)
    target = abs(math.log(kappa))
    rows = []
    if sweep.values:
        v = sweep.values[-1]
        slack = upper_slack if v >= target else lower_slack
        rows.append(CheckRow(int(sweep.parameter["values"][-1]), abs(v - target), slack,
                             abs(v - target) <= slack))
    return SuiteResult(cfg.suite, cfg, sweeps=[sweep],
                       checks=[_check("log-dampen:band", rows, cfg)], expected={name: BOUNDED})
