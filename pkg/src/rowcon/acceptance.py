"""The fourteen acceptance criteria as one deterministic battery.

Each criterion returns its verdict and the metrics it was judged on. The
report produced by :func:`run_acceptance` depends only on the seed and the
tolerances; wall-clock runtimes are checked against each criterion's budget
and logged to stderr, but never written into the report, so two runs with
the same seed produce byte-identical reports.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .classify import (
    ccnc_span,
    ccnc_span_oracle,
    classify,
    coinvariant_by_intersection,
    is_ccnc,
    is_qe,
    max_isometric_coinvariant,
    qe_span,
    qe_span_oracle,
)
from .ensembles import (
    KINDS,
    commuting_split_partial_isometry,
    gen_ensemble,
    non_qe_instance,
    random_coisometry_free,
    random_free_shift,
    random_non_qe,
    random_partial_isometry,
    split_partial_isometry,
)
from .errors import RowconError
from .frostman import frostman_identity_residual, frostman_inverse_identity_residual, phi, phi_inv
from .herglotz_lab import nonequivalence_probe, probe_fixture
from .model import (
    CharacteristicData,
    NagyFoiasTheta,
    characteristic_function,
    charfun_partial_isometry,
    colligation_defect,
    colligation_transfer,
    gleason_coordinates,
    gleason_solution,
    kernel_factorization_residual,
    kernel_pullback,
    model_triple,
    qe_membership_test,
)
from .numlin import DEFAULT_TOL, TolerancePolicy, range_basis, spectral_norm
from .rowop import RowContraction, iso_pure_decompose, point_row, resolvents
from .sampling import BallSampler, random_strict_contraction, random_unitary
from .schur import _gram_from_values, coincide_weakly, evaluate_many

__all__ = ["CriterionResult", "CRITERIA", "run_acceptance", "AcceptanceContext"]

log = logging.getLogger("rowcon.acceptance")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    metrics: dict
    budget_s: float | None = None
    runtime_s: float = 0.0
    error: str | None = None

    def as_dict(self) -> dict:
        out = {"id": self.number, "name": self.name, "passed": self.passed, "metrics": self.metrics}
        if self.error is not None:
            out["error"] = self.error
        return out

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.number:2d}: {self.name}"


@dataclass
class AcceptanceContext:
    """Seeded instance lists shared by several criteria, built on first use."""

    seed: int
    tol: TolerancePolicy
    _cache: dict = field(default_factory=dict)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def _cached(self, key: str, build: Callable):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def partial_isometries(self) -> list[RowContraction]:
        def build():
            rng = self.rng(3)
            out = []
            for _ in range(50):
                n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
                out.append(random_partial_isometry(n, d, rng, tol=self.tol))
            return out

        return self._cached("pi", build)

    def ccnc_instances(self) -> list[RowContraction]:
        """50 CCNC members of the coisometry-free ensemble with ``n <= 6``, ``d <= 3``."""

        def build():
            rng = self.rng(6)
            out = []
            while len(out) < 50:
                n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
                T = random_coisometry_free(n, d, rng, tol=self.tol)
                if is_ccnc(T, None, self.tol):
                    out.append(T)
            return out

        return self._cached("ccnc", build)

    def characteristic_data(self) -> list[CharacteristicData]:
        return self._cached(
            "data", lambda: [characteristic_function(T, None, self.tol) for T in self.ccnc_instances()]
        )


def _points(d: int, count: int, ctx: AcceptanceContext) -> np.ndarray:
    return BallSampler(d, count=count, seed=ctx.seed).points()


def c01_frostman_round_trip(ctx):
    rng = ctx.rng(1)
    worst = 0.0
    for _ in range(200):
        p, q = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        a = random_strict_contraction(p, q, rng)
        b = random_strict_contraction(p, q, rng)
        worst = max(
            worst,
            np.linalg.norm(phi_inv(a, phi(a, b, ctx.tol), ctx.tol) - b),
            np.linalg.norm(phi(a, phi_inv(a, b, ctx.tol), ctx.tol) - b),
        )
    return worst <= 1e-10, {"pairs": 200, "max_frobenius_error": worst}


def c02_frostman_kernel_identity(ctx):
    rng = ctx.rng(2)
    worst = 0.0
    for _ in range(100):
        p, q = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        a, b, g = (random_strict_contraction(p, q, rng) for _ in range(3))
        worst = max(
            worst,
            frostman_identity_residual(a, b, g, ctx.tol),
            frostman_inverse_identity_residual(a, b, g, ctx.tol),
        )
    return worst <= 1e-10, {"triples": 100, "max_residual": worst}


def c03_dual_route(ctx):
    worst_route = worst_xi = 0.0
    for V in ctx.partial_isometries():
        triple = model_triple(iso_pure_decompose(V, ctx.tol), V, tol=ctx.tol)
        bV = charfun_partial_isometry(triple)
        for z in _points(V.d, 50, ctx):
            worst_route = max(worst_route, spectral_norm(bV(z) - colligation_transfer(triple, z)))
        worst_xi = max(worst_xi, colligation_defect(triple))
    ok = worst_route <= 1e-8 and worst_xi <= 1e-8
    return ok, {"instances": 50, "points": 50, "max_route_gap": worst_route,
                "max_colligation_defect": worst_xi}


def c04_kernel_factorization(ctx):
    worst = 0.0
    for V in ctx.partial_isometries():
        triple = model_triple(iso_pure_decompose(V, ctx.tol), V, tol=ctx.tol)
        worst = max(worst, kernel_factorization_residual(triple, _points(V.d, 15, ctx)))
    return worst <= 1e-8, {"instances": 50, "grid_points": 15, "max_residual": worst}


def c05_golden_scalar(ctx):
    T = RowContraction(np.array([[[0.5]]]), ctx.tol)
    data = characteristic_function(T, None, ctx.tol)
    theta = NagyFoiasTheta(T, ctx.tol)
    worst_b = worst_theta = worst_kappa = 0.0
    for z in _points(1, 25, ctx):
        w = complex(z[0])
        blaschke = (w - 0.5) / (1 - w / 2)
        kappa = (np.sqrt(3) / 2) / (1 - np.conj(w) / 2)
        worst_b = max(worst_b, abs(complex(data.bT(z)[0, 0]) - blaschke))
        worst_theta = max(worst_theta, abs(complex(theta(z)[0, 0]) - blaschke))
        worst_kappa = max(worst_kappa, abs(complex(kernel_pullback(data, z)[0, 0]) - kappa))
    ok = max(worst_b, worst_theta, worst_kappa) <= 1e-12
    return ok, {"points": 25, "bT_error": worst_b, "theta_error": worst_theta, "kappa_error": worst_kappa}


def c06_main_model_identity(ctx):
    worst_res = worst_gram = 0.0
    rank_ok = True
    for T, data in zip(ctx.ccnc_instances(), ctx.characteristic_data()):
        P = _points(T.d, 15, ctx)
        K = [kernel_pullback(data, z) for z in P]
        R = resolvents(T, P)
        worst_res = max(worst_res, max(spectral_norm(Rz @ data.kappa0 - k) for Rz, k in zip(R, K)))
        Ks = np.concatenate(K, axis=1)
        gram = _gram_from_values(P, evaluate_many(data.bT, P))
        worst_gram = max(worst_gram, spectral_norm(Ks.conj().T @ Ks - gram))
        rank_ok &= range_basis(Ks, ctx.tol).dim == T.n
    ok = worst_res <= 1e-7 and worst_gram <= 1e-7 and rank_ok
    return ok, {"instances": 50, "max_resolvent_residual": worst_res,
                "max_kernel_residual": worst_gram, "kappa_spans_state_space": rank_ok}


def c07_unitary_invariance(ctx):
    rng = ctx.rng(7)
    worst = 0.0
    for T, data in zip(ctx.ccnc_instances(), ctx.characteristic_data()):
        T2 = T.conjugate_by(random_unitary(T.n, rng))
        data2 = characteristic_function(T2, None, ctx.tol)
        wc = coincide_weakly(data.bT, data2.bT, _points(T.d, 15, ctx), ctx.tol)
        worst = max(worst, float("inf") if wc is None else wc.residual)
    return worst <= 1e-6, {"instances": 50, "max_weak_residual": worst}


def c08_nagy_foias(ctx):
    worst = 0.0
    for T, data in zip(ctx.ccnc_instances(), ctx.characteristic_data()):
        wc = coincide_weakly(data.bT, NagyFoiasTheta(T, ctx.tol), _points(T.d, 15, ctx), ctx.tol)
        worst = max(worst, float("inf") if wc is None else wc.residual)
    return worst <= 1e-6, {"instances": 50, "max_weak_residual": worst}


def _mixed_instances(ctx, count: int, salt: int) -> list[RowContraction]:
    rng = ctx.rng(salt)
    out = []
    kinds = KINDS + ("non_qe", "free_shift")
    for i in range(count):
        kind = kinds[i % len(kinds)]
        if kind == "non_qe":
            out.append(random_non_qe(rng, ctx.tol))
            continue
        if kind == "free_shift":
            out.append(random_free_shift(rng, ctx.tol))
            continue
        n, d = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        out.extend(gen_ensemble(n, d, 1, int(rng.integers(0, 2**31)), kind, ctx.tol))
    return out


def c09_span_oracle(ctx):
    mismatches = 0
    dims = []
    for T in _mixed_instances(ctx, 50, 9):
        a, b = ccnc_span(T, None, ctx.tol).dim, ccnc_span_oracle(T, ctx.tol).dim
        c, e = qe_span(T, None, ctx.tol).dim, qe_span_oracle(T, ctx.tol).dim
        mismatches += (a != b) + (c != e)
        dims.append([a, b, c, e])
    return mismatches == 0, {"instances": 50, "mismatches": mismatches,
                             "ccnc_dims_sum": int(sum(x[0] for x in dims)),
                             "qe_dims_sum": int(sum(x[2] for x in dims))}


def c10_hierarchy(ctx):
    violations = commuting_violations = 0
    counts = {"cnc": 0, "ccnc": 0, "qe": 0, "commuting": 0}
    for T in _mixed_instances(ctx, 500, 10):
        r = classify(T, None, ctx.tol)
        counts["cnc"] += r.is_cnc
        counts["ccnc"] += r.is_ccnc
        counts["qe"] += r.is_qe
        counts["commuting"] += r.is_commuting
        violations += (r.is_qe and not r.is_ccnc) + (r.is_ccnc and not r.is_cnc)
        if r.is_commuting:
            commuting_violations += r.is_cnc != r.is_ccnc
    ok = violations == 0 and commuting_violations == 0
    return ok, {"instances": 500, "hierarchy_violations": violations,
                "commuting_violations": commuting_violations, "counts": counts}


def c11_qe_cross_check(ctx):
    rng = ctx.rng(11)
    pool = list(ctx.ccnc_instances())
    pool += [non_qe_instance(r, ctx.tol) for r in (0.25, 0.5, 0.75)]
    pool += [random_non_qe(rng, ctx.tol) for _ in range(5)]
    while len(pool) < 70:
        n, d = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        V = random_partial_isometry(n, d, rng, tol=ctx.tol)
        if is_ccnc(V, None, ctx.tol):
            pool.append(V)
    disagreements = 0
    qe_true = 0
    for T in pool:
        data = characteristic_function(T, None, ctx.tol)
        verdict = is_qe(T, None, ctx.tol)
        qe_true += verdict
        disagreements += verdict != qe_membership_test(data, _points(T.d, 60, ctx))
    return disagreements == 0, {"instances": len(pool), "disagreements": disagreements,
                                "quasi_extreme": qe_true}


def c12_gleason(ctx):
    worst_id = worst_ext = 0.0
    for T, data in zip(ctx.ccnc_instances(), ctx.characteristic_data()):
        b0 = data.bT(np.zeros(T.d))
        for z in _points(T.d, 15, ctx):
            lhs = point_row(z, data.p) @ gleason_solution(data, z)
            worst_id = max(worst_id, spectral_norm(lhs - (data.bT(z) - b0)))
        H = gleason_coordinates(data)
        target = np.eye(data.q) - data.delta.conj().T @ data.delta
        worst_ext = max(worst_ext, spectral_norm(H.conj().T @ H - target))
    ok = worst_id <= 1e-8 and worst_ext <= 1e-10
    return ok, {"instances": 50, "max_identity_residual": worst_id,
                "max_extremality_defect": worst_ext}


def c13_isometric_coinvariant(ctx):
    rng = ctx.rng(13)
    worst_block = worst_route = 0.0
    for _ in range(10):
        m, nc, d = int(rng.integers(1, 3)), int(rng.integers(2, 5)), int(rng.integers(2, 4))
        V, basis = split_partial_isometry(m, nc, d, rng, ctx.tol)
        found = max_isometric_coinvariant(V, ctx.tol)
        worst_block = max(worst_block, found.max_angle(range_basis(basis, ctx.tol)))
    for _ in range(20):
        V, basis = commuting_split_partial_isometry(rng, tol=ctx.tol)
        a = max_isometric_coinvariant(V, ctx.tol)
        b = coinvariant_by_intersection(V, _points(V.d, 30, ctx), ctx.tol)
        truth = range_basis(basis, ctx.tol)
        worst_route = max(worst_route, a.max_angle(b), a.max_angle(truth))
    ok = worst_block <= 1e-7 and worst_route <= 1e-7
    return ok, {"block_instances": 10, "commuting_instances": 20,
                "max_block_angle": worst_block, "max_route_angle": worst_route}


def c14_noninvariance_witness(ctx):
    report = nonequivalence_probe(probe_fixture(seed=ctx.seed, tol=ctx.tol), seed=ctx.seed)
    d = report.as_dict()
    keep = ("precondition_met", "solution_gap", "invariant_gap", "weak_residual_pair",
            "weak_residuals_to_b", "witness", "grid")
    return report.witness, {k: d[k] for k in keep}


CRITERIA: list[tuple[int, str, Callable, float | None]] = [
    (1, "Frostman round trip", c01_frostman_round_trip, 1.0),
    (2, "Frostman kernel identity", c02_frostman_kernel_identity, 1.0),
    (3, "characteristic function dual route", c03_dual_route, 10.0),
    (4, "kernel factorization", c04_kernel_factorization, 10.0),
    (5, "golden scalar case", c05_golden_scalar, None),
    (6, "main model identity", c06_main_model_identity, 30.0),
    (7, "unitary invariance", c07_unitary_invariance, None),
    (8, "Nagy-Foias comparison", c08_nagy_foias, None),
    (9, "span oracle equality", c09_span_oracle, None),
    (10, "classification hierarchy", c10_hierarchy, 60.0),
    (11, "QE cross-check", c11_qe_cross_check, None),
    (12, "Gleason identity and extremality", c12_gleason, None),
    (13, "largest isometric co-invariant subspace", c13_isometric_coinvariant, None),
    (14, "non-invariance witness", c14_noninvariance_witness, None),
]


def run_criterion(number: int, ctx: AcceptanceContext) -> CriterionResult:
    _, name, func, budget = CRITERIA[number - 1]
    start = time.perf_counter()
    try:
        ok, metrics = func(ctx)
        error = None
    except (RowconError, np.linalg.LinAlgError, ValueError) as exc:
        ok, metrics = False, {}
        error = f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    over = budget is not None and elapsed > budget
    if over:
        error = f"runtime {elapsed:.2f}s exceeds the {budget:g}s budget"
    log.info("criterion %d (%s): %s in %.2fs", number, name, "pass" if ok and not over else "fail", elapsed)
    return CriterionResult(number, name, bool(ok) and not over, metrics, budget, elapsed, error)


def run_acceptance(seed: int = 20240611, tol: TolerancePolicy = DEFAULT_TOL,
                   only: list[int] | None = None) -> tuple[dict, list[CriterionResult]]:
    """Run the criteria (all, or the numbers in ``only``) and build the report."""
    ctx = AcceptanceContext(seed, tol)
    numbers = [c[0] for c in CRITERIA] if only is None else list(only)
    results = [run_criterion(k, ctx) for k in numbers]
    failed = [r for r in results if not r.passed]
    report = {
        "version": __version__,
        "seed": seed,
        "tolerances": tol.as_dict(),
        "criteria": [r.as_dict() for r in results],
        "passed": not failed,
        "first_failure": None if not failed else f"{failed[0].number}: {failed[0].name}",
    }
    return report, results
