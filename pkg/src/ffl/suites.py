"""
Seeded property suites.

Each suite maps ``(n, rng, ctx)`` to a list of ``(property, residual, tol)``
triples. ``run_suite`` drives them over ``n_list`` x ``trials`` with child
seeds that depend only on ``(seed, n, trial)``, so any trial can be replayed
on its own and the report does not depend on execution order.

The trace appears here only as the independent oracle for the quasi-trace.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import constructions as con
from .errors import FFLError
from .matrix import adjoint, hermitian_part, opnorm, read_matrix, svd
from .quasitrace import Q, approximation_sequence, check_axioms, quasi_trace_hermitian
from .report import SuiteConfig, SuiteReport, make_record
from .star import (
    Idempotent,
    Projection,
    approximate_invertible,
    dimension,
    lattice_join,
    lattice_meet,
    left_support,
    mvn_equivalent,
    polar_decompose,
    random_annihilating_family,
    random_idempotent,
    random_invertible,
    random_matrix,
    random_projection,
    random_unitary,
    right_support,
)

LAMBDAS = (1.0, -1.0, 1j, 1 + 1j, 2.5)
DEFAULT_COND = {"lemma4": 1e3, "corollaries": 50.0}
IDEMPOTENT_COND = 10.0

Triples = list[tuple[str, float, float]]


@dataclass(frozen=True)
class TrialContext:
    cond_bound: float | None = None
    fixture: np.ndarray | None = None

    def cond(self, suite: str) -> float:
        if self.cond_bound is not None:
            return self.cond_bound
        return DEFAULT_COND.get(suite, IDEMPOTENT_COND)


def child_seed(seed: int, n: int, trial: int) -> int:
    """Counter-based child seed for trial ``trial`` at dimension ``n``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(n, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _np_opnorm(x) -> float:
    return float(np.linalg.norm(x, 2))


def _idempotent_input(ctx: TrialContext, n: int, k: int, cond: float, rng) -> np.ndarray:
    if ctx.fixture is not None:
        return Idempotent.from_matrix(ctx.fixture).matrix
    return random_idempotent(n, k, cond, rng).matrix


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def polar_suite(n: int, rng, ctx: TrialContext) -> Triples:
    x = ctx.fixture if ctx.fixture is not None else random_matrix(n, rng, int(rng.integers(0, n + 1)))
    v, m = polar_decompose(x)
    L, R = left_support(x), right_support(x)
    xn = _np_opnorm(x)
    vm = v.matrix
    # independent candidate from LAPACK's SVD, same support rank
    uu, _, vh = np.linalg.svd(x)
    r = L.rank
    cand = uu[:, :r] @ vh[:r, :]
    return [
        ("polar_reconstruction", _np_opnorm(x - vm @ m) / xn if xn > 0 else _np_opnorm(vm @ m), 1e-10),
        ("left_support", _np_opnorm(vm @ adjoint(vm) - L.matrix), 1e-10),
        ("right_support", _np_opnorm(adjoint(vm) @ vm - R.matrix), 1e-10),
        ("partial_isometry", _np_opnorm(vm @ adjoint(vm) @ vm - vm), 1e-10),
        ("support_rank", float(abs(L.rank - R.rank)), 0.0),
        ("uniqueness", _np_opnorm(cand - vm), 1e-8),
    ]


def remark2_suite(n: int, rng, ctx: TrialContext) -> Triples:
    x = ctx.fixture if ctx.fixture is not None else random_matrix(n, rng, int(rng.integers(0, n + 1)))
    out: Triples = []
    for eps in (1e-1, 1e-3):
        y, u = approximate_invertible(x, eps)
        smin = float(np.linalg.svd(y, compute_uv=False)[-1])
        tag = f"eps={eps:g}"
        out += [
            (f"remark2_error[{tag}]", abs(_np_opnorm(x - y) - eps), 1e-12),
            (f"unitarity[{tag}]", _np_opnorm(adjoint(u) @ u - np.eye(n)), 1e-10),
            (f"invertible_margin[{tag}]", max(0.0, eps - smin), 1e-12),
        ]
    return out


def _projection_pair(n: int, rng):
    a, b = int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))
    j = int(rng.integers(0, min(a, b) + 1))
    u = random_unitary(n, rng)
    p = Projection(u[:, :a])
    extra = rng.standard_normal((n, b - j)) + 1j * rng.standard_normal((n, b - j))
    qb, _ = np.linalg.qr(np.hstack([u[:, :j], extra]))
    q = Projection(qb[:, :b])
    return p, q, j


def dimension_suite(n: int, rng, ctx: TrialContext) -> Triples:
    p, q, j = _projection_pair(n, rng)
    try:
        mvn_equivalent(p, q)
        found = True
    except FFLError:
        found = False
    join, meet = lattice_join(p, q), lattice_meet(p, q)
    expected_meet = p.rank + q.rank - min(n, p.rank + q.rank - j)
    k = int(rng.integers(0, n + 1))
    u = random_unitary(n, rng)
    split = int(rng.integers(0, k + 1))
    p1, p2 = Projection(u[:, :split]), Projection(u[:, split:k])
    p12 = Projection.from_matrix(p1.matrix + p2.matrix)
    return [
        ("unit", float(abs(dimension(Projection.identity(n)) - 1)), 0.0),
        ("dimension", float(abs(dimension(p) - Fraction(p.rank, n))), 0.0),
        ("additivity", float(abs(dimension(p12) - dimension(p1) - dimension(p2))), 0.0),
        ("mvn_iff_dimension", float(found != (dimension(p) == dimension(q))), 0.0),
        ("parallelogram", float(abs((join.rank - p.rank) - (q.rank - meet.rank))), 0.0),
        ("meet_rank", float(abs(meet.rank - expected_meet)), 0.0),
    ]


def quasitrace_suite(n: int, rng, ctx: TrialContext) -> Triples:
    x = ctx.fixture if ctx.fixture is not None else random_matrix(n, rng)
    h = hermitian_part(x)
    seq = approximation_sequence(h)
    q = seq[-1]
    monotone = max(max(0.0, abs(d - q) - 2.0 ** -(m + 1)) for m, d in enumerate(seq))
    k = int(rng.integers(0, n + 1))
    p = random_projection(n, k, rng)
    offset = float(rng.uniform(0, 1))
    out: Triples = [
        ("oracle_gap", abs(Q(x) - np.trace(x) / n), 1e-9),
        ("hermitian_oracle_gap", abs(q - np.trace(h).real / n), 1e-9),
        ("projection_dimension", abs(Q(p.matrix) - float(dimension(p))), 1e-9),
        ("monotone_approximation", monotone, 1e-12),
        ("offset_independence", abs(quasi_trace_hermitian(h, offset=offset) - q), 1e-9),
    ]
    worst: dict[str, float] = {}
    for prop, res in check_axioms([x, random_matrix(n, rng)]):
        worst[prop] = max(worst.get(prop, 0.0), res)
    out += [(f"axiom_{prop}", res, 1e-9) for prop, res in worst.items()]
    return out


def lemma4_suite(n: int, rng, ctx: TrialContext) -> Triples:
    if ctx.fixture is not None:
        x = ctx.fixture
    else:
        cond = ctx.cond("lemma4") ** float(rng.uniform())
        g, _ = random_invertible(n, cond, rng)
        x = g * 10.0 ** float(rng.uniform(-1, 1))
    cert = con.lemma4_unitary(x)
    res = cert.residuals
    m = np.block([[np.eye(n), cert.y], [cert.z, np.eye(n)]])
    eig = np.linalg.eigvals(m)
    preservation = float(np.max(np.minimum(np.abs(eig), np.abs(eig - 2.0))))
    w1 = con.lemma4_unitary([[1.0]]).w[0, 0].real
    w2 = con.lemma4_unitary([[2.0]]).w[0, 0].real
    scalar = abs(w1 - (3 - math.sqrt(5)) / 2) + abs(w2 - (3 - 2 * math.sqrt(2)))
    out: Triples = [
        ("unitarity", res["unitarity"], 1e-9),
        ("conjugation", res["conjugation"], 1e-8),
        ("w_spectrum", res["w_spectrum"], 0.0),
        ("w_equation", res["w_equation"], 1e-9),
        ("eigenvalue_preservation", preservation, 1e-8),
        ("scalar_w", scalar, 1e-12),
    ]
    out += [(f"identity[{k}]", res[k], 1e-9) for k in ("aa+bb", "cc+dd", "ac+bd", "a*a+c*c", "b*b+d*d", "a*b+c*d")]
    return out


def _lemma5_triples(rep: con.Lemma5Report, prefix: str = "") -> Triples:
    scale = max(1.0, rep.x_norm)
    return [
        (prefix + "q_value", rep.max_residual("q_value"), 1e-8),
        (prefix + "grading", rep.max_residual("grading"), 1e-9),
        (prefix + "q_a_zero", max(abs(s.q_a) for s in rep.steps), 1e-8),
        (prefix + "q_chain", rep.max_residual("q_chain"), 1e-8),
        (prefix + "a_form", rep.max_residual("a_form") / scale, 1e-8),
        (prefix + "unitarity", rep.max_residual("unitarity"), 1e-9),
        (prefix + "phi_form", rep.phi_form, 1e-8),
        (prefix + "convergence", rep.steps[-1].distance / scale, 1e-6),
    ]


def lemma5_suite(n: int, rng, ctx: TrialContext) -> Triples:
    e = _idempotent_input(ctx, n, n // 2, IDEMPOTENT_COND, rng)
    lam = LAMBDAS[int(rng.integers(len(LAMBDAS)))]
    return _lemma5_triples(con.lemma5_pipeline(e, lam))


THEOREM6_TOLS = {
    "oracle_gap": 1e-7,
    "direct_gap": 1e-7,
    "compression": 1e-8,
    "doubling": 1e-9,
    "half_dimension": 1e-8,
    "parallelogram": 0.0,
    "support_equivalence": 0.0,
    "r_dimension": 0.0,
    "orthogonality": 1e-10,
    "cover": 1e-10,
    "in_corner": 1e-10,
    "support_embedding": 1e-10,
    "doubled_dimension": 0.0,
}


def theorem6_triples(rep: con.Theorem6Report) -> Triples:
    out: Triples = [(k, v, THEOREM6_TOLS[k]) for k, v in rep.residuals.items()]
    if rep.lemma5 is not None:
        out += [t for t in _lemma5_triples(rep.lemma5, "lemma5.") if not t[0].endswith("convergence")]
    return out


def theorem6_suite(n: int, rng, ctx: TrialContext) -> Triples:
    k = int(rng.integers(0, n + 1))
    e = _idempotent_input(ctx, n, k, IDEMPOTENT_COND, rng)
    lam = LAMBDAS[int(rng.integers(len(LAMBDAS)))]
    return theorem6_triples(con.theorem6_verify(e, lam))


def corollaries_suite(n: int, rng, ctx: TrialContext) -> Triples:
    k = int(rng.integers(0, n + 1))
    e = _idempotent_input(ctx, n, k, IDEMPOTENT_COND, rng)
    s, _ = random_invertible(n, ctx.cond("corollaries"), rng)
    sim = con.similarity_invariance_check(e, s)
    r1 = int(rng.integers(0, n + 1))
    r2 = int(rng.integers(0, n - r1 + 1))
    e1, e2 = random_annihilating_family(n, (r1, r2), IDEMPOTENT_COND, rng)
    add = con.orthogonal_additivity_check(e1, e2)
    return [
        ("similarity", sim["similarity"], 1e-7),
        ("reduction", sim["reduction"], 1e-10),
        ("dimension_chain", sim["dimension_chain"], 1e-7),
        ("additivity", add["additivity"], 1e-7),
        ("idempotent_sum", add["idempotent_sum"], 1e-10),
        ("proof_sum", add["proof_sum"], 1e-8),
        ("corner", add["corner"], 1e-8),
        ("dimension_route", add["dimension_route"], 1e-7),
    ]


def star_suite(n: int, rng, ctx: TrialContext) -> Triples:
    if ctx.fixture is not None:
        family = [Idempotent.from_matrix(ctx.fixture)]
    else:
        m = int(rng.integers(1, min(4, n) + 1))
        cuts = np.sort(rng.integers(0, n + 1, size=m))
        ranks = np.diff(np.concatenate([[0], cuts]))
        family = random_annihilating_family(n, ranks, IDEMPOTENT_COND, rng)
    alphas = rng.uniform(-3, 3, size=len(family))
    return [("star", con.star_combination_check(family, alphas)["star"], 1e-7)]


SUITE_FUNCS: dict[str, Callable[[int, np.random.Generator, TrialContext], Triples]] = {
    "polar": polar_suite,
    "remark2": remark2_suite,
    "dimension": dimension_suite,
    "quasitrace": quasitrace_suite,
    "lemma4": lemma4_suite,
    "lemma5": lemma5_suite,
    "theorem6": theorem6_suite,
    "corollaries": corollaries_suite,
    "star": star_suite,
}


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def run_trial(suite: str, n: int, trial: int, seed: int, ctx: TrialContext, tol: float | None) -> list[dict]:
    rng = np.random.default_rng(seed)
    try:
        triples = SUITE_FUNCS[suite](n, rng, ctx)
    except Exception as exc:  # recorded, never aborts the run
        return [make_record(suite, n, trial, seed, "error", None, 0.0, f"{type(exc).__name__}: {exc}")]
    return [make_record(suite, n, trial, seed, prop, res, tol if tol is not None else t) for prop, res, t in triples]


def run_suite(config: SuiteConfig) -> SuiteReport:
    """Run every configured suite and collect one record per checked property."""
    config.validate()
    start = time.perf_counter()
    fixture = read_matrix(config.input_path) if config.input_path else None
    ctx = TrialContext(config.cond_bound, fixture)
    n_list = (fixture.shape[0],) if fixture is not None else config.n_list
    trials = 1 if (fixture is not None or config.replay_seed is not None) else config.trials
    report = SuiteReport(config.echo())
    for suite in config.suites():
        for n in n_list:
            if suite == "lemma5" and n % 2:
                continue
            for i in range(trials):
                seed = config.replay_seed if config.replay_seed is not None else child_seed(config.seed, n, i)
                report.records.extend(run_trial(suite, n, i, seed, ctx, config.tol))
    return report.finalize((time.perf_counter() - start) * 1e3)
