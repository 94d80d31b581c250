"""
Executable versions of the idempotent constructions.

* ``lemma4_unitary``: a unitary ``U`` in ``M_2(A)`` with
  ``U* [[2, x], [0, 0]] U = [[1, y], [z, 1]]`` for invertible ``x``.
* ``doubling_isomorphism``: the *-isomorphism ``A -> M_2(pAp)`` for a
  half-rank projection ``p``.
* ``lemma5_pipeline``: ``Q(lambda e) = lambda/2`` for idempotents whose left
  support has dimension one half, through invertible approximation and the
  grading by ``1 - 2p``.
* ``theorem6_verify``: ``Q(lambda e) = lambda D(L(e))`` for every idempotent,
  by compression to a corner and, for large supports, doubling to ``M_2n``.
* Similarity invariance, orthogonal additivity and the signed-combination
  condition for annihilating idempotent families.

Corners are handled in explicit orthonormal range coordinates, so each
sub-algebra is again a full matrix algebra of smaller size. Nothing in this
module evaluates a matrix trace.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonpositiveInput,
    NotAnnihilating,
    NotInvertible,
    RankMismatch,
    SpectrumEscape,
)
from .matrix import DEFAULT_RANK_CUTOFF, adjoint, as_matrix, fro, inverse, opnorm, svd
from .quasitrace import Q
from .star import (
    Idempotent,
    PartialIsometry,
    Projection,
    approximate_invertible,
    dimension,
    lattice_join,
    lattice_meet,
    left_support,
    mvn_equivalent,
    supports,
)

INVERTIBLE_CUTOFF = 1e-8
PIPELINE_DEPTH = 20
CONVERGENCE_TOL = 1e-6
ANNIHILATION_TOL = 1e-8


# ---------------------------------------------------------------------------
# f(t) = (1 - t)^2 / t on (0, 1) and its inverse
# ---------------------------------------------------------------------------

def f_forward(t):
    t = np.asarray(t, dtype=float)
    return (1.0 - t) ** 2 / t


def _check_positive(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise NonpositiveInput(f"f_inverse needs s > 0, got {s}")
    return s


def f_inverse(s):
    """The t in (0, 1) with (1 - t)^2 / t = s, as 2 / ((2 + s) + sqrt(s (s + 4)))."""
    s = _check_positive(s)
    t = 2.0 / ((2.0 + s) + np.sqrt(s * (s + 4.0)))
    return float(t) if t.ndim == 0 else t


def _one_minus_f_inverse(s) -> np.ndarray:
    # 1 - t without cancellation when t is close to 1 (small s)
    s = _check_positive(s)
    r = np.sqrt(s * (s + 4.0))
    return (s + r) / ((2.0 + s) + r)


# ---------------------------------------------------------------------------
# Unitary conjugation of [[2, x], [0, 0]]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lemma4Certificate:
    U: np.ndarray
    w: np.ndarray
    y: np.ndarray
    z: np.ndarray
    residuals: dict[str, float]

    @property
    def blocks(self):
        k = self.w.shape[0]
        U = self.U
        return U[:k, :k], U[:k, k:], U[k:, :k], U[k:, k:]


def _blocks(a, b, c, d) -> np.ndarray:
    return np.block([[a, b], [c, d]])


def lemma4_unitary(x) -> Lemma4Certificate:
    """Build ``U = [[a, b], [c, d]]`` from ``w = f^{-1}(xx*)``.

    With ``x = P diag(s) R*`` the functional calculus of ``xx*`` runs on the
    spectral data ``(P, s^2)``, and ``x^{-1} = R diag(1/s) P*``:

        a = (1+w)^{-1/2} w^{1/2}          b = (1+w)^{-1/2}
        c = x^{-1} (1+w)^{-1/2} w^{-1/2} (1-w)
        d = -x^{-1} (1+w)^{-1/2} (1-w)

    The certificate records the six block identities behind ``UU* = U*U = 1``
    and the conjugation identity with ``y = w^{1/2}``, ``z = w^{-1/2}``.
    """
    x = as_matrix(x)
    k = x.shape[0]
    P, s, R = svd(x)
    if s[-1] <= max(DEFAULT_RANK_CUTOFF, INVERTIBLE_CUTOFF) * s[0] or s[-1] <= INVERTIBLE_CUTOFF:
        raise NotInvertible(f"sigma_min={s[-1]:.3e}, sigma_1={s[0]:.3e}")
    s2 = s * s
    t = f_inverse(s2)
    one_minus_t = _one_minus_f_inverse(s2)
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise SpectrumEscape(f"spectrum of w {t} leaves (0, 1)")

    def calc(vals, left=P):
        return (left * vals) @ adjoint(P)

    inv_sqrt_1pt = 1.0 / np.sqrt(1.0 + t)
    a = calc(inv_sqrt_1pt * np.sqrt(t))
    b = calc(inv_sqrt_1pt)
    c = calc(inv_sqrt_1pt * one_minus_t / np.sqrt(t) / s, left=R)
    d = calc(-inv_sqrt_1pt * one_minus_t / s, left=R)
    w = calc(t)
    y = calc(np.sqrt(t))
    z = calc(1.0 / np.sqrt(t))
    U = _blocks(a, b, c, d)

    I = np.eye(k)
    I2 = np.eye(2 * k)
    zero = np.zeros((k, k))
    T = _blocks(2 * I, x, zero, zero)
    target = _blocks(I, y, z, I)
    xnorm = float(s[0])
    conj = fro(adjoint(U) @ T @ U - target)
    res = {
        "unitarity": max(fro(adjoint(U) @ U - I2), fro(U @ adjoint(U) - I2)),
        "conjugation": conj / (2.0 + xnorm),
        "conjugation_raw": conj,
        "intertwining": fro(T @ U - U @ target) / (2.0 + xnorm),
        "aa+bb": fro(a @ adjoint(a) + b @ adjoint(b) - I),
        "cc+dd": fro(c @ adjoint(c) + d @ adjoint(d) - I),
        "ac+bd": fro(a @ adjoint(c) + b @ adjoint(d)),
        "a*a+c*c": fro(adjoint(a) @ a + adjoint(c) @ c - I),
        "b*b+d*d": fro(adjoint(b) @ b + adjoint(d) @ d - I),
        "a*b+c*d": fro(adjoint(a) @ b + adjoint(c) @ d),
        "w_equation": fro(calc(f_forward(t)) - x @ adjoint(x)) / max(1.0, xnorm**2),
        "w_spectrum": float(max(0.0, -t.min(), t.max() - 1.0)),
    }
    return Lemma4Certificate(U, w, y, z, res)


# ---------------------------------------------------------------------------
# A ≅ M_2(pAp) for p ~ 1 - p
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoublingIso:
    """Block coordinates for ``A = M_n`` relative to a half-rank projection ``p``.

    ``frame = [B_p, B_{1-p}]`` with ``B_{1-p} = v* B_p``; the blocks of
    ``forward(x)`` are the range coordinates of ``pxp``, ``pxv*``, ``vxp``,
    ``vxv*``.
    """

    p: Projection
    v: PartialIsometry
    frame: np.ndarray

    @property
    def half(self) -> int:
        return self.p.rank

    def forward(self, x) -> np.ndarray:
        W = self.frame
        return adjoint(W) @ as_matrix(x) @ W

    def inverse(self, X) -> np.ndarray:
        W = self.frame
        return W @ as_matrix(X) @ adjoint(W)

    def split(self, X):
        k = self.half
        return X[:k, :k], X[:k, k:], X[k:, :k], X[k:, k:]


def doubling_isomorphism(p: Projection) -> DoublingIso:
    """Phi: A -> M_2(pAp) with Phi(p) = [[1, 0], [0, 0]]."""
    n = p.dim
    if 2 * p.rank != n:
        raise RankMismatch(f"need rank n/2, got rank {p.rank} in dimension {n}")
    q = p.complement()
    v = mvn_equivalent(q, p)  # v v* = p, v* v = 1 - p
    pi = PartialIsometry(v, p, q)
    frame = np.hstack([p.basis, adjoint(v) @ p.basis])
    return DoublingIso(p, pi, frame)


# ---------------------------------------------------------------------------
# Half-dimension idempotents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lemma5Step:
    k: int
    eps: float
    distance: float
    unitarity: float
    conjugation: float
    a_form: float
    grading: float
    q_e: complex
    q_a: complex
    q_value: float
    q_chain: float


@dataclass(frozen=True)
class Lemma5Report:
    lam: complex
    dim: int
    phi_form: float
    x_norm: float
    steps: list[Lemma5Step]
    converged: bool

    @property
    def q_limit(self) -> complex:
        """Q(lambda e_k) at the last step; by norm continuity this is Q(lambda e)."""
        return self.steps[-1].q_e

    def max_residual(self, name: str) -> float:
        return max(getattr(s, name) for s in self.steps)


def lemma5_pipeline(e, lam: complex, depth: int = PIPELINE_DEPTH) -> Lemma5Report:
    """Run the half-dimension argument on an idempotent ``e`` with ``D(L(e)) = 1/2``.

    In block form relative to ``p = L(e)``, ``Phi(e) = [[1, x], [0, 0]]``. For
    ``k = 1..depth`` the block ``x`` is replaced by an invertible ``x_k`` with
    ``||x - x_k|| = max(1, ||x||) 2^-k``; ``lemma4_unitary(2 x_k)`` gives
    ``E_k = U_k [[1/2, y_k], [z_k, 1/2]] U_k*``. Each step records the grading
    identity ``(1-2p) a_k (1-2p) = -a_k`` for ``a_k = u_k* e_k u_k - 1/2`` and
    the values ``Q(lambda a_k)`` and ``Q(lambda e_k)``.
    """
    e = e.matrix if isinstance(e, Idempotent) else as_matrix(e)
    n = e.shape[0]
    lam = complex(lam)
    p = left_support(e)
    phi = doubling_isomorphism(p)
    k_half = phi.half
    e11, x, e21, e22 = phi.split(phi.forward(e))
    I = np.eye(k_half)
    zero = np.zeros((k_half, k_half))
    phi_form = fro(e11 - I) + fro(e21) + fro(e22)
    x_norm = opnorm(x) if k_half else 0.0
    scale = max(1.0, x_norm)

    In = np.eye(n)
    grading_unitary = In - 2.0 * p.matrix
    steps = []
    for k in range(1, depth + 1):
        eps = scale * 2.0 ** -k
        x_k, _ = approximate_invertible(x, eps)
        E_k = _blocks(I, x_k, zero, zero)
        cert = lemma4_unitary(2.0 * x_k)
        y_k, z_k = cert.y / 2.0, cert.z / 2.0
        e_k = phi.inverse(E_k)
        u_k = phi.inverse(cert.U)
        a_k = adjoint(u_k) @ e_k @ u_k - 0.5 * In
        a_form = fro(phi.forward(a_k) - _blocks(zero, y_k, z_k, zero))
        a_norm = opnorm(a_k)
        grading = fro(grading_unitary @ a_k @ grading_unitary + a_k) / (1.0 + a_norm)
        q_e = Q(lam * e_k)
        q_a = Q(lam * a_k)
        steps.append(
            Lemma5Step(
                k=k,
                eps=eps,
                distance=opnorm(e_k - e),
                unitarity=cert.residuals["unitarity"],
                conjugation=cert.residuals["conjugation"],
                a_form=a_form,
                grading=grading,
                q_e=q_e,
                q_a=q_a,
                q_value=abs(q_e - lam / 2.0),
                q_chain=abs(q_e - (lam / 2.0 + q_a)),
            )
        )
    # eps_k is scaled by max(1, ||x||), so convergence is judged on the same scale
    converged = bool(steps) and steps[-1].distance <= CONVERGENCE_TOL * scale
    return Lemma5Report(lam, n, phi_form, x_norm, steps, converged)


# ---------------------------------------------------------------------------
# General idempotents
# ---------------------------------------------------------------------------

@dataclass
class Theorem6Report:
    lam: complex
    dim: int
    rank: int
    case: str
    q_pipeline: complex
    q_direct: complex
    target: complex
    residuals: dict[str, float] = field(default_factory=dict)
    lemma5: Lemma5Report | None = None

    @property
    def oracle_gap(self) -> float:
        return self.residuals["oracle_gap"]


def _particular_case(e: np.ndarray, lam: complex, depth: int) -> Theorem6Report:
    """Case D(L(e)) <= 1/2: compress to (p + q0) A (p + q0) and apply the half case."""
    n = e.shape[0]
    p, q = supports(e)
    rank = p.rank
    target = lam * float(dimension(p))
    q_direct = Q(lam * e)
    res: dict[str, float] = {}
    if rank == 0:
        res["oracle_gap"] = abs(0.0 - target)
        res["direct_gap"] = abs(q_direct - target)
        return Theorem6Report(lam, n, 0, "trivial", 0j, q_direct, target, res)

    join = lattice_join(p, q)
    meet = lattice_meet(p, q)
    res["parallelogram"] = float(abs((join.rank - p.rank) - (q.rank - meet.rank)))
    res["support_equivalence"] = float(abs(p.rank - q.rank))

    r_rank = 2 * rank - join.rank
    r = Projection(join.complement().basis[:, :r_rank])
    jp = left_support(join.matrix - p.matrix) if join.rank > rank else Projection.zero(n)
    q0 = Projection(np.hstack([jp.basis, r.basis]))
    corner = Projection(np.hstack([p.basis, q0.basis]))
    res["r_dimension"] = float(abs(dimension(r) + dimension(jp) - dimension(p)))
    res["orthogonality"] = fro(p.matrix @ q0.matrix)
    res["cover"] = fro(corner.matrix @ join.matrix - join.matrix)
    res["in_corner"] = fro(corner.matrix @ e @ corner.matrix - e) / (1.0 + fro(e))

    C = corner.basis
    e0 = adjoint(C) @ e @ C
    l5 = lemma5_pipeline(e0, lam, depth)
    d_corner = float(dimension(corner))
    q_pipeline = d_corner * l5.q_limit
    q0_direct = Q(lam * e0)
    res["compression"] = abs(q0_direct - q_direct / d_corner)
    res["half_dimension"] = abs(l5.q_limit - lam / 2.0)
    res["oracle_gap"] = abs(q_pipeline - target)
    res["direct_gap"] = abs(q_direct - target)
    return Theorem6Report(lam, n, rank, "particular", q_pipeline, q_direct, target, res, l5)


def theorem6_verify(e, lam: complex, depth: int = PIPELINE_DEPTH) -> Theorem6Report:
    """Check ``Q(lambda e) = lambda D(L(e))`` through the two-case reduction.

    ``target`` is ``lambda * rank(L(e)) / n``; ``q_pipeline`` is the value
    delivered by the reduction, ``q_direct`` the quasi-trace of ``lambda e``.
    """
    e = e.matrix if isinstance(e, Idempotent) else as_matrix(e)
    lam = complex(lam)
    n = e.shape[0]
    p = left_support(e)
    if 2 * p.rank <= n:
        return _particular_case(e, lam, depth)

    # general case: E = diag(e, 0) in M_2n has D2(L(E)) = D(p)/2 <= 1/2
    zero = np.zeros((n, n))
    E = _blocks(e, zero, zero, zero)
    P = _blocks(p.matrix, zero, zero, zero)
    sub = _particular_case(E, lam, depth)
    PE = left_support(E)
    q_direct = Q(lam * e)
    target = lam * float(dimension(p))
    res = {
        "support_embedding": fro(PE.matrix - P),
        "doubled_dimension": abs(float(dimension(PE)) - float(dimension(p)) / 2.0),
        "doubling": abs(q_direct - 2.0 * sub.q_direct),
    }
    for key, val in sub.residuals.items():
        if key not in ("oracle_gap", "direct_gap"):
            res[key] = val
    q_pipeline = 2.0 * sub.q_pipeline
    res["oracle_gap"] = abs(q_pipeline - target)
    res["direct_gap"] = abs(q_direct - target)
    return Theorem6Report(lam, n, p.rank, "general", q_pipeline, q_direct, target, res, sub.lemma5)


# ---------------------------------------------------------------------------
# Similarity, additivity and signed combinations
# ---------------------------------------------------------------------------

def idempotent_to_projection(e) -> tuple[np.ndarray, Projection]:
    """``(t, p)`` with ``p = L(e)``, ``t = 1 - e(1 - p)`` and ``e = t p t^{-1}``.

    ``t^{-1} = 1 + e(1 - p)`` because ``e(1 - p)`` squares to zero.
    """
    e = e.matrix if isinstance(e, Idempotent) else as_matrix(e)
    n = e.shape[0]
    p = left_support(e)
    I = np.eye(n)
    nil = e @ (I - p.matrix)
    t = I - nil
    if fro(t @ (I + nil) - I) > 1e-8 * (1.0 + fro(e)) ** 2:
        raise NotInvertible("1 - e(1 - p) failed to invert as 1 + e(1 - p)")
    return t, p


def _t_inverse(t: np.ndarray) -> np.ndarray:
    # t = 1 - N with N^2 = 0
    I = np.eye(t.shape[0])
    return 2.0 * I - t


def similarity_invariance_check(e, s) -> dict[str, float]:
    """Residuals for ``Q(s e s^{-1}) = Q(e)`` and the support-dimension chain."""
    e = e.matrix if isinstance(e, Idempotent) else as_matrix(e)
    s = as_matrix(s)
    s_inv = inverse(s, cutoff=INVERTIBLE_CUTOFF)
    f = s @ e @ s_inv
    t, p = idempotent_to_projection(e)
    q = left_support(f)
    qe, qf = Q(e), Q(f)
    d = float(dimension(p))
    return {
        "similarity": abs(qf - qe),
        "reduction": fro(t @ p.matrix @ _t_inverse(t) - e) / (1.0 + fro(e)),
        "dimension_chain": abs(qe - d) + abs(float(dimension(q)) - d),
        "oracle_gap": max(abs(qe - d), abs(qf - d)),
    }


def _check_annihilating(es: list[np.ndarray]) -> None:
    for i, a in enumerate(es):
        for j, b in enumerate(es):
            if i != j and fro(a @ b) > ANNIHILATION_TOL * (1.0 + fro(a) * fro(b)):
                raise NotAnnihilating(f"e_{i} e_{j} != 0")


def orthogonal_additivity_check(e1, e2) -> dict[str, float]:
    """Residuals for ``Q(e1 + e2) = Q(e1) + Q(e2)`` when ``e1 e2 = e2 e1 = 0``.

    Also replays the argument: with ``s = t^{-1}`` from the sum's reduction,
    ``f_k = s e_k s^{-1}`` sum to ``p = L(e1 + e2)`` and live in ``pAp``.
    """
    es = [x.matrix if isinstance(x, Idempotent) else as_matrix(x) for x in (e1, e2)]
    _check_annihilating(es)
    a, b = es
    tot = a + b
    t, p = idempotent_to_projection(tot)
    s, s_inv = _t_inverse(t), t
    f1, f2 = s @ a @ s_inv, s @ b @ s_inv
    P = p.matrix
    return {
        "idempotent_sum": fro(tot @ tot - tot) / (1.0 + fro(tot) ** 2),
        "additivity": abs(Q(tot) - Q(a) - Q(b)),
        "proof_sum": fro(f1 + f2 - P) / (1.0 + fro(tot)),
        "corner": (fro(P @ f1 @ P - f1) + fro(P @ f2 @ P - f2)) / (1.0 + fro(tot)),
        "dimension_route": abs(float(dimension(p)) - Q(f1) - Q(f2)),
    }


def star_combination_check(es, alphas) -> dict[str, float]:
    """Residual of ``Q(sum alpha_k e_k) = sum alpha_k Q(e_k)`` for annihilating ``e_k``."""
    es = [x.matrix if isinstance(x, Idempotent) else as_matrix(x) for x in es]
    alphas = [float(a) for a in alphas]
    if len(es) != len(alphas):
        raise ValueError("need one coefficient per idempotent")
    _check_annihilating(es)
    combo = sum(a * e for a, e in zip(alphas, es))
    lhs = Q(combo)
    rhs = sum(a * Q(e) for a, e in zip(alphas, es))
    return {"star": abs(lhs - rhs)}
