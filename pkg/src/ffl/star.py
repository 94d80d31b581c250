"""
Projections, supports and polar decomposition in the finite factor M_n(C).

Projections are carried by an orthonormal basis of their range, so ranks are
exact integers and compressions to corners like pAp can be written in range
coordinates. The dimension function is rank/n as an exact ``Fraction``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .errors import (
    BadRank,
    DimensionMismatch,
    EpsilonNonpositive,
    NotAProjection,
    NotEquivalent,
    NotIdempotent,
)
from .matrix import (
    DEFAULT_RANK_CUTOFF,
    SVD,
    SpectralDecomposition,
    complete_basis,
    adjoint,
    as_matrix,
    fro,
    hermitian_part,
    svd,
)

VALIDATION_TOL = 1e-8


class Projection:
    """A self-adjoint idempotent, stored through an orthonormal range basis."""

    def __init__(self, basis: np.ndarray, matrix: np.ndarray | None = None):
        self.basis = np.asarray(basis, dtype=np.complex128)
        if matrix is not None:
            self.__dict__["matrix"] = matrix

    @classmethod
    def from_matrix(cls, m, tol: float = VALIDATION_TOL) -> "Projection":
        m = hermitian_part(as_matrix(m))
        if fro(m @ m - m) > tol:
            raise NotAProjection("p^2 != p within tolerance")
        basis = _support_bases(svd(m))[0]
        if abs(np.trace(m).real - basis.shape[1]) > max(tol, 1e-6):
            raise NotAProjection("trace does not match the numerical rank")
        return cls(basis, m)

    @classmethod
    def zero(cls, n: int) -> "Projection":
        return cls(np.zeros((n, 0), dtype=np.complex128))

    @classmethod
    def identity(cls, n: int) -> "Projection":
        return cls(np.eye(n, dtype=np.complex128))

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.basis @ adjoint(self.basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def complement(self) -> "Projection":
        return Projection(complete_basis(self.basis, self.dim))

    def __repr__(self) -> str:
        return f"Projection(dim={self.dim}, rank={self.rank})"


@dataclass(frozen=True)
class Idempotent:
    matrix: np.ndarray

    @classmethod
    def from_matrix(cls, m, tol: float = VALIDATION_TOL) -> "Idempotent":
        m = as_matrix(m)
        if fro(m @ m - m) > tol * (1.0 + fro(m) ** 2):
            raise NotIdempotent("e^2 != e within tolerance")
        return cls(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PartialIsometry:
    """v with v v* = left and v* v = right."""

    matrix: np.ndarray
    left: Projection
    right: Projection

    def residuals(self) -> dict[str, float]:
        v = self.matrix
        return {
            "left": fro(v @ adjoint(v) - self.left.matrix),
            "right": fro(adjoint(v) @ v - self.right.matrix),
            "partial_isometry": fro(v @ adjoint(v) @ v - v),
        }


def _matrix_of(x) -> np.ndarray:
    if isinstance(x, (Projection, Idempotent, PartialIsometry)):
        return x.matrix
    return as_matrix(x)


def _support_bases(d: SVD, cutoff: float = DEFAULT_RANK_CUTOFF):
    if d.s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(d.s > cutoff * d.s[0]))
    return d.u[:, :r], d.v[:, :r]


def left_support(x, cutoff: float = DEFAULT_RANK_CUTOFF) -> Projection:
    """Range projection L(x): the smallest p with p x = x."""
    return Projection(_support_bases(svd(_matrix_of(x)), cutoff)[0])


def right_support(x, cutoff: float = DEFAULT_RANK_CUTOFF) -> Projection:
    """Co-range projection R(x): the smallest q with x q = x."""
    return Projection(_support_bases(svd(_matrix_of(x)), cutoff)[1])


def supports(x, cutoff: float = DEFAULT_RANK_CUTOFF) -> tuple[Projection, Projection]:
    bl, br = _support_bases(svd(_matrix_of(x)), cutoff)
    return Projection(bl), Projection(br)


def _abs_part(d: SVD) -> np.ndarray:
    # (x*x)^{1/2} from the spectral data (V, s^2) of x*x
    spec = SpectralDecomposition((d.s ** 2)[::-1], d.v[:, ::-1])
    return spec.apply(np.sqrt)


def polar_decompose(x) -> tuple[PartialIsometry, np.ndarray]:
    """Polar decomposition ``x = v (x*x)^{1/2}``.

    ``v`` is the unique partial isometry with initial projection R(x) and
    final projection L(x).
    """
    d = svd(_matrix_of(x))
    bl, br = _support_bases(d)
    v = bl @ adjoint(br)
    return PartialIsometry(v, Projection(bl), Projection(br)), _abs_part(d)


def approximate_invertible(x, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Invertible ``y = u((x*x)^{1/2} + eps)`` with ``||x - y|| = eps``.

    ``u = v + w`` where ``v`` is the polar partial isometry of ``x`` and ``w``
    carries an orthonormal basis of ``1 - R(x)`` onto one of ``1 - L(x)``,
    both taken in index order. Returns ``(y, u)``.
    """
    if not eps > 0:
        raise EpsilonNonpositive(f"eps must be positive, got {eps}")
    x = _matrix_of(x)
    n = x.shape[0]
    d = svd(x)
    # Columns beyond rank r of U and V are the complement bases, so u = U V*.
    u = d.u @ adjoint(d.v)
    y = u @ (_abs_part(d) + eps * np.eye(n))
    return y, u


@lru_cache(maxsize=None)
def rank_dimension(rank: int, n: int) -> Fraction:
    return Fraction(rank, n)


def dimension(p: Projection) -> Fraction:
    """D(p) = rank(p)/n, the unique dimension function on M_n."""
    return rank_dimension(p.rank, p.dim)


def mvn_equivalent(p: Projection, q: Projection) -> np.ndarray:
    """Witness ``x`` with ``x*x = p`` and ``xx* = q``; NotEquivalent if ranks differ."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions {p.dim} and {q.dim} differ")
    if p.rank != q.rank:
        raise NotEquivalent(f"ranks {p.rank} and {q.rank} differ")
    return q.basis @ adjoint(p.basis)


def lattice_join(p: Projection, q: Projection) -> Projection:
    """p ∨ q, the projection onto range(p) + range(q) = range(p + q)."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions {p.dim} and {q.dim} differ")
    return left_support(p.matrix + q.matrix)


def lattice_meet(p: Projection, q: Projection) -> Projection:
    """p ∧ q computed as 1 - ((1 - p) ∨ (1 - q))."""
    return lattice_join(p.complement(), q.complement()).complement()


# ---------------------------------------------------------------------------
# Seeded test-input generators
# ---------------------------------------------------------------------------

def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Complex Gaussian matrix, optionally of prescribed rank."""
    if rank is None:
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    b = rng.standard_normal((rank, n)) + 1j * rng.standard_normal((rank, n))
    return a @ b / np.sqrt(max(rank, 1))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    return hermitian_part(random_matrix(n, rng))


def random_invertible(n: int, cond: float, rng: np.random.Generator):
    """``(g, g_inv)`` with log-spaced singular values in ``[1/cond, 1]``."""
    if cond < 1:
        raise ValueError("condition bound must be >= 1")
    sigma = np.logspace(0.0, -np.log10(cond), n) if n > 1 else np.ones(1)
    q1, q2 = random_unitary(n, rng), random_unitary(n, rng)
    g = (q1 * sigma) @ adjoint(q2)
    g_inv = (q2 / sigma) @ adjoint(q1)
    return g, g_inv


def diagonal_projection(n: int, indices) -> np.ndarray:
    d = np.zeros(n, dtype=np.complex128)
    d[list(indices)] = 1.0
    return np.diag(d)


def random_projection(n: int, k: int, rng: np.random.Generator) -> Projection:
    if not 0 <= k <= n:
        raise BadRank(f"rank {k} outside [0, {n}]")
    return Projection(random_unitary(n, rng)[:, :k])


def random_idempotent(n: int, k: int, cond: float, rng: np.random.Generator) -> Idempotent:
    """``g P_k g^{-1}`` for the diagonal rank-k projection ``P_k`` and ``cond(g) <= cond``."""
    if not 0 <= k <= n:
        raise BadRank(f"rank {k} outside [0, {n}]")
    if k == 0:
        return Idempotent(np.zeros((n, n), dtype=np.complex128))
    if k == n:
        return Idempotent(np.eye(n, dtype=np.complex128))
    g, g_inv = random_invertible(n, cond, rng)
    return Idempotent(g @ diagonal_projection(n, range(k)) @ g_inv)


def random_annihilating_family(n: int, ranks, cond: float, rng: np.random.Generator) -> list[Idempotent]:
    """Idempotents ``g P_j g^{-1}`` over disjoint diagonal blocks, so ``e_j e_k = 0`` for j != k."""
    ranks = list(ranks)
    if any(r < 0 for r in ranks) or sum(ranks) > n:
        raise BadRank(f"ranks {ranks} do not fit in dimension {n}")
    g, g_inv = random_invertible(n, cond, rng)
    bounds = np.concatenate([[0], np.cumsum(ranks)]).astype(int)
    return [
        Idempotent(g @ diagonal_projection(n, range(lo, hi)) @ g_inv)
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]
