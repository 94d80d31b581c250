"""
Dense complex matrix substrate.

Hermitian eigendecomposition by cyclic complex Jacobi rotations, a one-sided
Jacobi SVD (the same rotations applied implicitly to ``x*x``), spectral
functional calculus, numerical rank, and the plain-text fixture format.

All routines take and return ``numpy`` arrays of dtype ``complex128``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numba
import numpy as np

from .errors import DomainViolation, NoConvergence, NotHermitian, NotInvertible

DEFAULT_RANK_CUTOFF = 1e-10
MAX_SWEEPS = 64
EIGEN_OFFDIAG_TOL = 1e-14
HERMITIAN_TOL = 1e-10


def as_matrix(x) -> np.ndarray:
    """Coerce ``x`` to a finite square complex128 array."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def adjoint(x: np.ndarray) -> np.ndarray:
    return np.conj(x).T


def fro(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def hermitian_part(x: np.ndarray) -> np.ndarray:
    """Re x = (x + x*)/2."""
    return 0.5 * (x + adjoint(x))


def skew_part(x: np.ndarray) -> np.ndarray:
    """Im x = (x - x*)/(2i), itself Hermitian."""
    return (x - adjoint(x)) / 2j


# ---------------------------------------------------------------------------
# Jacobi kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _rotation(app, aqq, apq):
    # Unitary G = [[c, s], [-s*ph, c*ph]] with ph = exp(-i arg apq) diagonalizes
    # the Hermitian 2x2 block [[app, apq], [conj(apq), aqq]] under G* A G.
    mag = abs(apq)
    ph = np.conj(apq) / mag
    theta = (aqq - app) / (2.0 * mag)
    if theta >= 0.0:
        t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    return c, s, ph


@numba.njit(cache=True)
def _rotate_columns(a, v, p, q, c, s, ph):
    n = a.shape[0]
    for i in range(n):
        ap = a[i, p]
        aq = a[i, q]
        a[i, p] = c * ap - s * ph * aq
        a[i, q] = s * ap + c * ph * aq
    for i in range(v.shape[0]):
        vp = v[i, p]
        vq = v[i, q]
        v[i, p] = c * vp - s * ph * vq
        v[i, q] = s * vp + c * ph * vq


@numba.njit(cache=True)
def _jacobi_hermitian(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += abs(a[i, j]) ** 2
    scale = math.sqrt(scale)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += abs(a[i, j]) ** 2
        if math.sqrt(off) <= tol * scale:
            return a, v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                c, s, ph = _rotation(a[p, p].real, a[q, q].real, apq)
                _rotate_columns(a, v, p, q, c, s, ph)
                # row update: A <- G* A
                for k in range(n):
                    ap = a[p, k]
                    aq = a[q, k]
                    a[p, k] = c * ap - s * np.conj(ph) * aq
                    a[q, k] = s * ap + c * np.conj(ph) * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return a, v, -1


@numba.njit(cache=True)
def _jacobi_one_sided(x, tol, floor, max_sweeps):
    n = x.shape[1]
    v = np.eye(n, dtype=np.complex128)
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0j
                for i in range(x.shape[0]):
                    alpha += abs(x[i, p]) ** 2
                    beta += abs(x[i, q]) ** 2
                    gamma += np.conj(x[i, p]) * x[i, q]
                # columns at roundoff level cannot be orthogonalized further
                if min(alpha, beta) <= floor or abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                c, s, ph = _rotation(alpha, beta, gamma)
                _rotate_columns(x, v, p, q, c, s, ph)
        if not rotated:
            return x, v, sweep
    return x, v, -1


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda t: t)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """V f(Λ) V*, with ``f`` evaluated elementwise on the eigenvalues."""
        vals = np.asarray(f(self.eigenvalues), dtype=np.complex128)
        v = self.eigenvectors
        return (v * vals) @ adjoint(v)


def hermitian_eigen(h, tol: float = HERMITIAN_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Raises NotHermitian when ``||h - h*|| > tol * ||h||`` and NoConvergence when
    the sweep budget runs out before the off-diagonal mass drops below
    ``1e-14 * ||h||``.
    """
    h = as_matrix(h)
    scale = fro(h)
    if fro(h - adjoint(h)) > tol * max(scale, np.finfo(float).tiny):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    a = np.ascontiguousarray(hermitian_part(h))
    d, v, sweeps = _jacobi_hermitian(a, EIGEN_OFFDIAG_TOL, MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    vals = np.real(np.diag(d)).copy()
    order = np.argsort(vals, kind="stable")
    return SpectralDecomposition(vals[order], v[:, order])


def apply_spectral_function(h, f: Callable, domain: Callable | None = None) -> np.ndarray:
    """Functional calculus f(h) = V f(Λ) V* for Hermitian ``h``.

    ``domain`` is an optional predicate on the eigenvalue array; when it fails
    for any eigenvalue a DomainViolation is raised. Without it, non-finite
    values of ``f`` are treated as a domain violation.
    """
    spec = hermitian_eigen(h)
    lam = spec.eigenvalues
    if domain is not None and not np.all(domain(lam)):
        raise DomainViolation(f"spectrum {lam} leaves the domain of f")
    with np.errstate(all="ignore"):
        vals = np.asarray(f(lam))
    if not np.all(np.isfinite(vals)):
        raise DomainViolation(f"f is undefined on part of the spectrum {lam}")
    return spec.apply(lambda _: vals)


class SVD(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ adjoint(self.v)


def complete_basis(cols: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the complement of span(cols), index-ordered."""
    k = cols.shape[1]
    if k == n:
        return np.zeros((n, 0), dtype=np.complex128)
    q, _ = np.linalg.qr(np.hstack([cols, np.eye(n, dtype=np.complex128)]))
    return q[:, k:n]


def svd(x, tol: float = 1e-15) -> SVD:
    """Singular value decomposition ``x = U diag(s) V*``.

    Jacobi rotations diagonalize ``x*x`` implicitly by orthogonalizing the
    columns of ``x``; the rotated columns ``xV`` are then normalized into
    ``U``. Columns carrying no signal are replaced by an orthonormal basis of
    the complement. Singular values are descending, ties kept in index order.
    """
    x = as_matrix(x)
    n = x.shape[0]
    floor = (n * np.finfo(float).eps * fro(x)) ** 2
    xv, v, sweeps = _jacobi_one_sided(np.ascontiguousarray(x.copy()), tol, floor, MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
    s = np.linalg.norm(xv, axis=0)
    order = np.argsort(-s, kind="stable")
    s, xv, v = s[order], xv[:, order], v[:, order]
    k = int(np.count_nonzero(s * s > floor)) if s[0] > 0 else 0
    u = np.empty((n, n), dtype=np.complex128)
    u[:, :k] = xv[:, :k] / s[:k]
    u[:, k:] = complete_basis(u[:, :k], n)
    return SVD(u, s, v)


def numerical_rank(x, cutoff: float = DEFAULT_RANK_CUTOFF) -> int:
    """Number of singular values exceeding ``cutoff * sigma_1``."""
    if not 0.0 < cutoff < 1.0:
        raise ValueError("rank cutoff must lie in (0, 1)")
    s = svd(x).s
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > cutoff * s[0]))


def opnorm(x) -> float:
    """Operator (spectral) norm."""
    return float(svd(x).s[0])


def inverse(x, cutoff: float = 1e-8) -> np.ndarray:
    """Inverse via the SVD; NotInvertible if sigma_min <= cutoff * sigma_1."""
    u, s, v = svd(x)
    if s[-1] <= cutoff * s[0] or s[-1] == 0.0:
        raise NotInvertible(f"sigma_min={s[-1]:.3e} relative to sigma_1={s[0]:.3e}")
    return (v / s) @ adjoint(u)


# ---------------------------------------------------------------------------
# Fixture format: first line n, then n lines of n "re+imj" tokens
# ---------------------------------------------------------------------------

def _format_entry(z: complex) -> str:
    im = z.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{z.real!r}{sign}{abs(im)!r}j"


def format_matrix(x) -> str:
    x = as_matrix(x)
    lines = [str(x.shape[0])]
    lines += [" ".join(_format_entry(complex(z)) for z in row) for row in x]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 1:
        raise ValueError("fixture must start with a line holding n")
    n = int(rows[0][0])
    body = rows[1:]
    if len(body) != n or any(len(r) != n for r in body):
        raise ValueError(f"fixture must hold {n} rows of {n} entries")
    return as_matrix([[complex(tok) for tok in r] for r in body])


def read_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def write_matrix(path, x) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(x))
