"""Dense symmetric linear algebra.

Everything here works on plain ``float64`` NumPy arrays.  The symmetric
eigen-solver is a cyclic Jacobi method using a round-robin (tournament)
pair ordering, so that every step rotates ``p // 2`` disjoint pairs at once
with vectorised row/column updates.  It is slower than LAPACK but fully
deterministic and accurate to working precision, which is what the
reproducibility guarantees of the simulation harness rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    NoConvergence,
    NotPositiveDefinite,
    RankDeficient,
    StillSingular,
    ValidationError,
)

SYMMETRY_RTOL = 1e-12
JACOBI_TOL = 1e-12
MAX_SWEEPS = 100
RANK_RTOL = 1e-10


def _as_square(a, name="a"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def check_symmetric(a, name="a", rtol=SYMMETRY_RTOL):
    a = _as_square(a, name)
    scale = np.abs(a).max(initial=0.0)
    if np.abs(a - a.T).max(initial=0.0) > rtol * max(scale, 1.0):
        raise ValidationError(f"{name} is not symmetric")
    return a


def cholesky(a):
    """Lower Cholesky factor ``L`` with ``L @ L.T == a``.

    Raises :class:`NotPositiveDefinite` as soon as a pivot is not strictly
    positive.  Only the lower triangle of ``a`` is read.
    """
    a = check_symmetric(a)
    p = a.shape[0]
    L = np.zeros_like(a)
    for j in range(p):
        row = L[j, :j]
        pivot = a[j, j] - row @ row
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"pivot {j} is {pivot:.3e} <= 0")
        ljj = np.sqrt(pivot)
        L[j, j] = ljj
        if j + 1 < p:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ row) / ljj
    return L


def is_spd(a):
    try:
        cholesky(a)
    except NotPositiveDefinite:
        return False
    return True


def _round_robin(p):
    """Pair schedule covering every (i, j), i < j, once per sweep."""
    m = p + (p % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        left, right = [], []
        for k in range(m // 2):
            i, j = players[k], players[m - 1 - k]
            if i >= p or j >= p:
                continue
            if i > j:
                i, j = j, i
            left.append(i)
            right.append(j)
        rounds.append((np.array(left, dtype=np.intp), np.array(right, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def fix_signs(vectors):
    """Flip each column so its largest-magnitude entry is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(a, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with values sorted in descending order
    (stable with respect to the diagonal position at convergence) and
    orthonormal eigenvectors as columns, sign-normalised by
    :func:`fix_signs`.

    Iteration stops once the off-diagonal Frobenius norm is at most
    ``tol * ||a||_F``.
    """
    a = check_symmetric(a)
    p = a.shape[0]
    A = 0.5 * (a + a.T)
    V = np.eye(p)
    scale = np.linalg.norm(A)
    if p > 1 and scale > 0.0:
        schedule = _round_robin(p)
        offdiag = ~np.eye(p, dtype=bool)
        target = tol * scale
        for _ in range(max_sweeps + 1):
            off = np.linalg.norm(A[offdiag])
            if off <= target:
                break
            for i, j in schedule:
                aij = A[i, j]
                active = aij != 0.0
                if not active.any():
                    continue
                i, j, aij = i[active], j[active], aij[active]
                with np.errstate(over="ignore"):
                    theta = (A[j, j] - A[i, i]) / (2.0 * aij)
                big = np.abs(theta) > 1e150
                t = np.where(
                    big,
                    0.5 / np.where(big, theta, 1.0),
                    np.where(theta >= 0.0, 1.0, -1.0)
                    / (np.abs(theta) + np.sqrt(np.where(big, 0.0, theta) ** 2 + 1.0)),
                )
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                Ai, Aj = A[i, :], A[j, :]
                A[i, :] = c[:, None] * Ai - s[:, None] * Aj
                A[j, :] = s[:, None] * Ai + c[:, None] * Aj
                Ai, Aj = A[:, i], A[:, j]
                A[:, i] = Ai * c - Aj * s
                A[:, j] = Ai * s + Aj * c
                Vi, Vj = V[:, i], V[:, j]
                V[:, i] = Vi * c - Vj * s
                V[:, j] = Vi * s + Vj * c
        else:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], fix_signs(V[:, order])


@dataclass(frozen=True)
class GevBasis:
    """All ``p`` eigenpairs of ``M v = lambda N v``.

    ``vectors`` holds the directions as columns, N-orthonormal, paired with
    ``values`` in descending order.
    """

    values: np.ndarray
    vectors: np.ndarray
    normalization: str = "N-orthonormal"

    @property
    def dim(self):
        return self.vectors.shape[0]

    def euclidean(self):
        """Display copy with unit-length columns (spans and scores unchanged)."""
        norms = np.linalg.norm(self.vectors, axis=0)
        norms[norms == 0] = 1.0
        return GevBasis(self.values, self.vectors / norms, "euclidean")


def gev_solve(m, n):
    """Solve the symmetric-definite generalized eigenproblem ``GEV(m, n)``.

    ``n`` is factored as ``L L^T``; the standard problem on
    ``L^-1 m L^-T`` is solved with :func:`sym_eig` and eigenvectors are
    mapped back with ``v = L^-T u``.
    """
    m = check_symmetric(m, "m", rtol=1e-10)
    L = cholesky(n)
    if m.shape != L.shape:
        raise ValidationError(f"m {m.shape} and n {L.shape} differ in shape")
    tmp = solve_triangular(L, m, lower=True)
    c = solve_triangular(L, tmp.T, lower=True)
    c = 0.5 * (c + c.T)
    values, u = sym_eig(c)
    vectors = solve_triangular(L.T, u, lower=False)
    return GevBasis(values, fix_signs(vectors))


def spd_inverse(a):
    L = cholesky(a)
    linv = solve_triangular(L, np.eye(L.shape[0]), lower=True)
    inv = linv.T @ linv
    return 0.5 * (inv + inv.T)


def spd_logdet(a):
    return 2.0 * np.sum(np.log(np.diag(cholesky(a))))


def spd_sqrt_and_invsqrt(a):
    """Symmetric square root and inverse square root of an SPD matrix."""
    cholesky(a)
    values, q = sym_eig(a)
    if values[-1] <= 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {values[-1]:.3e} <= 0")
    root = np.sqrt(values)
    sqrt = (q * root) @ q.T
    invsqrt = (q / root) @ q.T
    return 0.5 * (sqrt + sqrt.T), 0.5 * (invsqrt + invsqrt.T)


def regularize(a, gamma):
    """Tikhonov shift ``a + gamma * I``; raises :class:`StillSingular` if not SPD."""
    if gamma < 0:
        raise ValidationError(f"gamma must be non-negative, got {gamma}")
    a = check_symmetric(a)
    out = a + gamma * np.eye(a.shape[0])
    if not is_spd(out):
        raise StillSingular(f"matrix is not SPD after adding {gamma:g} * I")
    return out


def ensure_spd(a, gamma, force=False):
    """Return ``a`` if it factors, else ``a + gamma I``.  ``force`` always shifts."""
    if force:
        return regularize(a, gamma)
    if is_spd(a):
        return np.asarray(a, dtype=float)
    return regularize(a, gamma)


def _check_full_rank(b, rtol=RANK_RTOL):
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if b.ndim != 2 or b.shape[1] == 0 or b.shape[1] > b.shape[0]:
        raise RankDeficient(f"basis of shape {b.shape} cannot have full column rank")
    gram = b.T @ b
    vals = np.linalg.eigvalsh(gram)
    if not vals[-1] > 0.0 or vals[0] < rtol * vals[-1]:
        raise RankDeficient("Gram matrix of basis is numerically singular")
    return b, gram


def projection_matrix(b):
    """Orthogonal projector ``b (b^T b)^-1 b^T`` onto the column span of ``b``."""
    b, gram = _check_full_rank(b)
    p = b @ spd_inverse(gram) @ b.T
    return 0.5 * (p + p.T)


def orthonormal_basis(b, rtol=1e-10):
    """Orthonormal basis of ``span(b)`` from a rank-revealing SVD."""
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((b.shape[0], 0))
    return fix_signs(u[:, s > rtol * s[0]])


def write_matrix_csv(path, a):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in a:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def read_matrix_csv(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{path}: not a rectangular numeric matrix")
    return np.array(rows)
