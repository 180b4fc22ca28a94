# -*- coding: utf-8 -*-
#! python3

"""
    Dense linear algebra shared by the worlds, the estimators and the metrics.

    Matrices are plain 2-D float64 numpy arrays; helpers here validate them and
    solve against them through LU factorizations, never explicit inverses.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging

# 3rd party library
import numpy as np
from scipy import linalg as sla
from scipy.linalg import lapack

# submodules
from pil_lab.utils.errors import (
    NotPositiveSemidefiniteError,
    ShapeError,
    SingularMatrixError,
)

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

RCOND_MIN = 1e-12

# #############################################################################
# ########## Functions #############
# ##################################


def as_mat(value, name: str = "matrix") -> np.ndarray:
    """Return a 2-D float64 copy of the input, checking every entry is finite.

    Scalars become 1x1 matrices and 1-D arrays become column vectors.

    :param value: anything numpy can turn into an array
    :param str name: name used in error messages
    """
    mat = np.array(value, dtype=np.float64)
    if mat.ndim == 0:
        mat = mat.reshape(1, 1)
    elif mat.ndim == 1:
        mat = mat.reshape(-1, 1)
    elif mat.ndim != 2:
        raise ShapeError("{} must be 2-D, got shape {}".format(name, mat.shape))
    if not np.all(np.isfinite(mat)):
        raise ValueError("{} has non finite entries".format(name))
    return mat


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A X = B through an LU factorization of A.

    :param np.ndarray a: square matrix
    :param np.ndarray b: right-hand side, same number of rows as A (vector or matrix)

    :raises SingularMatrixError: if the reciprocal condition estimate of A is below 1e-12
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("solve_linear expects a square matrix, got {}".format(a.shape))
    if b.shape[0] != a.shape[0]:
        raise ShapeError(
            "solve_linear: rows mismatch between A {} and B {}".format(a.shape, b.shape)
        )

    rcond = reciprocal_condition(a)
    if rcond < RCOND_MIN:
        raise SingularMatrixError(
            "matrix is singular to working precision (rcond={:.3e})".format(rcond),
            rcond=rcond,
        )
    lu_piv = sla.lu_factor(a, check_finite=True)
    return sla.lu_solve(lu_piv, b)


def solve_right(x: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Return X A^-1, i.e. the solution Z of Z A = X.

    :param np.ndarray x: left factor, as many columns as A has rows
    :param np.ndarray a: square matrix
    """
    return solve_linear(np.asarray(a).T, np.asarray(x).T).T


def reciprocal_condition(a: np.ndarray) -> float:
    """Estimate the 1-norm reciprocal condition number of a square matrix.

    Uses LAPACK getrf + gecon, so the estimate costs one factorization.

    :param np.ndarray a: square matrix
    """
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return 0.0
    anorm = np.linalg.norm(a, 1)
    if anorm == 0.0:
        return 0.0
    lu, _, info = lapack.dgetrf(a)
    if info > 0:
        # exact zero pivot
        return 0.0
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    return float(rcond)


def _power_iteration(gram: np.ndarray, vec: np.ndarray, tol: float, max_iter: int) -> float:
    """Dominant eigenvalue of the PSD ``gram`` reachable from ``vec``."""
    lam = 0.0
    for _ in range(max_iter):
        nxt = gram @ vec
        lam = float(vec @ nxt)
        residual = np.linalg.norm(nxt - lam * vec)
        if residual <= tol * abs(lam):
            return lam
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            # start vector in the null space
            return 0.0
        vec = nxt / norm
    logger.warning(
        "Power iteration stopped after {} steps without reaching tol={}".format(
            max_iter, tol
        )
    )
    return lam


def spectral_norm(m: np.ndarray, tol: float = 1e-10, max_iter: int = 100000) -> float:
    """Largest singular value by power iteration on M^T M.

    One iteration is started from every coordinate axis and the largest
    eigenvalue wins: a single start orthogonal to the top singular vector would
    settle on a smaller one, while some axis always carries at least 1/sqrt(n)
    of it. Each run stops when the eigen-residual of M^T M is below ``tol``
    times the current eigenvalue estimate.

    :param np.ndarray m: any finite matrix
    :param float tol: relative residual tolerance
    :param int max_iter: iteration budget per start
    """
    m = as_mat(m, "spectral_norm input")
    if not np.any(m):
        return 0.0
    gram = m.T @ m
    if gram.shape == (1, 1):
        return float(np.sqrt(gram[0, 0]))

    lam = max(_power_iteration(gram, start, tol, max_iter) for start in np.eye(gram.shape[0]))
    return float(np.sqrt(max(lam, 0.0)))


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    return float(np.max(np.abs(np.linalg.eigvals(as_mat(m)))))


def check_psd(m: np.ndarray, name: str = "matrix", atol: float = 1e-10) -> np.ndarray:
    """Return the matrix if it is symmetric positive semidefinite, raise otherwise.

    :param np.ndarray m: square matrix
    :param str name: name used in error messages
    :param float atol: tolerance on symmetry and on negative eigenvalues
    """
    m = as_mat(m, name)
    if m.shape[0] != m.shape[1]:
        raise ShapeError("{} must be square, got {}".format(name, m.shape))
    scale = max(1.0, float(np.max(np.abs(m))))
    if not np.allclose(m, m.T, atol=atol * scale):
        raise NotPositiveSemidefiniteError("{} is not symmetric".format(name))
    lam_min = float(sla.eigvalsh(m)[0])
    if lam_min < -atol * scale:
        raise NotPositiveSemidefiniteError(
            "{} is not positive semidefinite (min eigenvalue {:.3e})".format(name, lam_min)
        )
    return m
