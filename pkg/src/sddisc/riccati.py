"""Stabilizing solutions of discrete and continuous algebraic Riccati equations."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

from .errors import RiccatiError

__all__ = ["dare_solve", "dare_residual", "hamiltonian_ric"]


def dare_residual(A, B, Q, R, S, X) -> np.ndarray:
    """``A'XA - X - (A'XB + S)(R + B'XB)^{-1}(B'XA + S') + Q``."""
    G = R + B.T @ X @ B
    K = np.linalg.solve(G, B.T @ X @ A + S.T)
    return A.T @ X @ A - X - (A.T @ X @ B + S) @ K + Q


def dare_solve(A, B, Q, R, S=None, *, band=1e-7, residual_tol=1e-8, require_positive=True):
    """Stabilizing solution of the discrete algebraic Riccati equation.

    Solves ``X = A'XA - (A'XB + S)(R + B'XB)^{-1}(B'XA + S') + Q`` through the
    stable deflating subspace of the extended symplectic pencil::

        [ A   0   B ]       [ I   0    0 ]
        [-Q   I  -S ]  - z  [ 0   A'   0 ]
        [ S'  0   R ]       [ 0  -B'   0 ]

    Parameters
    ----------
    band : float
        Generalized eigenvalues with ``abs(abs(z) - 1) <= band`` count as lying
        on the unit circle, in which case no stabilizing solution exists.
    residual_tol : float
        Required bound on ``norm(residual) / (1 + norm(X))``.
    require_positive : bool
        Demand ``R + B'XB`` positive definite (the LQ case). Set False for
        indefinite problems.

    Returns
    -------
    X : ndarray
        Symmetric stabilizing solution; ``A - B (R + B'XB)^{-1} (B'XA + S')``
        has all eigenvalues inside the unit circle.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n, m = B.shape
    S = np.zeros((n, m)) if S is None else np.atleast_2d(np.asarray(S, dtype=float))
    if A.shape != (n, n) or Q.shape != (n, n) or R.shape != (m, m) or S.shape != (n, m):
        raise ValueError("dare_solve: inconsistent matrix dimensions")
    Q = (Q + Q.T) / 2
    R = (R + R.T) / 2

    M = np.block([[A, np.zeros((n, n)), B],
                  [-Q, np.eye(n), -S],
                  [S.T, np.zeros((m, n)), R]])
    E = np.block([[np.eye(n), np.zeros((n, n + m))],
                  [np.zeros((n, n)), A.T, np.zeros((n, m))],
                  [np.zeros((m, n)), -B.T, np.zeros((m, m))]])
    _, _, alpha, beta, _, Z = la.ordqz(M, E, sort="iuc", output="complex")
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(np.abs(beta) > 0, alpha / np.where(beta == 0, 1, beta), np.inf)
    mod = np.abs(lam)
    if np.any(np.abs(mod[np.isfinite(mod)] - 1.0) <= band):
        raise RiccatiError("symplectic pencil has eigenvalues on the unit circle")
    if np.count_nonzero(mod < 1.0) != n:
        raise RiccatiError(
            f"expected {n} stable eigenvalues, found {np.count_nonzero(mod < 1.0)}")
    U1 = Z[:n, :n]
    U2 = Z[n:2 * n, :n]
    try:
        X = np.linalg.solve(U1.T, U2.T).T
    except np.linalg.LinAlgError as exc:
        raise RiccatiError("stable deflating subspace is not a graph") from exc
    if np.max(np.abs(X.imag)) > 1e-8 * max(1.0, np.max(np.abs(X.real))):
        raise RiccatiError("Riccati solution is not real")
    X = X.real
    X = (X + X.T) / 2

    G = R + B.T @ X @ B
    if require_positive and np.min(np.linalg.eigvalsh((G + G.T) / 2)) <= 0:
        raise RiccatiError("R + B'XB is not positive definite")
    res = dare_residual(A, B, Q, R, S, X)
    if np.linalg.norm(res, 2) > residual_tol * (1.0 + np.linalg.norm(X, 2)):
        raise RiccatiError(f"Riccati residual too large: {np.linalg.norm(res, 2):.3e}")
    return X


def hamiltonian_ric(H, band=1e-7):
    """``X = Ric(H)`` for a real Hamiltonian matrix ``H`` of size ``2n``.

    ``X`` is defined by the stable invariant subspace ``Im [I; X]``. Raises
    :class:`RiccatiError` when ``H`` has eigenvalues within
    ``band * max(1, rho(H))`` of the imaginary axis, or the subspace is not a
    graph over its first ``n`` coordinates. The spectral radius is used rather
    than a matrix norm because ``H`` can be far from normal near the optimal
    level, where its norm grows like ``1/gamma**2``.
    """
    H = np.asarray(H, dtype=float)
    n = H.shape[0] // 2
    if n == 0:
        return np.zeros((0, 0))
    T, U, sdim = la.schur(H, output="real", sort="lhp")
    lam = np.linalg.eigvals(T)
    tol = band * max(1.0, float(np.abs(lam).max()))
    if np.any(np.abs(lam.real) <= tol):
        raise RiccatiError("Hamiltonian has eigenvalues on the imaginary axis")
    if sdim != n:
        raise RiccatiError(f"expected {n} stable eigenvalues, found {sdim}")
    U1, U2 = U[:n, :n], U[n:, :n]
    if np.linalg.cond(U1) > 1e12:
        raise RiccatiError("stable invariant subspace is not a graph")
    X = np.linalg.solve(U1.T, U2.T).T
    return (X + X.T) / 2
