"""H-infinity norms of stable LTI models.

Both routines bisect on the level ``gamma``. A level is tested by looking
for eigenvalues of the associated symplectic pencil (discrete) or
Hamiltonian matrix (continuous) on the unit circle / imaginary axis; such
eigenvalues mark frequencies where ``gamma`` is a singular value of the
response. The frequencies they point to (and the midpoints between them)
are then evaluated directly, so the lower end of the bracket is always an
attained response value and spurious near-boundary eigenvalues cannot
inflate the result.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

from .errors import UnstableSystemError, ValidationError
from .lti import StateSpaceModel, Stability, stability

__all__ = ["sigma_max", "hinf_norm_discrete", "hinf_norm_continuous", "hinf_norm"]


class _Resolvent:
    """Evaluates ``C (sI - A)^{-1} B + D`` many times via a complex Schur form."""

    def __init__(self, sys: StateSpaceModel):
        self.sys = sys
        if sys.n_states:
            T, U = la.schur(sys.A, output="complex")
            self.T = T
            self.Bt = U.conj().T @ sys.B
            self.Ct = sys.C @ U
            self.n = sys.n_states

    def point(self, omega):
        if self.sys.is_discrete:
            return np.exp(1j * omega * self.sys.period)
        return 1j * omega

    def __call__(self, omega) -> np.ndarray:
        if self.sys.n_states == 0:
            return self.sys.D.astype(complex)
        s = self.point(omega)
        X = la.solve_triangular(s * np.eye(self.n) - self.T, self.Bt)
        return self.Ct @ X + self.sys.D

    def many(self, omegas, chunk=64) -> np.ndarray:
        """Responses stacked as ``(len(omegas), p, m)``."""
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        sys = self.sys
        out = np.empty((omegas.size, sys.n_outputs, sys.n_inputs), dtype=complex)
        if sys.n_states == 0:
            out[:] = sys.D
            return out
        eye = np.eye(self.n)
        for k in range(0, omegas.size, chunk):
            s = self.point(omegas[k:k + chunk])
            M = s[:, None, None] * eye - self.T
            X = np.linalg.solve(M, np.broadcast_to(self.Bt, (s.size,) + self.Bt.shape))
            out[k:k + chunk] = self.Ct @ X + sys.D
        return out

    def gains(self, omegas) -> np.ndarray:
        R = self.many(omegas)
        if R.shape[1] == 1 or R.shape[2] == 1:
            return np.sqrt(np.sum(np.abs(R) ** 2, axis=(1, 2)))
        return np.linalg.norm(R, ord=2, axis=(1, 2))


def sigma_max(sys: StateSpaceModel, omegas) -> np.ndarray:
    """Largest singular value of the response at each frequency (rad/s)."""
    return _Resolvent(sys).gains(omegas)


def _require_stable(sys):
    if stability(sys) is not Stability.STABLE:
        raise UnstableSystemError("H-infinity norm is undefined for a system that is not stable")


def _trivial_norm(sys):
    if sys.n_states == 0 or not np.any(sys.B) or not np.any(sys.C):
        return float(np.linalg.norm(sys.D, 2)) if sys.D.size else 0.0
    return None


def _initial_grid(sys, count):
    """Angles in [0, pi] (discrete) or frequencies in rad/s (continuous)."""
    lam = sys.poles()
    if sys.is_discrete:
        theta = np.linspace(0.0, np.pi, count)
        theta = np.concatenate([theta, np.abs(np.angle(lam))])
        return theta / sys.period
    mags = np.abs(lam[np.abs(lam) > 0]) if lam.size else np.ones(1)
    lo = max(min(mags.min(), 1.0) * 1e-2, 1e-8) if mags.size else 1e-3
    hi = max(mags.max() if mags.size else 1.0, 1.0) * 1e2
    return np.concatenate([[0.0], np.geomspace(lo, hi, count), np.abs(lam.imag)])


def _crossing_frequencies_discrete(sys, gamma, band):
    """Frequencies (rad/s) where ``gamma`` may be a singular value."""
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n, m = sys.n_states, sys.n_inputs
    R = gamma ** 2 * np.eye(m) - D.T @ D
    M = np.block([[A, np.zeros((n, n)), B],
                  [-C.T @ C, np.eye(n), -C.T @ D],
                  [-D.T @ C, np.zeros((m, n)), R]])
    E = np.block([[np.eye(n), np.zeros((n, n + m))],
                  [np.zeros((n, n)), A.T, np.zeros((n, m))],
                  [np.zeros((m, n)), B.T, np.zeros((m, m))]])
    alpha, beta = la.eigvals(M, E, homogeneous_eigvals=True)
    finite = np.abs(beta) > 1e-12 * np.abs(alpha)
    z = alpha[finite] / beta[finite]
    on = np.abs(np.abs(z) - 1.0) <= band
    return np.abs(np.angle(z[on])) / sys.period


def _crossing_frequencies_continuous(sys, gamma, band):
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    m, p = sys.n_inputs, sys.n_outputs
    R = gamma ** 2 * np.eye(m) - D.T @ D
    Rinv = np.linalg.inv(R)
    Ah = A + B @ Rinv @ D.T @ C
    H = np.block([[Ah, B @ Rinv @ B.T],
                  [-C.T @ (np.eye(p) + D @ Rinv @ D.T) @ C, -Ah.T]])
    lam = np.linalg.eigvals(H)
    tol = band * max(1.0, np.linalg.norm(H, 1))
    return np.abs(lam[np.abs(lam.real) <= tol].imag)


def _bisect(sys, rel_tol, band, crossings, grid_count=256, max_iter=200):
    ev = _Resolvent(sys)
    d_norm = float(np.linalg.norm(sys.D, 2))
    lb = max(d_norm, float(ev.gains(_initial_grid(sys, grid_count)).max()))
    ub = 2.0 * lb
    if lb == 0.0:
        return 0.0

    def probe(gamma):
        """Largest attained gain found near the crossings of ``gamma``."""
        if gamma <= d_norm:
            return d_norm
        w = np.sort(crossings(sys, gamma, band))
        if w.size == 0:
            return -np.inf
        top = w[-1] if not sys.is_discrete else np.pi / sys.period
        cand = np.concatenate([w, (w[1:] + w[:-1]) / 2, [w[0] / 2, (w[-1] + top) / 2, 0.0]])
        return float(ev.gains(cand).max())

    # make sure the upper end really is above the norm
    for _ in range(60):
        peak = probe(ub)
        if peak < ub:
            break
        lb = max(lb, peak)
        ub = 2.0 * lb
    else:
        raise ValidationError("H-infinity norm bracket did not close")

    for _ in range(max_iter):
        if ub - lb <= rel_tol * ub:
            break
        gamma = 0.5 * (lb + ub)
        peak = probe(gamma)
        if peak >= gamma * (1.0 - 1e-12):
            lb = max(lb, peak)
        else:
            ub = gamma
        lb = min(lb, ub)
    return float(ub)


def hinf_norm_discrete(sys: StateSpaceModel, rel_tol: float = 1e-6, band: float = 1e-6) -> float:
    """H-infinity norm of a stable discrete-time model.

    Parameters
    ----------
    rel_tol : float
        Relative width of the final bracket; the returned value is its upper end.
    band : float
        Pencil eigenvalues with ``abs(abs(z) - 1) <= band`` are treated as
        candidate unit-circle crossings.
    """
    if not sys.is_discrete:
        raise ValidationError("hinf_norm_discrete needs a discrete-time model", field="domain")
    _require_stable(sys)
    trivial = _trivial_norm(sys)
    if trivial is not None:
        return trivial
    return _bisect(sys, rel_tol, band, _crossing_frequencies_discrete)


def hinf_norm_continuous(sys: StateSpaceModel, rel_tol: float = 1e-6, band: float = 1e-8) -> float:
    """H-infinity norm of a stable continuous-time model (Hamiltonian bisection)."""
    if sys.is_discrete:
        raise ValidationError("hinf_norm_continuous needs a continuous-time model", field="domain")
    _require_stable(sys)
    trivial = _trivial_norm(sys)
    if trivial is not None:
        return trivial
    return _bisect(sys, rel_tol, band, _crossing_frequencies_continuous)


def hinf_norm(sys: StateSpaceModel, rel_tol: float = 1e-6) -> float:
    if sys.is_discrete:
        return hinf_norm_discrete(sys, rel_tol)
    return hinf_norm_continuous(sys, rel_tol)
