"""Step-invariant and bilinear (Tustin) discretization, with prewarping."""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .lti import StateSpaceModel, c2d_zoh

__all__ = ["step_invariant", "bilinear", "bilinear_prewarp", "prewarp_constant"]


def step_invariant(G: StateSpaceModel, h: float) -> StateSpaceModel:
    """Step-invariant transformation: sampled step response is preserved."""
    return c2d_zoh(G, h)


def _tustin(G: StateSpaceModel, half_step: float, period: float) -> StateSpaceModel:
    # half_step plays the role of h/2 (plain) or 1/c(omega0) (prewarped)
    n = G.n_states
    if n == 0:
        return G.replace(period=period)
    M = np.eye(n) - half_step * G.A
    lam = np.linalg.eigvals(G.A)
    # I - k A is singular exactly when A has the eigenvalue 1/k
    bad = np.abs(1.0 - half_step * lam) <= 1e-12 * (1.0 + np.abs(half_step * lam))
    if np.any(bad):
        raise ValidationError(
            f"pole at mapping singularity: eigenvalue {lam[bad][0]} of A equals {1.0 / half_step}",
            field="A")
    A_bt = np.linalg.solve(M, np.eye(n) + half_step * G.A)
    B_bt = half_step * np.linalg.solve(M, G.B)
    C_bt = G.C @ (np.eye(n) + A_bt)
    D_bt = G.D + G.C @ B_bt
    return StateSpaceModel(A_bt, B_bt, C_bt, D_bt, period=period)


def bilinear(G: StateSpaceModel, h: float) -> StateSpaceModel:
    """Tustin transformation ``K(z) = G((2/h)(z-1)/(z+1))``."""
    if G.is_discrete:
        raise ValidationError("bilinear expects a continuous-time model", field="domain")
    if not h > 0:
        raise ValidationError(f"sampling period must be positive, got {h}", field="h")
    return _tustin(G, h / 2.0, float(h))


def prewarp_constant(h: float, omega0: float) -> float:
    """``c(omega0) = omega0 / tan(omega0 h / 2)``."""
    return omega0 / math.tan(omega0 * h / 2.0)


def bilinear_prewarp(G: StateSpaceModel, h: float, omega0: float) -> StateSpaceModel:
    """Tustin transformation prewarped so the response is exact at ``omega0``.

    Valid for ``0 < omega0 < pi/h``; ``omega0 = 0`` is plain :func:`bilinear`.
    """
    if G.is_discrete:
        raise ValidationError("bilinear_prewarp expects a continuous-time model", field="domain")
    if not h > 0:
        raise ValidationError(f"sampling period must be positive, got {h}", field="h")
    if omega0 == 0:
        raise ValidationError("omega0 = 0 is the plain bilinear transform; call bilinear()",
                              field="omega0")
    if not 0 < omega0 * h < math.pi:
        raise ValidationError(
            f"prewarp frequency out of range: need 0 < omega0*h < pi, got {omega0 * h}",
            field="omega0")
    return _tustin(G, 1.0 / prewarp_constant(h, omega0), float(h))
