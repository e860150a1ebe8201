"""Discrete-time H-infinity synthesis for generalized plants.

The discrete problem is carried to continuous time by the norm-preserving
bilinear map ``z = (1 + s) / (1 - s)``, solved there with the two-Riccati
central controller (general ``D11``, after normalizing ``D12`` and ``D21``),
and the controller is mapped back. Every filter that leaves
:func:`gamma_iterate` has its closed-loop norm recomputed independently in
discrete time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (ConditioningError, RiccatiError, SynthesisError, ValidationError)
from .lti import StateSpaceModel, static_gain
from .norms import hinf_norm_discrete
from .plant import GeneralizedPlant, lower_lft
from .riccati import hamiltonian_ric

__all__ = [
    "SynthesisResult",
    "d2c_bilinear",
    "c2d_bilinear",
    "plant_d2c",
    "static_gamma_bound",
    "synthesize_suboptimal",
    "gamma_iterate",
    "error_norm",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    """Outcome of a gamma-iteration.

    ``gamma_achieved`` is the smallest level at which synthesis succeeded,
    ``gamma_certified`` the independently recomputed closed-loop norm of the
    plant the synthesis saw (including the regularizing noise channel) and
    ``error_norm`` the closed-loop norm with that channel removed.
    ``lower_bound`` is the largest level found infeasible (or the static
    bound if none was).
    """

    filter: StateSpaceModel
    gamma_achieved: float
    gamma_certified: float
    error_norm: float
    bisection_steps: int
    lower_bound: float


def d2c_bilinear(sys: StateSpaceModel) -> StateSpaceModel:
    """Continuous model ``Gc(s) = Gd((1 + s) / (1 - s))``; same H-infinity norm."""
    n = sys.n_states
    if n == 0:
        return sys.replace(period=None)
    M = sys.A + np.eye(n)
    Minv_B = np.linalg.solve(M, sys.B)
    C_Minv = np.linalg.solve(M.T, sys.C.T).T
    Ac = np.linalg.solve(M, sys.A - np.eye(n))
    return StateSpaceModel(Ac, np.sqrt(2) * Minv_B, np.sqrt(2) * C_Minv,
                           sys.D - sys.C @ Minv_B, period=None)


def c2d_bilinear(sys: StateSpaceModel, period: float) -> StateSpaceModel:
    """Inverse of :func:`d2c_bilinear`: ``Gd(z) = Gc((z - 1) / (z + 1))``."""
    n = sys.n_states
    if n == 0:
        return sys.replace(period=period)
    M = np.eye(n) - sys.A
    Minv_B = np.linalg.solve(M, sys.B)
    C_Minv = np.linalg.solve(M.T, sys.C.T).T
    Ad = np.linalg.solve(M.T, (np.eye(n) + sys.A).T).T
    return StateSpaceModel(Ad, np.sqrt(2) * Minv_B, np.sqrt(2) * C_Minv,
                           sys.D + sys.C @ Minv_B, period=period)


def plant_d2c(plant: GeneralizedPlant) -> GeneralizedPlant:
    """Apply :func:`d2c_bilinear` to the whole plant and re-partition."""
    n, m1, m2, p1, p2 = plant.dims
    c = d2c_bilinear(plant.as_model())
    return GeneralizedPlant(
        c.A, c.B[:, :m1], c.B[:, m1:], c.C[:p1], c.C[p1:],
        c.D[:p1, :m1], c.D[:p1, m1:], c.D[p1:, :m1], c.D[p1:, m1:],
        period=None, n_noise=plant.n_noise, info=dict(plant.info))


@dataclass(frozen=True, eq=False)
class _Normalized:
    """Plant with ``D12 = [0; I]``, ``D21 = [0, I]`` and the maps back."""

    plant: GeneralizedPlant
    Tu: np.ndarray  # u = Tu u~
    Ty: np.ndarray  # y~ = Ty y


def _normalize(plant: GeneralizedPlant, rank_tol=1e-10) -> _Normalized:
    n, m1, m2, p1, p2 = plant.dims
    if m2 > p1 or p2 > m1:
        raise ValidationError("need dim(e) >= dim(u) and dim(w) >= dim(y)")
    U, s12, Vt = la.svd(plant.D12)
    if m2 and s12.min() <= rank_tol * max(1.0, s12.max()):
        raise ValidationError("D12 does not have full column rank", field="D12")
    U21, s21, V21t = la.svd(plant.D21)
    if p2 and s21.min() <= rank_tol * max(1.0, s21.max()):
        raise ValidationError("D21 does not have full row rank", field="D21")
    Uo = np.hstack([U[:, m2:], U[:, :m2]])          # e~ = Uo' e
    Tu = Vt.T / s12 if m2 else np.zeros((0, 0))
    V = V21t.T
    Vo = np.hstack([V[:, p2:], V[:, :p2]])          # w = Vo w~
    Ty = (U21 / s21).T if p2 else np.zeros((0, 0))
    normalized = GeneralizedPlant(
        plant.A, plant.B1 @ Vo, plant.B2 @ Tu, Uo.T @ plant.C1, Ty @ plant.C2,
        Uo.T @ plant.D11 @ Vo, Uo.T @ plant.D12 @ Tu, Ty @ plant.D21 @ Vo,
        Ty @ plant.D22 @ Tu, period=plant.period)
    return _Normalized(normalized, Tu, Ty)


def _d11_blocks(P: GeneralizedPlant):
    n, m1, m2, p1, p2 = P.dims
    r, c = p1 - m2, m1 - p2
    D = P.D11
    return D[:r, :c], D[:r, c:], D[r:, :c], D[r:, c:]


def _smax(M):
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def static_gamma_bound(plant: GeneralizedPlant) -> float:
    """Lower bound on any achievable level from the feedthrough terms alone.

    For a continuous plant this is ``max(smax([D1111, D1112]), smax([D1111; D1121]))``
    after normalization; a discrete plant is first mapped by :func:`plant_d2c`.
    """
    P = plant if plant.period is None else plant_d2c(plant)
    D1111, D1112, D1121, _ = _d11_blocks(_normalize(P).plant)
    return max(_smax(np.hstack([D1111, D1112])), _smax(np.vstack([D1111, D1121])))


def _central_continuous(P: GeneralizedPlant, gamma: float, band: float, psd_tol=1e-8):
    """Central controller for a normalized continuous plant with ``D22 = 0``.

    Returns ``(Ak, Bk, Ck, Dk)`` or ``None`` when the level is infeasible.
    """
    n, m1, m2, p1, p2 = P.dims
    A, B1, B2, C1, C2 = P.A, P.B1, P.B2, P.C1, P.C2
    D11, D12, D21 = P.D11, P.D12, P.D21
    D1111, D1112, D1121, D1122 = _d11_blocks(P)
    g2 = gamma ** 2
    if gamma <= max(_smax(np.hstack([D1111, D1112])), _smax(np.vstack([D1111, D1121]))):
        return None

    B = np.hstack([B1, B2])
    C = np.vstack([C1, C2])
    D1dot = np.hstack([D11, D12])
    Ddot1 = np.vstack([D11, D21])
    R = D1dot.T @ D1dot - la.block_diag(g2 * np.eye(m1), np.zeros((m2, m2)))
    Rt = Ddot1 @ Ddot1.T - la.block_diag(g2 * np.eye(p1), np.zeros((p2, p2)))
    try:
        Rinv = np.linalg.inv(R)
        Rtinv = np.linalg.inv(Rt)
    except np.linalg.LinAlgError:
        return None

    H = (np.block([[A, np.zeros((n, n))], [-C1.T @ C1, -A.T]])
         - np.vstack([B, -C1.T @ D1dot]) @ Rinv @ np.hstack([D1dot.T @ C1, B.T]))
    J = (np.block([[A.T, np.zeros((n, n))], [-B1 @ B1.T, -A]])
         - np.vstack([C.T, -B1 @ Ddot1.T]) @ Rtinv @ np.hstack([Ddot1 @ B1.T, C]))
    try:
        X = hamiltonian_ric(H, band)
        Y = hamiltonian_ric(J, band)
    except RiccatiError:
        return None
    scale_x = psd_tol * max(1.0, np.linalg.norm(X, 2))
    scale_y = psd_tol * max(1.0, np.linalg.norm(Y, 2))
    if n and (np.linalg.eigvalsh(X).min() < -scale_x or np.linalg.eigvalsh(Y).min() < -scale_y):
        return None
    rho = max(np.abs(np.linalg.eigvals(X @ Y))) if n else 0.0
    if rho >= g2 * (1.0 - 1e-10):
        return None

    F = -Rinv @ (D1dot.T @ C1 + B.T @ X)
    Lm = -(B1 @ Ddot1.T + Y @ C.T) @ Rtinv
    F12, F2 = F[m1 - p2:m1], F[m1:]
    L12, L2 = Lm[:, p1 - m2:p1], Lm[:, p1:]

    r, c = D1111.shape
    inv_rr = np.linalg.inv(g2 * np.eye(r) - D1111 @ D1111.T) if r else np.zeros((0, 0))
    inv_cc = np.linalg.inv(g2 * np.eye(c) - D1111.T @ D1111) if c else np.zeros((0, 0))
    Dh11 = -D1121 @ D1111.T @ inv_rr @ D1112 - D1122
    M12 = np.eye(m2) - D1121 @ inv_cc @ D1121.T
    M21 = np.eye(p2) - D1112.T @ inv_rr @ D1112
    try:
        Dh12 = la.cholesky((M12 + M12.T) / 2, lower=True)
        Dh21 = la.cholesky((M21 + M21.T) / 2, lower=False)
    except la.LinAlgError:
        return None
    try:
        Z = np.linalg.inv(np.eye(n) - (Y @ X) / g2)
    except np.linalg.LinAlgError:
        return None
    Bh2 = Z @ (B2 + L12) @ Dh12
    Ch2 = -Dh21 @ (C2 + F12)
    Bh1 = -Z @ L2 + Bh2 @ np.linalg.solve(Dh12, Dh11)
    Dh21inv_Ch2 = np.linalg.solve(Dh21, Ch2)
    Ch1 = F2 + Dh11 @ Dh21inv_Ch2
    Ah = A + B @ F + Bh1 @ Dh21inv_Ch2
    return Ah, Bh1, Ch1, Dh11


def _absorb_d22(K: StateSpaceModel, D22: np.ndarray) -> StateSpaceModel:
    """Controller for a plant with feedthrough ``D22`` from one designed for ``D22 = 0``."""
    if not np.any(D22):
        return K
    # u = K0 (y - D22 u)
    M = np.linalg.inv(np.eye(K.n_outputs) + K.D @ D22)
    Dk = M @ K.D
    Ck = M @ K.C
    Ak = K.A - K.B @ D22 @ Ck
    Bk = K.B @ (np.eye(K.n_inputs) - D22 @ Dk)
    return StateSpaceModel(Ak, Bk, Ck, Dk, period=K.period)


def synthesize_suboptimal(plant: GeneralizedPlant, gamma: float, *, band: float = 1e-7,
                          certify: bool = True, rel_tol: float = 1e-3):
    """Central filter achieving closed-loop norm below ``gamma``, or ``None``.

    Parameters
    ----------
    plant : GeneralizedPlant
        Discrete plant with ``D12`` of full column rank and ``D21`` of full
        row rank.
    gamma : float
        Target level.
    band : float
        Imaginary-axis tolerance for the Hamiltonian eigenvalue tests.
    certify : bool
        Recompute the closed-loop norm in discrete time and raise
        :class:`ConditioningError` if it exceeds ``gamma * (1 + 10 rel_tol)``.
    """
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}", field="gamma")
    if plant.period is None:
        raise ValidationError("synthesize_suboptimal expects a discrete plant", field="period")
    Pc = plant_d2c(plant)
    norm = _normalize(Pc)
    Pn = norm.plant
    D22 = Pc.D22
    Pn0 = Pn.with_matrices(D22=np.zeros_like(Pn.D22))
    ctrl = _central_continuous(Pn0, gamma, band)
    if ctrl is None:
        return None
    Ah, Bh, Ch, Dh = ctrl
    Kc = StateSpaceModel(Ah, Bh @ norm.Ty, norm.Tu @ Ch, norm.Tu @ Dh @ norm.Ty)
    Kc = _absorb_d22(Kc, D22)
    if Kc.n_states and np.min(np.abs(np.linalg.eigvals(Kc.A) - 1.0)) < 1e-10:
        log.debug("controller pole at s=1 cannot be mapped back at gamma=%g", gamma)
        return None
    K = c2d_bilinear(Kc, plant.period)
    if certify:
        achieved = error_norm(plant, K, include_noise=True)
        if achieved > gamma * (1.0 + 10.0 * rel_tol):
            raise ConditioningError(
                f"certification failed: closed-loop norm {achieved:.6g} exceeds gamma {gamma:.6g}")
    return K


def error_norm(plant: GeneralizedPlant, K: StateSpaceModel, include_noise: bool = False,
               rel_tol: float = 1e-6) -> float:
    """Discrete H-infinity norm of the closed loop ``w -> e``.

    By default the regularizing noise channel is removed first, giving the
    true error-system norm for filter ``K``.
    """
    P = plant if include_noise else plant.without_noise()
    return hinf_norm_discrete(lower_lft(P, K), rel_tol=rel_tol)


def _zero_filter(plant):
    n, m1, m2, p1, p2 = plant.dims
    return static_gain(np.zeros((m2, p2)), period=plant.period)


def gamma_iterate(plant: GeneralizedPlant, spec=None, *, gamma_rel_tol=None, band=None,
                  max_steps=None) -> SynthesisResult:
    """Bisect on gamma for the smallest feasible level and its central filter.

    The bracket starts at ``[static_gamma_bound, 2 * norm(T1)]``; ``u = 0``
    achieves ``norm(T1)`` so the upper end is always feasible. The last
    feasible filter is certified by an independent discrete norm
    computation; if certification fails, the next-best feasible candidate is
    tried.
    """
    tol = gamma_rel_tol if gamma_rel_tol is not None else (spec.gamma_rel_tol if spec else 1e-3)
    band = band if band is not None else (spec.unit_circle_band if spec else 1e-7)
    max_steps = max_steps if max_steps is not None else (spec.max_bisection if spec else 60)

    t1 = hinf_norm_discrete(plant.target(), rel_tol=1e-9)
    if t1 == 0.0:
        K0 = _zero_filter(plant)
        return SynthesisResult(K0, 0.0, 0.0, 0.0, 0, 0.0)
    lo = static_gamma_bound(plant)
    hi = 2.0 * t1
    feasible = []
    K = synthesize_suboptimal(plant, hi, band=band, certify=False)
    if K is None:
        hi *= 2.0
        K = synthesize_suboptimal(plant, hi, band=band, certify=False)
        if K is None:
            raise SynthesisError(f"no feasible gamma found up to {hi:.6g}")
    feasible.append((hi, K))
    steps = 0
    while hi - lo > tol * hi:
        if steps >= max_steps:
            raise SynthesisError(f"gamma bisection did not converge in {max_steps} steps")
        mid = 0.5 * (lo + hi)
        K = synthesize_suboptimal(plant, mid, band=band, certify=False)
        steps += 1
        if K is None:
            lo = mid
        else:
            hi = mid
            feasible.append((mid, K))
        log.debug("gamma step %d: [%g, %g]", steps, lo, hi)

    for gamma, K in reversed(feasible):
        try:
            certified = error_norm(plant, K, include_noise=True)
        except Exception as exc:  # unstable closed loop from a badly conditioned filter
            log.debug("candidate at gamma=%g rejected: %s", gamma, exc)
            continue
        if certified <= gamma * (1.0 + 10.0 * tol):
            true_norm = error_norm(plant, K, include_noise=False)
            return SynthesisResult(K, gamma, certified, true_norm, steps, lo)
        log.debug("candidate at gamma=%g failed certification (%g)", gamma, certified)
    raise ConditioningError("no synthesized filter passed norm certification")
