"""Discrete-time lifting, fast sample/hold error systems, multirate filters.

With fast period ``h/N``, a continuous signal is approximated by its
piecewise-constant fast samples and the sampled-data error system becomes
the finite-dimensional lifted plant ``E_N`` assembled here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, UnstableSystemError
from .lti import (SampledSignal, StateSpaceModel, c2d_zoh, delay_chain, is_stable,
                  series, simulate)
from .plant import GeneralizedPlant

__all__ = [
    "DesignSpec",
    "LiftedSystem",
    "lift_system",
    "hold_matrix",
    "sampler_matrix",
    "build_error_system",
    "build_error_system_singlerate",
    "build_error_system_multirate",
    "recover_multirate_filter",
    "fast_simulate",
    "upsample",
    "downsample",
    "lift_signal",
    "unlift_signal",
]


@dataclass(frozen=True)
class DesignSpec:
    """Parameters of a sampled-data design.

    ``h`` sampling period, ``m`` delay in slow steps, ``N`` fast-sampling
    ratio, ``L`` upsampling ratio (must divide ``N``), ``eps_reg`` weight of
    the fictitious measurement noise. The remaining fields are the numerical
    tolerances used by the Riccati, norm and bisection routines.
    """

    h: float = 1.0
    m: int = 4
    N: int = 12
    L: int = 1
    eps_reg: float = 1e-4
    gamma_rel_tol: float = 1e-3
    riccati_residual: float = 1e-8
    unit_circle_band: float = 1e-7
    max_bisection: int = 60

    def __post_init__(self):
        if not self.h > 0:
            raise ValidationError(f"h must be positive, got {self.h}", field="h")
        for name in ("m", "N", "L", "max_bisection"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val:
                raise ValidationError(f"{name} must be an integer, got {val!r}", field=name)
            object.__setattr__(self, name, int(val))
        if self.m < 0:
            raise ValidationError(f"m must be >= 0, got {self.m}", field="m")
        if self.N < 1:
            raise ValidationError(f"N must be >= 1, got {self.N}", field="N")
        if self.L < 1:
            raise ValidationError(f"L must be >= 1, got {self.L}", field="L")
        if self.N % self.L:
            raise ValidationError(f"L={self.L} must divide N={self.N}", field="L")
        for name in ("eps_reg", "gamma_rel_tol", "riccati_residual", "unit_circle_band"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive", field=name)

    @property
    def fast_period(self) -> float:
        return self.h / self.N

    @property
    def hold_length(self) -> int:
        """Fast samples per hold interval, ``N / L``."""
        return self.N // self.L

    def replace(self, **changes) -> "DesignSpec":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return DesignSpec(**kw)


@dataclass(frozen=True, eq=False)
class LiftedSystem:
    """An ``N``-fold lifted discrete system.

    ``model`` advances once per slow step, so its ``period`` is the slow
    period; ``fast_period`` is the period of the system that was lifted.
    """

    model: StateSpaceModel
    blocking: int

    @property
    def slow_period(self) -> float:
        return self.model.period

    @property
    def fast_period(self) -> float:
        return self.model.period / self.blocking


def lift_system(sys: StateSpaceModel, N: int) -> LiftedSystem:
    """Lift a discrete system by ``N``.

    The lifted realization is ``(A^N, [A^{N-1}B ... B], [C; CA; ...; CA^{N-1}], T)``
    with ``T`` the block lower-triangular Toeplitz matrix of Markov parameters
    ``D, CB, CAB, ...``.
    """
    if not sys.is_discrete:
        raise ValidationError("lift_system needs a discrete-time model", field="domain")
    if int(N) != N or N < 1:
        raise ValidationError(f"blocking factor must be an integer >= 1, got {N}", field="N")
    N = int(N)
    if N == 1:
        return LiftedSystem(sys, 1)
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n, m, p = sys.n_states, sys.n_inputs, sys.n_outputs
    powers = [np.eye(n)]
    for _ in range(N):
        powers.append(powers[-1] @ A)
    AN = powers[N]
    BN = np.hstack([powers[N - 1 - k] @ B for k in range(N)]) if n else np.zeros((0, N * m))
    CN = np.vstack([C @ powers[k] for k in range(N)]) if n else np.zeros((N * p, 0))
    markov = [D] + [C @ powers[k] @ B for k in range(N - 1)]
    DN = np.zeros((N * p, N * m))
    for i in range(N):
        for j in range(i + 1):
            DN[i * p:(i + 1) * p, j * m:(j + 1) * m] = markov[i - j]
    return LiftedSystem(StateSpaceModel(AN, BN, CN, DN, period=sys.period * N), N)


def hold_matrix(N: int, L: int = 1) -> np.ndarray:
    """``blkdiag(1_p, ..., 1_p)`` with ``L`` blocks of ``p = N/L`` ones."""
    if N % L:
        raise ValidationError(f"L={L} must divide N={N}", field="L")
    return np.kron(np.eye(L), np.ones((N // L, 1)))


def sampler_matrix(N: int) -> np.ndarray:
    """``[1, 0, ..., 0]``: keeps the first fast sample of each slow period."""
    S = np.zeros((1, N))
    S[0, 0] = 1.0
    return S


def _check_models(G, F):
    for name, sys in (("G", G), ("F", F)):
        if sys.is_discrete:
            raise ValidationError(f"{name} must be continuous-time", field=name)
        if not is_stable(sys):
            raise UnstableSystemError(f"{name} must be stable")
    if np.any(F.D != 0):
        raise ValidationError("F must be strictly proper (D = 0) to be sampled", field="F")
    if F.n_outputs != G.n_inputs:
        raise ValidationError(
            f"F has {F.n_outputs} outputs but G has {G.n_inputs} inputs", field="F")


def build_error_system(G: StateSpaceModel, F: StateSpaceModel, spec: DesignSpec) -> GeneralizedPlant:
    """Fast sample/hold plant for the (possibly multirate) discretization problem.

    ``e = T1 w - H u`` and ``y = S F_N w + eps * v`` where ``T1`` is the
    delayed lifted target ``z^{-m} G_N F_N``, ``H`` the (multirate) hold
    pattern and ``v`` a fictitious noise appended to ``w`` so that ``D21``
    has full row rank. State is ``[x_F; x_G; delay register]``.
    """
    _check_models(G, F)
    N, L, h = spec.N, spec.L, spec.h
    hf = spec.fast_period
    q, p = G.n_inputs, G.n_outputs
    FN = lift_system(c2d_zoh(F, hf), N).model
    GN = lift_system(c2d_zoh(G, hf), N).model
    target = series(delay_chain(spec.m, N * p, h), series(GN, FN))
    n = target.n_states
    r = F.n_inputs * N
    S = np.kron(sampler_matrix(N), np.eye(q))
    C2 = np.hstack([S @ FN.C, np.zeros((q, n - FN.n_states))])
    D21w = S @ FN.D
    Hold = np.kron(hold_matrix(N, L), np.eye(p))
    return GeneralizedPlant(
        A=target.A,
        B1=np.hstack([target.B, np.zeros((n, q))]),
        B2=np.zeros((n, L * p)),
        C1=target.C,
        C2=C2,
        D11=np.hstack([target.D, np.zeros((N * p, q))]),
        D12=-Hold,
        D21=np.hstack([D21w, spec.eps_reg * np.eye(q)]),
        D22=np.zeros((q, L * p)),
        period=h,
        n_noise=q,
        info={"N": N, "L": L, "m": spec.m, "h": h, "n_G": G.n_states, "n_F": F.n_states,
              "w_width": r},
    )


def build_error_system_singlerate(G, F, spec: DesignSpec) -> GeneralizedPlant:
    """Single-rate plant: hold ``H_N = [1, ..., 1]^T`` regardless of ``spec.L``."""
    return build_error_system(G, F, spec.replace(L=1))


def build_error_system_multirate(G, F, spec: DesignSpec) -> GeneralizedPlant:
    """Multirate plant: hold ``blkdiag(1_p, ..., 1_p)``, filter with ``L`` outputs."""
    return build_error_system(G, F, spec)


def recover_multirate_filter(K_tilde: StateSpaceModel, L: int) -> StateSpaceModel:
    """Fast-rate filter ``K(z) = [1, z^-1, ..., z^-(L-1)] K_tilde(z^L)``.

    ``K_tilde`` runs at the slow period with ``L`` stacked output blocks
    (the polyphase components). The result runs at ``period / L``: the
    ``z^L`` substitution expands every state into an ``L``-stage chain and
    the delay row is a Horner-form output delay line.
    """
    if not K_tilde.is_discrete:
        raise ValidationError("multirate filter must be discrete-time", field="domain")
    if int(L) != L or L < 1:
        raise ValidationError(f"L must be an integer >= 1, got {L}", field="L")
    L = int(L)
    if K_tilde.n_outputs % L:
        raise ValidationError(
            f"filter has {K_tilde.n_outputs} outputs, expected a multiple of L={L}", field="L")
    if L == 1:
        return K_tilde
    n, q = K_tilde.n_states, K_tilde.n_inputs
    p = K_tilde.n_outputs // L
    Cb = [K_tilde.C[i * p:(i + 1) * p] for i in range(L)]
    Db = [K_tilde.D[i * p:(i + 1) * p] for i in range(L)]
    ne, ns = n * L, p * (L - 1)
    A = np.zeros((ne + ns, ne + ns))
    B = np.zeros((ne + ns, q))
    C = np.zeros((p, ne + ns))
    last = slice(ne - n, ne)
    A[:n, last] = K_tilde.A
    for k in range(1, L):
        A[k * n:(k + 1) * n, (k - 1) * n:k * n] = np.eye(n)
    B[:n] = K_tilde.B
    # s_k' = out_k + s_{k+1}, k = 1..L-1, y = out_0 + s_1
    for k in range(1, L):
        rows = slice(ne + (k - 1) * p, ne + k * p)
        A[rows, last] = Cb[k]
        B[rows] = Db[k]
        if k < L - 1:
            A[rows, ne + k * p:ne + (k + 1) * p] = np.eye(p)
    C[:, last] = Cb[0]
    C[:, ne:ne + p] = np.eye(p)
    return StateSpaceModel(A, B, C, Db[0], period=K_tilde.period / L)


def fast_simulate(sys_chain, signal: SampledSignal) -> SampledSignal:
    """Run ``signal`` through a model or a list of models applied in order."""
    chain = [sys_chain] if isinstance(sys_chain, StateSpaceModel) else list(sys_chain)
    if not chain:
        return signal
    for sys in chain:
        if not sys.is_discrete or not np.isclose(sys.period, signal.period, rtol=1e-12, atol=0):
            raise ValidationError(
                f"period mismatch: model period {sys.period}, signal period {signal.period}",
                field="period")
    total = chain[0]
    for sys in chain[1:]:
        total = series(sys, total)
    y = simulate(total, signal.values)
    return SampledSignal(y, signal.period, signal.start_index)


def upsample(x, L: int) -> np.ndarray:
    """Zero-insertion upsampler on the first axis."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((x.shape[0] * L,) + x.shape[1:])
    out[::L] = x
    return out


def downsample(x, L: int) -> np.ndarray:
    return np.asarray(x)[::L]


def lift_signal(x, N: int) -> np.ndarray:
    """Reblock ``(N*K, d)`` samples into ``(K, N*d)`` vectors."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] % N:
        raise ValidationError(f"signal length {x.shape[0]} is not a multiple of {N}")
    return x.reshape(x.shape[0] // N, N * x.shape[1])


def unlift_signal(x, N: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x.reshape(x.shape[0] * N, x.shape[1] // N)
