"""State-space LTI models and the elementary operations on them.

A model is ``(A, B, C, D)`` plus a domain: ``period=None`` means continuous
time, a positive ``period`` means discrete time with that sampling period.
Frequencies are always rad/s; discrete models are evaluated at
``z = exp(j*omega*period)``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as la

from .errors import PoleAtFrequencyError, ValidationError

__all__ = [
    "StateSpaceModel",
    "SampledSignal",
    "Stability",
    "matrix_exponential",
    "c2d_zoh",
    "frequency_response",
    "freqresp",
    "series",
    "subtract",
    "parallel",
    "delay_chain",
    "static_gain",
    "stability",
    "is_stable",
    "simulate",
    "model_to_dict",
    "model_from_dict",
    "load_model",
    "save_model",
    "dumps_model",
]

# |Re(lambda)| or |lambda|-1 inside this band is reported as marginal.
STABILITY_BAND = 1e-9


def _as_matrix(x, name):
    a = np.array(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got ndim={a.ndim}", field=name)
    return a


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Real state-space model ``x' = A x + B u, y = C x + D u``.

    Parameters
    ----------
    A, B, C, D : array_like
        System matrices. ``n = 0`` (a static gain) is allowed; pass
        ``A=np.zeros((0, 0))`` and correctly shaped empty ``B``, ``C``.
    period : float or None
        ``None`` for continuous time, otherwise the sampling period in seconds.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    period: float | None = None

    def __post_init__(self):
        D = _as_matrix(self.D, "D")
        p, m = D.shape
        A = np.array(self.A, dtype=float)
        n = A.shape[0] if A.ndim >= 1 else 0
        A = A.reshape(n, n) if A.size == 0 else _as_matrix(A, "A")
        B = np.array(self.B, dtype=float)
        B = B.reshape(n, m) if B.size == 0 else _as_matrix(B, "B")
        C = np.array(self.C, dtype=float)
        C = C.reshape(p, n) if C.size == 0 else _as_matrix(C, "C")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValidationError(f"A must be square, got {A.shape}", field="A")
        if B.shape != (n, m):
            raise ValidationError(f"B must be {n}x{m}, got {B.shape}", field="B")
        if C.shape != (p, n):
            raise ValidationError(f"C must be {p}x{n}, got {C.shape}", field="C")
        for name, mat in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(mat)):
                raise ValidationError(f"{name} has non-finite entries", field=name)
            mat.setflags(write=False)
        period = self.period
        if period is not None:
            period = float(period)
            if not period > 0:
                raise ValidationError(f"period must be positive, got {period}", field="period")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "period", period)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.D.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.period is not None

    @property
    def domain(self) -> str:
        return "discrete" if self.is_discrete else "continuous"

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A) if self.n_states else np.zeros(0, dtype=complex)

    def replace(self, **changes) -> "StateSpaceModel":
        kw = dict(A=self.A, B=self.B, C=self.C, D=self.D, period=self.period)
        kw.update(changes)
        return StateSpaceModel(**kw)

    def __repr__(self):
        return (f"StateSpaceModel(n={self.n_states}, inputs={self.n_inputs}, "
                f"outputs={self.n_outputs}, domain={self.domain}"
                + (f", period={self.period!r})" if self.is_discrete else ")"))


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniformly sampled vector sequence; ``values`` has shape (length, dim)."""

    values: np.ndarray
    period: float
    start_index: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValidationError("signal values must be (length, dim)", field="values")
        if not self.period > 0:
            raise ValidationError("signal period must be positive", field="period")
        if self.start_index < 0:
            raise ValidationError("start_index must be >= 0", field="start_index")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "period", float(self.period))

    def __len__(self):
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return (self.start_index + np.arange(len(self))) * self.period


class Stability(enum.Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


def stability(sys: StateSpaceModel, band: float = STABILITY_BAND) -> Stability:
    """Tri-state stability verdict with a tolerance band around the boundary."""
    lam = sys.poles()
    if lam.size == 0:
        return Stability.STABLE
    dist = np.abs(lam) - 1.0 if sys.is_discrete else lam.real
    if np.any(dist > band):
        return Stability.UNSTABLE
    if np.any(dist >= -band):
        return Stability.MARGINAL
    return Stability.STABLE


def is_stable(sys: StateSpaceModel) -> bool:
    return stability(sys) is Stability.STABLE


def matrix_exponential(M) -> np.ndarray:
    """``exp(M)`` by scaling and squaring with a diagonal Pade approximant."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"matrix_exponential needs a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix_exponential input has non-finite entries")
    if M.size == 0:
        return np.zeros_like(M)
    return la.expm(M)


def c2d_zoh(sys: StateSpaceModel, h: float) -> StateSpaceModel:
    """Zero-order-hold (step-invariant) discretization with period ``h``.

    ``A_d = e^{Ah}`` and ``B_d = int_0^h e^{At} B dt`` come out of a single
    exponential of the augmented matrix ``[[A, B], [0, 0]] h``, so singular
    ``A`` (integrators) needs no special handling.
    """
    if sys.is_discrete:
        raise ValidationError("c2d_zoh expects a continuous-time model", field="domain")
    h = float(h)
    if not h > 0:
        raise ValidationError(f"sampling period must be positive, got {h}", field="h")
    n, m = sys.n_states, sys.n_inputs
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = sys.A
    aug[:n, n:] = sys.B
    E = matrix_exponential(aug * h)
    return StateSpaceModel(E[:n, :n], E[:n, n:], sys.C, sys.D, period=h)


def _eval_point(sys, omega):
    if sys.is_discrete:
        return np.exp(1j * omega * sys.period)
    return 1j * omega


def frequency_response(sys: StateSpaceModel, omega: float) -> np.ndarray:
    """Complex ``p x m`` response at ``omega`` rad/s."""
    n = sys.n_states
    if n == 0:
        return sys.D.astype(complex)
    s = _eval_point(sys, float(omega))
    lam = sys.poles()
    scale = 1.0 + np.max(np.abs(lam))
    if np.min(np.abs(lam - s)) <= 1e-12 * scale:
        raise PoleAtFrequencyError(f"evaluation point {s} coincides with a pole of the system")
    M = s * np.eye(n) - sys.A
    try:
        X = np.linalg.solve(M, sys.B)
    except np.linalg.LinAlgError as exc:
        raise PoleAtFrequencyError(f"singular resolvent at {s}") from exc
    return sys.C @ X + sys.D


def freqresp(sys: StateSpaceModel, omegas) -> np.ndarray:
    """Stack of responses, shape ``(len(omegas), p, m)``."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    out = np.empty((omegas.size, sys.n_outputs, sys.n_inputs), dtype=complex)
    for k, w in enumerate(omegas):
        out[k] = frequency_response(sys, w)
    return out


def _check_compatible(sys1, sys2):
    if sys1.is_discrete != sys2.is_discrete:
        raise ValidationError("cannot combine continuous and discrete models", field="domain")
    if sys1.is_discrete and not np.isclose(sys1.period, sys2.period, rtol=1e-12, atol=0):
        raise ValidationError(f"period mismatch: {sys1.period} vs {sys2.period}", field="period")


def series(sys2: StateSpaceModel, sys1: StateSpaceModel) -> StateSpaceModel:
    """``sys2 * sys1``: the output of ``sys1`` drives ``sys2``.

    The state vector is ``[x1; x2]``.
    """
    _check_compatible(sys1, sys2)
    if sys1.n_outputs != sys2.n_inputs:
        raise ValidationError(
            f"series dimension mismatch: {sys1.n_outputs} outputs into {sys2.n_inputs} inputs")
    n1, n2 = sys1.n_states, sys2.n_states
    A = np.block([[sys1.A, np.zeros((n1, n2))],
                  [sys2.B @ sys1.C, sys2.A]])
    B = np.vstack([sys1.B, sys2.B @ sys1.D])
    C = np.hstack([sys2.D @ sys1.C, sys2.C])
    D = sys2.D @ sys1.D
    return StateSpaceModel(A, B, C, D, period=sys1.period)


def parallel(sys1: StateSpaceModel, sys2: StateSpaceModel, sign: float = 1.0) -> StateSpaceModel:
    """``sys1 + sign * sys2`` with state ``[x1; x2]``."""
    _check_compatible(sys1, sys2)
    if (sys1.n_inputs, sys1.n_outputs) != (sys2.n_inputs, sys2.n_outputs):
        raise ValidationError("parallel connection needs equal input/output widths")
    A = la.block_diag(sys1.A, sys2.A)
    B = np.vstack([sys1.B, sys2.B])
    C = np.hstack([sys1.C, sign * sys2.C])
    D = sys1.D + sign * sys2.D
    return StateSpaceModel(A, B, C, D, period=sys1.period)


def subtract(sys1: StateSpaceModel, sys2: StateSpaceModel) -> StateSpaceModel:
    """``sys1 - sys2``."""
    return parallel(sys1, sys2, sign=-1.0)


def static_gain(D, period: float | None = None) -> StateSpaceModel:
    D = _as_matrix(D, "D")
    p, m = D.shape
    return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D, period=period)


def delay_chain(m: int, width: int, period: float) -> StateSpaceModel:
    """``z^{-m} I_width`` as a shift register with ``m * width`` states."""
    if m < 0 or width < 1:
        raise ValidationError(f"delay_chain needs m >= 0 and width >= 1, got m={m}, width={width}")
    if m == 0:
        return static_gain(np.eye(width), period=period)
    n = m * width
    A = np.zeros((n, n))
    A[width:, :-width] = np.eye(n - width)
    B = np.zeros((n, width))
    B[:width] = np.eye(width)
    C = np.zeros((width, n))
    C[:, -width:] = np.eye(width)
    return StateSpaceModel(A, B, C, np.zeros((width, width)), period=period)


def simulate(sys: StateSpaceModel, u, x0=None) -> np.ndarray:
    """Forward recursion of a discrete model; ``u`` is (length, inputs)."""
    if not sys.is_discrete:
        raise ValidationError("simulate needs a discrete-time model", field="domain")
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[1] != sys.n_inputs:
        raise ValidationError(f"input width {u.shape[1]} != {sys.n_inputs}")
    x = np.zeros(sys.n_states) if x0 is None else np.array(x0, dtype=float)
    y = np.empty((u.shape[0], sys.n_outputs))
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    for k in range(u.shape[0]):
        y[k] = C @ x + D @ u[k]
        x = A @ x + B @ u[k]
    return y


def model_to_dict(sys: StateSpaceModel) -> dict:
    doc = {"domain": sys.domain}
    if sys.is_discrete:
        doc["period"] = sys.period
    for name in "ABCD":
        mat = getattr(sys, name)
        doc[name] = [list(map(float, row)) for row in mat]
    return doc


def model_from_dict(doc: dict) -> StateSpaceModel:
    """Build a model from the JSON document layout, validating every field."""
    if not isinstance(doc, dict):
        raise ValidationError("model document must be a JSON object")
    domain = doc.get("domain")
    if domain not in ("continuous", "discrete"):
        raise ValidationError(f"domain must be 'continuous' or 'discrete', got {domain!r}", field="domain")
    period = None
    if domain == "discrete":
        if "period" not in doc:
            raise ValidationError("discrete model needs a 'period'", field="period")
        period = doc["period"]
        if not isinstance(period, (int, float)) or isinstance(period, bool):
            raise ValidationError("period must be a number", field="period")
    for name in "ABCD":
        if name not in doc:
            raise ValidationError(f"missing matrix {name}", field=name)
    D = _as_matrix(doc["D"], "D")
    A = np.array(doc["A"], dtype=float)
    n = A.shape[0] if A.size else 0
    return StateSpaceModel(A.reshape(n, n) if n == 0 else A, doc["B"], doc["C"], D, period=period)


def load_model(path) -> StateSpaceModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})", field=str(path)) from exc
    return model_from_dict(doc)


def dumps_model(sys: StateSpaceModel, **extra) -> str:
    """JSON text with one matrix row per line; floats round-trip exactly."""
    doc = model_to_dict(sys)
    doc.update(extra)
    parts = []
    for key, val in doc.items():
        if key in "ABCD" and val:
            rows = ",\n    ".join(json.dumps(row) for row in val)
            parts.append(f'  "{key}": [\n    {rows}\n  ]')
        else:
            parts.append(f"  {json.dumps(key)}: {json.dumps(val)}")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def save_model(sys: StateSpaceModel, path, **extra) -> None:
    Path(path).write_text(dumps_model(sys, **extra))
