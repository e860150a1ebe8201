"""Evaluation of discretized filters.

Frequency-response tables, fast-grid time responses of the sampler, filter
and hold chain against the delayed ideal response, sweeps over the
upsampling ratio and the small-gain stability certificate for a digital
controller replacing an analog one.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleAtFrequencyError, ValidationError
from .lifting import (DesignSpec, build_error_system, fast_simulate, lift_system,
                      recover_multirate_filter, upsample)
from .lti import (SampledSignal, StateSpaceModel, c2d_zoh, delay_chain, frequency_response,
                  series)
from .norms import hinf_norm_continuous, sigma_max
from .plant import lower_lft
from .synthesis import error_norm, gamma_iterate

__all__ = [
    "DB_FLOOR",
    "ComparisonTable",
    "compare_frequency_responses",
    "PiecewiseConstantInput",
    "rectangular_wave",
    "TimeComparison",
    "simulate_comparison",
    "SweepPoint",
    "sweep_upsampling",
    "sweep_to_csv",
    "StabilityCertificate",
    "small_gain_certificate",
    "closed_loop_simulation",
    "error_system_gains",
    "as_fast_filter",
    "as_lifted_filter",
    "design_filter",
    "format_float",
]

DB_FLOOR = -150.0
CERTIFIED = "certified-stable"
NOT_CERTIFIED = "not-certified"


def format_float(x: float) -> str:
    return f"{x:.12g}"


def _to_db(mag):
    with np.errstate(divide="ignore"):
        return np.maximum(20.0 * np.log10(np.asarray(mag, dtype=float)), DB_FLOOR)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([r if isinstance(r, str) else format_float(r) for r in row])
    return buf.getvalue()


# ---------------------------------------------------------------- filters

def as_fast_filter(K: StateSpaceModel, h: float) -> StateSpaceModel:
    """Single-output filter at its own running rate ``h / L``.

    Accepts either a fast filter (period ``h / L``, one output) or a lifted
    filter ``K_tilde`` (period ``h``, ``L`` outputs), which is recovered.
    """
    if not K.is_discrete:
        raise ValidationError("filter must be discrete-time", field="domain")
    if math.isclose(K.period, h, rel_tol=1e-12) and K.n_outputs > 1:
        return recover_multirate_filter(K, K.n_outputs)
    ratio = h / K.period
    if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
        raise ValidationError(
            f"filter period {K.period} is not h/L for h={h}", field="period")
    return K


def _upsampling_ratio(K: StateSpaceModel, h: float) -> int:
    return int(round(h / K.period))


def as_lifted_filter(K: StateSpaceModel, h: float) -> StateSpaceModel:
    """``K_tilde`` at period ``h`` with ``L`` outputs, from either filter form."""
    if not K.is_discrete:
        raise ValidationError("filter must be discrete-time", field="domain")
    if math.isclose(K.period, h, rel_tol=1e-12):
        return K
    K = as_fast_filter(K, h)
    L = _upsampling_ratio(K, h)
    lifted = lift_system(K, L).model
    # zero-inserted input: only the first fast slot carries a sample
    q = K.n_inputs
    return StateSpaceModel(lifted.A, lifted.B[:, :q], lifted.C, lifted.D[:, :q],
                           period=lifted.period)


def design_filter(G, F, spec: DesignSpec):
    """Sampled-data H-infinity design; returns ``(plant, SynthesisResult)``.

    For ``spec.L > 1`` the result's filter is the lifted ``K_tilde``.
    """
    plant = build_error_system(G, F, spec)
    return plant, gamma_iterate(plant, spec)


# ---------------------------------------------------------------- frequency

@dataclass(frozen=True, eq=False)
class ComparisonTable:
    """Magnitudes in dB on a common frequency grid (rad/s)."""

    frequencies: np.ndarray
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float)
        if w.ndim != 1 or np.any(np.diff(w) <= 0):
            raise ValidationError("frequency grid must be strictly increasing", field="grid")
        cols = {}
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != w.shape:
                raise ValidationError(f"column {name!r} has wrong length", field=name)
            cols[name] = col
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "columns", cols)

    def to_csv(self) -> str:
        header = ["omega_rad_s"] + [f"{k}_dB" for k in self.columns]
        rows = zip(self.frequencies, *self.columns.values())
        return _csv_text(header, rows)


def compare_frequency_responses(G: StateSpaceModel, filters, grid,
                                h: float | None = None) -> ComparisonTable:
    """Magnitude of ``G(j w)`` and of each ``K(e^{j w T})`` in dB.

    Parameters
    ----------
    filters : dict or list
        Named discrete filters; a list is named ``filter1, filter2, ...``.
        Multirate filters may be passed lifted or recovered; each is
        evaluated at its own running period ``T = h/L`` and scaled by
        ``1/L``, the gain of the zero-insertion upsampler followed by the
        shorter hold, so that its column is comparable with ``G``.
    grid : array_like
        Strictly increasing frequencies in rad/s inside ``(0, pi/h)``.
    h : float, optional
        Sampling period; defaults to the longest filter period.
    """
    if G.is_discrete:
        raise ValidationError("target must be continuous-time", field="G")
    if not isinstance(filters, dict):
        filters = {f"filter{i + 1}": K for i, K in enumerate(filters)}
    for name, K in filters.items():
        if not K.is_discrete:
            raise ValidationError(f"filter {name!r} must be discrete-time", field=name)
    if h is None:
        h = max((K.period for K in filters.values()), default=None)
    w = np.asarray(grid, dtype=float)
    if h is not None and w.size and (w[0] <= 0 or w[-1] >= math.pi / h):
        raise ValidationError(
            f"grid must lie in (0, pi/h) = (0, {math.pi / h:.6g})", field="grid")
    cols = {"target": _to_db(_checked_gains(G, w))}
    for name, K in filters.items():
        Kf = as_fast_filter(K, h)
        L = _upsampling_ratio(Kf, h)
        cols[name] = _to_db(_checked_gains(Kf, w) / L)
    return ComparisonTable(w, cols)


def _checked_gains(sys, w):
    if sys.n_states:
        lam = sys.poles()
        pts = np.exp(1j * w * sys.period) if sys.is_discrete else 1j * w
        gap = np.min(np.abs(pts[:, None] - lam[None, :]), axis=1) if w.size else np.zeros(0)
        hit = np.nonzero(gap <= 1e-12 * (1.0 + np.max(np.abs(lam))))[0]
        if hit.size:
            frequency_response(sys, float(w[hit[0]]))  # raises with a precise message
            raise PoleAtFrequencyError(f"pole at grid frequency {w[hit[0]]}")
    return sigma_max(sys, w)


# ---------------------------------------------------------------- time

@dataclass(frozen=True)
class PiecewiseConstantInput:
    """Scalar input ``u(t) = values[i]`` for ``breakpoints[i] <= t < breakpoints[i+1]``."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        v = tuple(float(x) for x in self.values)
        if len(b) != len(v) or not b:
            raise ValidationError("schedule needs one value per breakpoint", field="schedule")
        if b[0] != 0.0 or any(y <= x for x, y in zip(b, b[1:])):
            raise ValidationError("breakpoints must start at 0 and increase", field="schedule")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def sample(self, period: float, count: int) -> np.ndarray:
        t = np.arange(count) * period
        idx = np.searchsorted(np.asarray(self.breakpoints), t + 1e-9 * period, side="right") - 1
        return np.asarray(self.values)[idx]

    @classmethod
    def from_csv(cls, text: str) -> "PiecewiseConstantInput":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and r[0].strip()]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        try:
            pairs = [(float(r[0]), float(r[1])) for r in rows]
        except (IndexError, ValueError) as exc:
            raise ValidationError(f"schedule rows must be 't, value': {exc}", field="schedule") from exc
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def rectangular_wave(amplitude: float = 1.0, half_period: float = 5.0,
                     duration: float = 30.0) -> PiecewiseConstantInput:
    """Square wave starting at ``+amplitude``, switching every ``half_period``."""
    count = int(math.ceil(duration / half_period - 1e-12))
    b = [k * half_period for k in range(max(count, 1))]
    v = [amplitude if k % 2 == 0 else -amplitude for k in range(len(b))]
    return PiecewiseConstantInput(tuple(b), tuple(v))


@dataclass(frozen=True, eq=False)
class TimeComparison:
    input: SampledSignal
    ideal: SampledSignal
    digital: SampledSignal
    error_energy: float

    def to_csv(self) -> str:
        rows = zip(self.ideal.times, self.ideal.values[:, 0], self.digital.values[:, 0])
        return _csv_text(["t", "ideal", "digital"], rows)


def _check_duration(duration, h):
    k = duration / h
    if not duration > 0 or abs(k - round(k)) > 1e-9 * max(1.0, k):
        raise ValidationError(f"duration {duration} is not a positive multiple of h={h}",
                              field="duration")
    return int(round(k))


def simulate_comparison(G: StateSpaceModel, K: StateSpaceModel, spec: DesignSpec,
                        u=None, duration: float = 30.0) -> TimeComparison:
    """Delayed ideal response ``(G u)(t - m h)`` against the digital chain.

    The input is held on the fast grid ``h/N``. The digital path samples it
    every ``h``, upsamples by ``L`` (zero insertion) when the filter runs at
    ``h/L``, filters and holds each output for ``N/L`` fast steps.

    Parameters
    ----------
    u : PiecewiseConstantInput, array_like or None
        A schedule, explicit fast-grid samples, or ``None`` for the default
        unit rectangular wave with half-period ``5 h``.
    duration : float
        Must be a multiple of ``h``.
    """
    h, N, m = spec.h, spec.N, spec.m
    slow = _check_duration(duration, h)
    hf = spec.fast_period
    count = slow * N
    if u is None:
        u = rectangular_wave(1.0, 5.0 * h, duration)
    if isinstance(u, PiecewiseConstantInput):
        uf = u.sample(hf, count)
    else:
        uf = np.asarray(u, dtype=float).reshape(-1)
        if uf.size != count:
            raise ValidationError(f"input has {uf.size} samples, expected {count}", field="u")
    Kf = as_fast_filter(K, h)
    L = _upsampling_ratio(Kf, h)
    if N % L:
        raise ValidationError(f"filter rate h/{L} does not divide the fast grid h/{N}", field="L")
    u_sig = SampledSignal(uf, hf)

    Gf = c2d_zoh(G, hf)
    ideal = fast_simulate([Gf, delay_chain(m * N, G.n_outputs, hf)], u_sig)

    v = uf[::N]
    psi = fast_simulate(Kf, SampledSignal(upsample(v, L), h / L)).values
    digital = SampledSignal(np.repeat(psi, N // L, axis=0), hf)
    err = ideal.values - digital.values
    return TimeComparison(u_sig, ideal, digital, float(np.sum(err ** 2) * hf))


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepPoint:
    L: int
    gamma: float
    gamma_certified: float
    error_norm: float


def sweep_upsampling(G, F, h=1.0, m=4, N=16, Ls=(1, 2, 4, 8, 16),
                     base: DesignSpec | None = None) -> list:
    """Multirate design for each ``L``; results follow the order of ``Ls``.

    ``gamma`` is the achieved level, ``gamma_certified`` the recomputed norm
    of the regularized closed loop and ``error_norm`` the true ``E_N`` norm.
    Repeated ``L`` values reuse the first computation.
    """
    base = base if base is not None else DesignSpec()
    for L in Ls:
        if int(L) != L or L < 1 or N % int(L):
            raise ValidationError(f"L={L} must be a positive divisor of N={N}", field="L")
    cache = {}
    out = []
    for L in Ls:
        L = int(L)
        if L not in cache:
            spec = base.replace(h=h, m=m, N=N, L=L)
            _, res = design_filter(G, F, spec)
            cache[L] = SweepPoint(L, res.gamma_achieved, res.gamma_certified, res.error_norm)
        out.append(cache[L])
    return out


def sweep_to_csv(points) -> str:
    return _csv_text(["L", "gamma"], [(str(p.L), p.gamma) for p in points])


# ---------------------------------------------------------------- E_N gains

def error_system_gains(G, F, K, spec: DesignSpec, omegas) -> np.ndarray:
    """Largest singular value of ``E_N(e^{j w h})`` with filter ``K``."""
    plant = build_error_system(G, F, spec).without_noise()
    return sigma_max(lower_lft(plant, as_lifted_filter(K, spec.h)), omegas)


# ---------------------------------------------------------------- small gain

@dataclass(frozen=True)
class StabilityCertificate:
    """Small-gain test ``norm_E < 1 - norm_GF`` with ``norm_E`` from ``E_N``."""

    norm_GF: float
    norm_E: float
    margin: float
    verdict: str
    N: int
    note: str = ""

    def __post_init__(self):
        if self.verdict not in (CERTIFIED, NOT_CERTIFIED):
            raise ValidationError(f"unknown verdict {self.verdict!r}", field="verdict")
        if self.verdict == CERTIFIED and not self.margin > 0:
            raise ValidationError("certified verdict requires a positive margin", field="margin")

    def to_dict(self) -> dict:
        return {"norm_GF": self.norm_GF, "norm_E": self.norm_E, "margin": self.margin,
                "verdict": self.verdict, "N": self.N, "note": self.note}


def small_gain_certificate(G: StateSpaceModel, F: StateSpaceModel, K: StateSpaceModel,
                           spec: DesignSpec) -> StabilityCertificate:
    """Certify the loop of plant ``F`` with controller ``G`` replaced by ``K``.

    Stability of the sampled-data loop follows when ``norm(G F) < 1`` and
    ``norm(E) < 1 - norm(G F)``, where ``E`` is the discretization error
    system with no delay. ``norm(E)`` is approximated by ``norm(E_N)`` at
    ``spec.N``.
    """
    if spec.m != 0:
        raise ValidationError("the small-gain certificate needs a filter with no delay (m = 0)",
                              field="m")
    norm_gf = hinf_norm_continuous(series(G, F))
    if norm_gf >= 1.0:
        note = f"norm(GF) = {norm_gf:.6g} >= 1: the analog loop itself fails the small-gain test"
        return StabilityCertificate(norm_gf, math.nan, 1.0 - norm_gf, NOT_CERTIFIED, spec.N, note)
    plant = build_error_system(G, F, spec)
    norm_e = error_norm(plant, as_lifted_filter(K, spec.h))
    margin = 1.0 - norm_gf - norm_e
    verdict = CERTIFIED if margin > 0 else NOT_CERTIFIED
    note = f"norm(E) approximated by norm(E_N) with N = {spec.N}"
    return StabilityCertificate(norm_gf, norm_e, margin, verdict, spec.N, note)


def closed_loop_simulation(F: StateSpaceModel, K: StateSpaceModel, spec: DesignSpec,
                           duration: float, reference=1.0, sign: float = -1.0):
    """Fast-grid simulation of plant ``F`` under the digital controller ``K``.

    Plant input is ``reference + sign * psi`` with ``psi`` the held filter
    output; the filter reads the plant output at every sampling instant.
    Returns ``(times, plant_output, state_norms)`` on the fast grid.
    """
    h, N = spec.h, spec.N
    slow = _check_duration(duration, h)
    Kt = as_lifted_filter(K, h)
    L = Kt.n_outputs // F.n_inputs
    if N % L:
        raise ValidationError(f"L={L} must divide N={N}", field="L")
    Ff = c2d_zoh(F, spec.fast_period)
    xf = np.zeros(Ff.n_states)
    xk = np.zeros(Kt.n_states)
    q = F.n_inputs
    y_out = np.empty((slow * N, F.n_outputs))
    states = np.empty(slow * N)
    i = 0
    for _ in range(slow):
        v = Ff.C @ xf
        psi = Kt.C @ xk + Kt.D @ v
        xk = Kt.A @ xk + Kt.B @ v
        blocks = psi.reshape(L, q)
        for j in range(N):
            u = reference + sign * blocks[j // (N // L)]
            y_out[i] = Ff.C @ xf + Ff.D @ u
            states[i] = max(np.max(np.abs(xf), initial=0.0), np.max(np.abs(xk), initial=0.0))
            xf = Ff.A @ xf + Ff.B @ u
            i += 1
    return np.arange(slow * N) * spec.fast_period, y_out, states
