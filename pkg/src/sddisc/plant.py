"""Partitioned generalized plants and the lower linear fractional transformation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .lti import StateSpaceModel

__all__ = ["GeneralizedPlant", "lower_lft"]


@dataclass(frozen=True, eq=False)
class GeneralizedPlant:
    """Plant with disturbance ``w``, control ``u``, error ``e`` and measurement ``y``.

    ::

        x' = A x + B1 w + B2 u
        e  = C1 x + D11 w + D12 u
        y  = C2 x + D21 w + D22 u

    The last ``n_noise`` columns of ``w`` are fictitious measurement noise
    added for regularization; :meth:`without_noise` drops them.
    """

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D11: np.ndarray
    D12: np.ndarray
    D21: np.ndarray
    D22: np.ndarray
    period: float | None = None
    n_noise: int = 0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        mats = {k: np.array(getattr(self, k), dtype=float) for k in
                ("A", "B1", "B2", "C1", "C2", "D11", "D12", "D21", "D22")}
        n = mats["A"].shape[0]
        m1, m2 = mats["D11"].shape[1], mats["D12"].shape[1]
        p1, p2 = mats["D11"].shape[0], mats["D21"].shape[0]
        want = {"A": (n, n), "B1": (n, m1), "B2": (n, m2), "C1": (p1, n), "C2": (p2, n),
                "D11": (p1, m1), "D12": (p1, m2), "D21": (p2, m1), "D22": (p2, m2)}
        for k, shape in want.items():
            if mats[k].size == 0:
                mats[k] = mats[k].reshape(shape)
            if mats[k].shape != shape:
                raise ValidationError(f"{k} must be {shape}, got {mats[k].shape}", field=k)
            mats[k].setflags(write=False)
            object.__setattr__(self, k, mats[k])
        if not 0 <= self.n_noise <= m1:
            raise ValidationError("n_noise out of range", field="n_noise")

    @property
    def dims(self):
        """``(n, m1, m2, p1, p2)``."""
        return (self.A.shape[0], self.B1.shape[1], self.B2.shape[1],
                self.C1.shape[0], self.C2.shape[0])

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    def as_model(self) -> StateSpaceModel:
        """The full plant ``[w; u] -> [e; y]``."""
        return StateSpaceModel(
            self.A, np.hstack([self.B1, self.B2]), np.vstack([self.C1, self.C2]),
            np.block([[self.D11, self.D12], [self.D21, self.D22]]), period=self.period)

    def target(self) -> StateSpaceModel:
        """``w -> e`` with the filter removed (``u = 0``)."""
        return StateSpaceModel(self.A, self.B1, self.C1, self.D11, period=self.period)

    def without_noise(self) -> "GeneralizedPlant":
        if self.n_noise == 0:
            return self
        k = self.B1.shape[1] - self.n_noise
        return GeneralizedPlant(self.A, self.B1[:, :k], self.B2, self.C1, self.C2,
                                self.D11[:, :k], self.D12, self.D21[:, :k], self.D22,
                                period=self.period, n_noise=0, info=dict(self.info))

    def with_matrices(self, **changes) -> "GeneralizedPlant":
        kw = {k: getattr(self, k) for k in
              ("A", "B1", "B2", "C1", "C2", "D11", "D12", "D21", "D22", "period", "n_noise")}
        kw.update(changes)
        return GeneralizedPlant(info=dict(self.info), **kw)


def lower_lft(plant: GeneralizedPlant, K: StateSpaceModel) -> StateSpaceModel:
    """Close ``u = K y`` around the plant; returns ``w -> e``.

    State ordering is ``[x_plant; x_K]``.
    """
    n, m1, m2, p1, p2 = plant.dims
    if (K.n_inputs, K.n_outputs) != (p2, m2):
        raise ValidationError(
            f"filter must map {p2} measurements to {m2} controls, "
            f"got {K.n_inputs} -> {K.n_outputs}")
    if plant.period is None:
        if K.is_discrete:
            raise ValidationError("continuous plant needs a continuous filter", field="domain")
    elif not K.is_discrete or not np.isclose(K.period, plant.period, rtol=1e-12, atol=0):
        raise ValidationError(
            f"filter period {K.period} does not match plant period {plant.period}", field="period")
    nk = K.n_states
    # u = Dk y + Ck xk,  y = C2 x + D21 w + D22 u
    M = np.eye(m2) - K.D @ plant.D22
    try:
        Minv = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("ill-posed interconnection: I - Dk D22 singular") from exc
    Ux = Minv @ K.D @ plant.C2
    Uk = Minv @ K.C
    Uw = Minv @ K.D @ plant.D21
    Yx = plant.C2 + plant.D22 @ Ux
    Yk = plant.D22 @ Uk
    Yw = plant.D21 + plant.D22 @ Uw
    A = np.block([[plant.A + plant.B2 @ Ux, plant.B2 @ Uk],
                  [K.B @ Yx, K.A + K.B @ Yk]])
    B = np.vstack([plant.B1 + plant.B2 @ Uw, K.B @ Yw])
    C = np.hstack([plant.C1 + plant.D12 @ Ux, plant.D12 @ Uk])
    D = plant.D11 + plant.D12 @ Uw
    return StateSpaceModel(A, B, C, D, period=plant.period)
