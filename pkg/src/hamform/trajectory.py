"""Uniform-step trajectory container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hamform.core import PhaseState
from hamform.errors import DimensionError


@dataclass
class Trajectory:
    """Time-stamped states plus reservoir and diagnostic series.

    Attributes:
        t: sample times, shape ``(n,)``.
        x: states, shape ``(n, d)``.
        reservoirs: accumulated reservoir values, shape ``(n, m)``.
        H: potential-part / first-integral series, when available.
        K: effective invariant series, when available.
        div: divergence series, when recorded.
        h: step size.
        method: name of the integrator that produced the samples.
        error: annotation set when integration aborted early.
    """

    t: np.ndarray
    x: np.ndarray
    reservoirs: np.ndarray = None
    H: Optional[np.ndarray] = None
    K: Optional[np.ndarray] = None
    div: Optional[np.ndarray] = None
    h: float = float("nan")
    method: str = ""
    error: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x.reshape(-1, 1)
        if self.x.shape[0] != self.t.size:
            raise DimensionError(
                f"{self.t.size} timestamps but {self.x.shape[0]} states"
            )
        if self.reservoirs is None:
            self.reservoirs = np.zeros((self.t.size, 0))
        self.reservoirs = np.asarray(self.reservoirs, dtype=float).reshape(self.t.size, -1)

    @classmethod
    def from_states(cls, states, **kwargs) -> "Trajectory":
        """Build from a sequence of `PhaseState`."""
        states = list(states)
        t = [s.t for s in states]
        x = np.array([s.x for s in states]).reshape(len(states), -1)
        return cls(t=t, x=x, **kwargs)

    def __len__(self):
        return self.t.size

    def __getitem__(self, k) -> PhaseState:
        return PhaseState(self.t[k], self.x[k])

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def samples(self) -> list:
        return [self[k] for k in range(len(self))]

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        if len(self) < 2:
            return True
        dt = np.diff(self.t)
        if np.any(dt <= 0):
            return False
        # timestamps are t0 + k*h, so compare against the ideal grid
        ideal = self.t[0] + np.arange(len(self)) * dt.mean()
        scale = max(abs(self.t[-1]), abs(self.t[0]), dt.mean())
        return bool(np.max(np.abs(self.t - ideal)) <= 1e2 * rtol * scale)
