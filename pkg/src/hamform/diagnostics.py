"""Hydrodynamic diagnostics and the vector-field commutator anomaly.

A planar flow ``v = f(x)`` transports a phase-fluid density ``rho`` obeying
``d rho / dt = -rho div v`` along trajectories, so

    rho(t) / rho(0) = exp(-integral div v dt).

For the linearly damped oscillator ``x' = p, p' = -x - b p`` the density
grows as ``e^{bt}`` and the pressure ``P = P0 - cK e^{bt}(b x p + b^2 p^2 / 2)``
makes ``rho |v|^2 / 2 + P`` reduce to ``cK e^{bt}(x^2 + p^2) / 2 + P0``, which
is constant only when ``b = 0``; for ``b > 0`` it oscillates in a band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hamform.core import ScalarField, SystemDef, as_coords, canonical_matrix, divergence
from hamform.errors import ConfigurationError, DimensionError
from hamform.reservoir import EffectiveInvariant
from hamform.trajectory import Trajectory


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y, dtype=float)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def density_factor(sys: Optional[SystemDef], traj: Trajectory) -> np.ndarray:
    """``rho(t) / rho(0) = exp(-integral_0^t div f dt')`` by the trapezoidal rule.

    Uses ``traj.div`` when it is fully populated; otherwise the divergence
    is evaluated from ``sys`` at every sample.
    """
    div = traj.div
    if div is None or np.any(~np.isfinite(div)):
        if sys is None:
            raise ConfigurationError("trajectory has no divergence series and no system was given")
        div = np.array([divergence(sys, row) for row in traj.x])
    return np.exp(-_cumtrapz(np.asarray(div, dtype=float), traj.t))


@dataclass(frozen=True)
class HydroReport:
    """Pressure and Bernoulli diagnostics along a damped-oscillator trajectory.

    Attributes:
        density_series: ``rho(t) / rho(0)``.
        pressure_series: ``P(t)``.
        bernoulli_residual: ``rho |v|^2 / 2 + P`` minus its initial value.
        positivity: ``min P(t) >= 0``.
        margin: ``min P(t)``.
        sufficient_condition: the closed-form positivity test holds.
        sufficient_margin: left-hand side of that test.
    """

    density_series: np.ndarray
    pressure_series: np.ndarray
    bernoulli_residual: np.ndarray
    positivity: bool
    margin: float
    sufficient_condition: bool
    sufficient_margin: float

    @property
    def band(self) -> float:
        """Peak-to-peak width of the Bernoulli residual."""
        return float(np.ptp(self.bernoulli_residual))

    @property
    def agree(self) -> bool:
        return self.positivity == self.sufficient_condition


def oscillator_amplitude_phase(b: float, x0: float, p0: float):
    """``(omega, A0, delta)`` with ``x(t) = A0 e^{-bt/2} cos(omega t + delta)``."""
    omega = math.sqrt(1.0 - b * b / 4.0)
    q = (p0 + 0.5 * b * x0) / omega
    return omega, math.hypot(x0, q), math.atan2(-q, x0)


def pressure_sufficient_margin(b: float, cK: float, P0: float, x0: float, p0: float) -> float:
    """``P0 - cK A0^2 [(b + b^2/2) cos^2 d - (omega b + b^2) sin d cos d + b^2 omega^2 sin^2 d / 2]``."""
    omega, A0, d = oscillator_amplitude_phase(b, x0, p0)
    c, s = math.cos(d), math.sin(d)
    bracket = (b + b * b / 2) * c * c - (omega * b + b * b) * s * c + 0.5 * b * b * omega**2 * s * s
    return P0 - cK * A0**2 * bracket


def _require_damped_oscillator(b: float, traj: Trajectory):
    if traj.x.ndim != 2 or traj.x.shape[1] != 2:
        raise ConfigurationError(f"expected a planar trajectory, got states of shape {traj.x.shape}")
    name = traj.meta.get("system") if traj.meta else None
    if name not in (None, "", "damped_oscillator"):
        raise ConfigurationError(f"bernoulli_check needs a damped oscillator trajectory, got {name!r}")
    if not abs(b) < 2:
        raise ConfigurationError(f"|b| must be below 2 for an oscillating solution, got {b}")
    n = traj.t.size
    if n < 3:
        raise ConfigurationError("need at least 3 samples")
    # the samples must follow x' = p, p' = -x - b p
    x, p = traj.x[:, 0], traj.x[:, 1]
    dt = traj.t[2:] - traj.t[:-2]
    dx = (x[2:] - x[:-2]) / dt
    dp = (p[2:] - p[:-2]) / dt
    scale = 1.0 + float(np.max(np.abs(traj.x)))
    err = max(float(np.max(np.abs(dx - p[1:-1]))),
              float(np.max(np.abs(dp + x[1:-1] + b * p[1:-1]))))
    if err > 1e-2 * scale:
        raise ConfigurationError(
            f"trajectory does not follow x' = p, p' = -x - {b} p (mismatch {err:.3e})"
        )


def bernoulli_check(b: float, cK: float, P0: float, traj: Trajectory) -> HydroReport:
    """Pressure, Bernoulli residual and positivity for the damped oscillator.

    ``cK`` is the density constant, which may depend on the trajectory;
    it is treated as one opaque number.

    Raises:
        ConfigurationError: when ``traj`` is not a damped-oscillator trajectory
            with damping ``b``.
    """
    _require_damped_oscillator(b, traj)
    t = traj.t - traj.t[0]
    x, p = traj.x[:, 0], traj.x[:, 1]
    rho = cK * np.exp(b * t)
    P = P0 - rho * (b * x * p + 0.5 * b * b * p * p)
    speed2 = p * p + (x + b * p) ** 2
    bern = 0.5 * rho * speed2 + P
    margin = pressure_sufficient_margin(b, cK, P0, x[0], p[0])
    return HydroReport(
        density_series=np.exp(b * t),
        pressure_series=P,
        bernoulli_residual=bern - bern[0],
        positivity=bool(np.min(P) >= 0),
        margin=float(np.min(P)),
        sufficient_condition=bool(margin >= 0),
        sufficient_margin=float(margin),
    )


def _central_jacobian(fun, x, h):
    d = x.size
    cols = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h))
    return np.column_stack(cols)


def _central_gradient(fun, x, h):
    d = x.size
    g = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def commutator_anomaly(generator: ScalarField, invariant: EffectiveInvariant, s,
                       h_fd: float = 1e-4) -> np.ndarray:
    """Residual of ``[X_f, X_K] = -X_{f,K} + div(X_K) X_f`` in canonical 2D.

    Conventions: ``X_g = J grad g`` with ``J = [[0, 1], [-1, 0]]``, the Lie
    bracket ``[X, Y] = DY X - DX Y`` and ``{f, K} = grad f . X_K``. Since K
    is path-dependent, ``X_K = J dK`` uses the Pfaffian components.

    Every derivative (gradient of f unless it is analytic, Jacobians,
    divergence and the gradient of ``{f, K}``) is taken with second-order
    central differences of step ``h_fd``, so the residual decays as
    ``h_fd^2`` at generic points.

    Raises:
        DimensionError: if the phase space is not 2-dimensional.
    """
    x = as_coords(s)
    if x.size != 2 or invariant.dim != 2:
        raise DimensionError(f"commutator anomaly needs canonical 2D, got dims {x.size}, {invariant.dim}")
    if h_fd <= 0:
        raise ValueError("h_fd must be positive")
    J = canonical_matrix(2)

    if generator.grad is not None:
        grad_f = generator.gradient
    else:
        def grad_f(y):
            return _central_gradient(generator, y, h_fd)

    def X_f(y):
        return J @ grad_f(y)

    def X_K(y):
        return J @ invariant.components(y)

    def bracket_fK(y):
        return float(grad_f(y) @ X_K(y))

    DXf = _central_jacobian(X_f, x, h_fd)
    DXK = _central_jacobian(X_K, x, h_fd)
    lie = DXK @ X_f(x) - DXf @ X_K(x)
    X_bracket = J @ _central_gradient(bracket_fK, x, h_fd)
    div_K = float(np.trace(DXK))
    return lie - (-X_bracket + div_K * X_f(x))
