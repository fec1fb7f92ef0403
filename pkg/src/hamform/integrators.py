"""Fixed-step integrators and convergence-order estimation.

Three one-step methods are provided:

* ``rk4``: classical fourth-order Runge-Kutta.
* ``implicit_midpoint``: ``y = s + h f((s + y) / 2)``, symmetric, order 2.
* ``discrete_gradient``: ``y = s + h B(m) grad_bar H(s, y)`` with the
  midpoint-secant discrete gradient, which preserves ``H`` exactly up to the
  Newton tolerance for any skew ``B``.

The implicit methods use a damped Newton iteration with a forward-difference
Jacobian, so systems never need to supply analytic Jacobians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from hamform.core import PhaseState, ScalarField, SystemDef, as_coords, divergence
from hamform.errors import (
    ConfigurationError,
    ConvergenceError,
    DimensionError,
    DomainError,
    HamformError,
    IntegrationError,
)
from hamform.reservoir import EffectiveInvariant, ReservoirSpec, accumulate, effective_K
from hamform.trajectory import Trajectory

METHODS = ("rk4", "implicit_midpoint", "discrete_gradient")
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    h: float = 1e-3
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.h > 0:
            raise ConfigurationError(f"step size must be positive, got {self.h}")
        if not self.newton_tol > 0:
            raise ConfigurationError(f"newton_tol must be positive, got {self.newton_tol}")
        if self.newton_max_iter < 1:
            raise ConfigurationError("newton_max_iter must be at least 1")


def _state(s):
    if isinstance(s, PhaseState):
        return s.t, s.x
    return 0.0, as_coords(s)


def _newton(F: Callable, y0: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    """Damped Newton on ``F(y) = 0`` with a forward-difference Jacobian."""
    y = np.array(y0, dtype=float)
    r = F(y)
    if not np.all(np.isfinite(r)):
        raise ConvergenceError("residual not finite at the initial guess", residual=math.inf)
    d = y.size
    for it in range(1, cfg.newton_max_iter + 1):
        rnorm = np.max(np.abs(r))
        if rnorm == 0.0:
            return y
        jac = np.empty((d, d))
        for j in range(d):
            dj = math.sqrt(_EPS) * (1.0 + abs(y[j]))
            e = np.zeros(d)
            e[j] = dj
            jac[:, j] = (F(y + e) - r) / dj
        try:
            dy = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Newton matrix: {exc}", residual=rnorm, iterations=it)
        lam = 1.0
        while True:
            y_new = y + lam * dy
            r_new = F(y_new)
            ok = np.all(np.isfinite(r_new))
            if ok and (np.max(np.abs(r_new)) < rnorm or lam * np.max(np.abs(dy)) <= 1e3 * cfg.newton_tol):
                break
            if lam < 2.0**-10:
                if not ok:
                    raise ConvergenceError("Newton iterate left the region where f is finite",
                                           residual=rnorm, iterations=it)
                break
            lam *= 0.5
        y, r = y_new, r_new
        if lam * np.max(np.abs(dy)) <= cfg.newton_tol * (1.0 + np.max(np.abs(y))):
            return y
    raise ConvergenceError(
        f"Newton did not converge in {cfg.newton_max_iter} iterations "
        f"(residual {np.max(np.abs(r)):.3e})",
        residual=float(np.max(np.abs(r))),
        iterations=cfg.newton_max_iter,
    )


def _rk4(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _midpoint(sys, x, h, cfg):
    def F(y):
        return y - x - h * sys(0.5 * (x + y))

    return _newton(F, x + h * sys(x), cfg)


def midpoint_secant_gradient(H: ScalarField, s, y) -> np.ndarray:
    """Discrete gradient with ``g . (y - s) == H(y) - H(s)``.

    ``grad H(m) + (H(y) - H(s) - grad H(m).(y - s)) / |y - s|^2 (y - s)``
    with ``m`` the midpoint; falls back to ``grad H(s)`` when ``|y - s| < 1e-14``.
    """
    s, y = as_coords(s), as_coords(y)
    d = y - s
    nn = float(d @ d)
    if math.sqrt(nn) < 1e-14:
        return H.gradient(s)
    g = H.gradient(0.5 * (s + y))
    return g + ((H(y) - H(s) - float(g @ d)) / nn) * d


def _invariant_discrete_gradient(inv: EffectiveInvariant, s, y) -> np.ndarray:
    # secant on the exact part, midpoint values for the reservoir integrands
    m = 0.5 * (s + y)
    if inv.potential is None:
        g = np.zeros(inv.dim)
    else:
        g = midpoint_secant_gradient(inv.potential, s, y)
    for r in inv.reservoirs:
        g[r.against_index] += float(r.integrand(m))
    return g


def _dg_parts(sys):
    if sys.skew is None:
        raise ConfigurationError("discrete gradient step needs a skew matrix B")
    if sys.hamiltonian is not None:
        H = sys.hamiltonian
        return lambda s, y: midpoint_secant_gradient(H, s, y)
    if sys.pfaffian is not None:
        inv = sys.pfaffian
        return lambda s, y: _invariant_discrete_gradient(inv, s, y)
    raise ConfigurationError("discrete gradient step needs a hamiltonian or a Pfaffian invariant")


def _discrete_gradient(sys, x, h, cfg, dg=None):
    dg = dg or _dg_parts(sys)

    def F(y):
        return y - x - h * (np.asarray(sys.skew(0.5 * (x + y))) @ dg(x, y))

    return _newton(F, x + h * sys(x), cfg)


def _check_dim(sys, x):
    if x.size != sys.dim:
        raise DimensionError(f"state has {x.size} coordinates, system has {sys.dim}")


def step_rk4(sys: SystemDef, s, h: float) -> PhaseState:
    """One classical Runge-Kutta step; raises `DomainError` on leaving the domain."""
    t, x = _state(s)
    _check_dim(sys, x)
    return PhaseState(t + h, sys.require(_rk4(sys, x, h)))


def step_implicit_midpoint(sys: SystemDef, s, h: float, cfg: Optional[IntegratorConfig] = None) -> PhaseState:
    """One implicit midpoint step solved by damped Newton."""
    cfg = cfg or IntegratorConfig(method="implicit_midpoint", h=abs(h))
    t, x = _state(s)
    _check_dim(sys, x)
    return PhaseState(t + h, sys.require(_midpoint(sys, x, h, cfg)))


def step_discrete_gradient(sys: SystemDef, s, h: float, cfg: Optional[IntegratorConfig] = None) -> PhaseState:
    """One energy-preserving discrete-gradient step.

    Needs ``sys.skew`` and either ``sys.hamiltonian`` or ``sys.pfaffian``
    (an `EffectiveInvariant`, whose reservoir parts are evaluated at the
    midpoint).
    """
    cfg = cfg or IntegratorConfig(method="discrete_gradient", h=abs(h))
    t, x = _state(s)
    _check_dim(sys, x)
    return PhaseState(t + h, sys.require(_discrete_gradient(sys, x, h, cfg)))


def _stepper(sys: SystemDef, cfg: IntegratorConfig):
    h = cfg.h
    if cfg.method == "rk4":
        return lambda x: _rk4(sys, x, h)
    if cfg.method == "implicit_midpoint":
        return lambda x: _midpoint(sys, x, h, cfg)
    dg = _dg_parts(sys)
    return lambda x: _discrete_gradient(sys, x, h, cfg, dg)


def n_steps(T: float, h: float) -> int:
    """Number of fixed steps needed to cover ``T``: ``ceil(T / h)``, at least 1.

    Ratios within ``1e-9`` of an integer are rounded, so that e.g. ``T = 20``
    and ``h = 1e-3`` give exactly 20000 steps.
    """
    ratio = T / h
    near = round(ratio)
    if near >= 1 and abs(ratio - near) <= 1e-9 * max(1.0, ratio):
        return int(near)
    return max(1, math.ceil(ratio))


def _series(fun, x):
    return np.array([fun(row) for row in x])


def _div_series(sys, x):
    out = np.empty(x.shape[0])
    for k, row in enumerate(x):
        try:
            out[k] = divergence(sys, row)
        except DomainError:
            out[k] = np.nan
    return out


def _finish(sys, t, x, specs, inv, cfg, record_divergence, error=None, quadrature="trapezoid"):
    if len(x) and specs:
        w = accumulate(specs, Trajectory(t=t, x=x), quadrature, sys)
    else:
        w = np.zeros((x.shape[0], len(specs)))
    pot = None
    if inv is not None and inv.potential is not None:
        pot = _series(inv.potential, x)
    if sys.hamiltonian is not None:
        H = _series(sys.hamiltonian, x)
    else:
        H = pot
    K = None
    if inv is not None:
        K = (np.zeros(x.shape[0]) if pot is None else pot) + w.sum(axis=1)
    div = _div_series(sys, x) if record_divergence else None
    return Trajectory(t=t, x=x, reservoirs=w, H=H, K=K, div=div, h=cfg.h,
                      method=cfg.method, error=error, meta={"system": sys.name})


def integrate(
    sys: SystemDef,
    s0,
    cfg: IntegratorConfig,
    T: float,
    reservoirs: Optional[Sequence[ReservoirSpec]] = None,
    invariant: Optional[EffectiveInvariant] = None,
    record_divergence: bool = True,
    quadrature: str = "trapezoid",
) -> Trajectory:
    """Integrate over ``[t0, t0 + n h]`` with ``n = n_steps(T, h)``.

    Reservoirs are co-accumulated trapezoidally in the integrator's own
    samples (``quadrature="hermite"`` switches to the fourth-order
    endpoint-corrected rule, see `accumulate`). When an invariant is given
    (or ``sys.pfaffian`` is set) its reservoirs are used by default and the
    K series is recorded.

    Raises:
        IntegrationError: when a step fails; ``.trajectory`` holds the
            samples computed so far, with ``error`` set.
    """
    if not T > 0:
        raise ConfigurationError(f"T must be positive, got {T}")
    t0, x0 = _state(s0)
    x0 = sys.require(x0)
    inv = invariant if invariant is not None else sys.pfaffian
    if reservoirs is None:
        specs = list(inv.reservoirs) if inv is not None else []
    else:
        specs = list(reservoirs)
    n = n_steps(T, cfg.h)
    step = _stepper(sys, cfg)
    xs = np.empty((n + 1, sys.dim))
    xs[0] = x0
    k = 0
    try:
        for k in range(1, n + 1):
            xs[k] = sys.require(step(xs[k - 1]))
    except HamformError as exc:
        t = t0 + cfg.h * np.arange(k)
        partial = _finish(sys, t, xs[:k], specs, inv, cfg, False,
                          error=f"step {k} (t={t0 + k * cfg.h:.6g}): {exc}", quadrature=quadrature)
        raise IntegrationError(partial.error, trajectory=partial, cause=exc) from exc
    t = t0 + cfg.h * np.arange(n + 1)
    return _finish(sys, t, xs, specs, inv, cfg, record_divergence, quadrature=quadrature)


@dataclass(frozen=True)
class OrderEstimate:
    """Least-squares slope of log(drift) against log(h)."""

    order: Optional[float]
    saturated: bool
    h: tuple
    drifts: tuple

    def __str__(self):
        return "saturated" if self.saturated else f"{self.order:.3f}"


def invariant_drift(invariant, traj: Trajectory) -> float:
    """Max deviation of a first integral or effective invariant from its start."""
    if isinstance(invariant, EffectiveInvariant):
        return effective_K(invariant, traj).drift_max
    vals = _series(invariant, traj.x)
    return float(np.max(np.abs(vals - vals[0])))


def convergence_order(
    sys: SystemDef,
    s0,
    invariant: Union[ScalarField, EffectiveInvariant],
    h_list: Sequence[float],
    T: float,
    method: str = "rk4",
    **cfg_kwargs,
) -> OrderEstimate:
    """Estimate the order at which invariant drift vanishes under step halving.

    Drifts below ``100 * eps * max(1, |I_0|)`` are treated as round-off;
    if fewer than two step sizes remain above that floor the estimate is
    reported as saturated.
    """
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3:
        raise ValueError("need at least three step sizes")
    for a, b in zip(h_list, h_list[1:]):
        if abs(b - a / 2) > 1e-9 * a:
            raise ValueError(f"step sizes must halve: {a} -> {b}")
    drifts = []
    scale = 1.0
    for h in h_list:
        traj = integrate(sys, s0, IntegratorConfig(method=method, h=h, **cfg_kwargs), T,
                         invariant=invariant if isinstance(invariant, EffectiveInvariant) else None,
                         record_divergence=False)
        if isinstance(invariant, EffectiveInvariant):
            ks = effective_K(invariant, traj)
            drifts.append(ks.drift_max)
            scale = max(scale, abs(ks.initial))
        else:
            drifts.append(invariant_drift(invariant, traj))
            scale = max(scale, abs(invariant(traj.x[0])))
    floor = 1e2 * _EPS * scale
    use = [(h, d) for h, d in zip(h_list, drifts) if d > floor]
    if len(use) < 2:
        return OrderEstimate(None, True, tuple(h_list), tuple(drifts))
    lh = np.log([h for h, _ in use])
    ld = np.log([d for _, d in use])
    slope = float(np.polyfit(lh, ld, 1)[0])
    return OrderEstimate(slope, False, tuple(h_list), tuple(drifts))
