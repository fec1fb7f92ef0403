"""Pfaffian forms, reservoir variables and the effectively conserved K.

A reservoir ``w = integral of g(x) dx_j`` is a Riemann-Stieltjes integral
taken along one trajectory, so its value depends on the path. The
effective invariant ``K = potential(x) + sum_i w_i`` is constant along
solutions whenever the Pfaffian components

    dK = grad(potential) + sum_i g_i(x) e_{j_i}

are annihilated by the field, ``dK(f) = 0``. In canonical 2D coordinates
``(x, p)`` the decompositions use the convention ``x' = K_p`` and
``p' = -K_x``, i.e. the components equal ``(-f_2, f_1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from hamform.core import ScalarField, SystemDef, as_coords, canonical_matrix
from hamform.errors import DimensionError, HamformError

__all__ = [
    "PfaffianForm",
    "ReservoirSpec",
    "EffectiveInvariant",
    "KSeries",
    "reservoir_increment",
    "accumulate",
    "effective_K",
    "pfaffian_contract",
    "k_field",
    "reservoir_rate",
    "differential_quotient",
    "canonical_decomposition",
]


class EmptyTrajectoryError(HamformError, ValueError):
    """Raised when a reservoir is accumulated over no samples."""


@dataclass(frozen=True)
class PfaffianForm:
    """A 1-form ``sum_i K_i(x) dx_i`` that need not be exact.

    ``components`` is either one callable returning the full vector or a
    sequence of ``dim`` scalar callables. ``potential`` is set only when the
    form is known to be exact.
    """

    dim: int
    components: object
    potential: Optional[ScalarField] = None

    def __call__(self, x) -> np.ndarray:
        x = as_coords(x)
        if callable(self.components):
            out = np.asarray(self.components(x), dtype=float).reshape(-1)
        else:
            out = np.array([float(c(x)) for c in self.components])
        if out.size != self.dim:
            raise DimensionError(f"form has {out.size} components, expected {self.dim}")
        return out

    @property
    def is_exact(self) -> bool:
        return self.potential is not None

    def exactness_residual(self, samples) -> float:
        """Max ``|components - grad potential|`` over samples."""
        if self.potential is None:
            raise ValueError("form carries no potential")
        return max(
            float(np.max(np.abs(self(s) - self.potential.gradient(s)))) for s in samples
        )


@dataclass(frozen=True)
class ReservoirSpec:
    """Reservoir ``w = initial_value + integral of integrand dx_{against_index}``."""

    integrand: Callable[[np.ndarray], float]
    against_index: int
    initial_value: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.against_index < 0:
            raise DimensionError("against_index must be non-negative")


@dataclass(frozen=True)
class EffectiveInvariant:
    """``K = potential + sum of reservoirs`` with its structure matrix.

    Attributes:
        dim: phase-space dimension.
        potential: exact part of K (``None`` for zero).
        reservoirs: non-exact contributions.
        structure: constant skew matrix ``S`` with ``f = S dK``. Defaults to
            the canonical matrix, which requires an even dimension.
    """

    dim: int
    potential: Optional[ScalarField] = None
    reservoirs: tuple = ()
    structure: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "reservoirs", tuple(self.reservoirs))
        for r in self.reservoirs:
            if r.against_index >= self.dim:
                raise DimensionError(
                    f"reservoir against x{r.against_index + 1} in a {self.dim}-dim system"
                )

    def components(self, x) -> np.ndarray:
        x = as_coords(x)
        if x.size != self.dim:
            raise DimensionError(f"state has {x.size} coordinates, invariant has {self.dim}")
        out = np.zeros(self.dim) if self.potential is None else self.potential.gradient(x)
        out = np.array(out, dtype=float)
        for r in self.reservoirs:
            out[r.against_index] += float(r.integrand(x))
        return out

    @property
    def form(self) -> PfaffianForm:
        exact = self.potential if not self.reservoirs else None
        return PfaffianForm(self.dim, self.components, potential=exact)

    def structure_matrix(self) -> np.ndarray:
        if self.structure is None:
            return canonical_matrix(self.dim)
        return np.asarray(self.structure, dtype=float)

    def potential_value(self, x) -> float:
        return 0.0 if self.potential is None else self.potential(x)


def _same_dim(a, b):
    if a.size != b.size:
        raise DimensionError(f"states have {a.size} and {b.size} coordinates")


def reservoir_increment(spec: ReservoirSpec, a, b) -> float:
    """Trapezoidal Stieltjes increment ``(g(a) + g(b)) / 2 * (x_j(b) - x_j(a))``."""
    xa, xb = as_coords(a), as_coords(b)
    _same_dim(xa, xb)
    if spec.against_index >= xa.size:
        raise DimensionError(f"reservoir against x{spec.against_index + 1} in {xa.size}-dim state")
    j = spec.against_index
    return 0.5 * (float(spec.integrand(xa)) + float(spec.integrand(xb))) * (xb[j] - xa[j])


def _states(traj) -> np.ndarray:
    x = getattr(traj, "x", traj)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return x


QUADRATURES = ("trapezoid", "hermite")


def _rate(spec, field, x):
    return float(spec.integrand(x)) * float(field(x)[spec.against_index])


def _rate_derivative(spec, field, x):
    # d/dt of g(x) f_j(x) along the flow: central difference in the direction f(x)
    v = np.asarray(field(x), dtype=float)
    speed = float(np.linalg.norm(v))
    if speed == 0.0:
        return 0.0
    delta = 1e-4 * (1.0 + float(np.linalg.norm(x))) / speed
    return (_rate(spec, field, x + delta * v) - _rate(spec, field, x - delta * v)) / (2 * delta)


def accumulate(specs: Sequence[ReservoirSpec], traj, quadrature: str = "trapezoid",
               field: Optional[Callable] = None) -> np.ndarray:
    """Cumulative reservoir series along a trajectory.

    Args:
        specs: reservoirs to accumulate.
        traj: a `Trajectory` or an ``(n, d)`` array of consecutive states.
        quadrature: ``"trapezoid"`` uses ``(g_a + g_b) / 2 * (x_j(b) - x_j(a))``
            and is second order. ``"hermite"`` integrates the rate
            ``g f_j`` in time with the endpoint-corrected trapezoidal rule
            (fourth order); it needs ``field`` and timestamps (``traj.t``).
        field: the vector field, required for ``"hermite"``.

    Returns:
        Array of shape ``(n, len(specs))``; row 0 holds the initial values.
    """
    if quadrature not in QUADRATURES:
        raise ValueError(f"unknown quadrature {quadrature!r}; expected one of {QUADRATURES}")
    x = _states(traj)
    n = x.shape[0]
    if n == 0:
        raise EmptyTrajectoryError("cannot accumulate reservoirs over an empty trajectory")
    if quadrature == "hermite":
        if field is None or getattr(traj, "t", None) is None:
            raise ValueError("hermite quadrature needs a Trajectory and the vector field")
        dt = np.diff(np.asarray(traj.t, dtype=float))
    out = np.empty((n, len(specs)))
    for col, spec in enumerate(specs):
        if spec.against_index >= x.shape[1]:
            raise DimensionError(
                f"reservoir against x{spec.against_index + 1} in {x.shape[1]}-dim trajectory"
            )
        if quadrature == "trapezoid":
            g = np.array([float(spec.integrand(row)) for row in x])
            inc = 0.5 * (g[:-1] + g[1:]) * np.diff(x[:, spec.against_index])
        else:
            rho = np.array([_rate(spec, field, row) for row in x])
            drho = np.array([_rate_derivative(spec, field, row) for row in x])
            inc = 0.5 * dt * (rho[:-1] + rho[1:]) + dt**2 / 12.0 * (drho[:-1] - drho[1:])
        out[0, col] = spec.initial_value
        out[1:, col] = spec.initial_value + np.cumsum(inc)
    return out


@dataclass(frozen=True)
class KSeries:
    """Effective invariant along a trajectory and its drift."""

    values: np.ndarray
    initial: float
    drift_max: float


def effective_K(inv: EffectiveInvariant, traj, quadrature: str = "trapezoid",
                field: Optional[Callable] = None) -> KSeries:
    """Evaluate ``K(t_k) = potential(x(t_k)) + sum_i w_i(t_k)``.

    ``quadrature`` and ``field`` are passed on to `accumulate`.
    """
    x = _states(traj)
    w = accumulate(inv.reservoirs, traj if quadrature == "hermite" else x, quadrature, field)
    pot = np.array([inv.potential_value(row) for row in x])
    K = pot + w.sum(axis=1)
    return KSeries(values=K, initial=float(K[0]), drift_max=float(np.max(np.abs(K - K[0]))))


def pfaffian_contract(form, s, v) -> float:
    """Contraction ``sum_i K_i(s) v_i`` of a form (or invariant) with a vector."""
    v = np.asarray(v, dtype=float).reshape(-1)
    comps = form.components(s) if isinstance(form, EffectiveInvariant) else form(s)
    if comps.size != v.size:
        raise DimensionError(f"form has {comps.size} components, vector has {v.size}")
    return float(comps @ v)


def k_field(inv: EffectiveInvariant, s) -> np.ndarray:
    """Vector field generated by the Pfaffian ``dK`` through its structure matrix."""
    return inv.structure_matrix() @ inv.components(s)


def reservoir_rate(spec: ReservoirSpec, sys: SystemDef, s) -> float:
    """Time rate of a reservoir, ``g(x) * f_j(x)``."""
    x = as_coords(s)
    return float(spec.integrand(x)) * float(sys(x)[spec.against_index])


def differential_quotient(spec: ReservoirSpec, sys: SystemDef, s) -> float:
    """``(dw/dt) / (dx_j/dt)``: the only sense in which w has an x_j-derivative."""
    x = as_coords(s)
    fj = float(sys(x)[spec.against_index])
    if fj == 0.0:
        return float("nan")
    return reservoir_rate(spec, sys, x) / fj


def canonical_decomposition(sys: SystemDef) -> EffectiveInvariant:
    """Zero-potential decomposition of any planar field.

    Uses reservoirs ``-f_2 dx_1`` and ``f_1 dx_2`` so that ``J dK = f``.
    """
    if sys.dim != 2:
        raise DimensionError(f"canonical decomposition needs dimension 2, got {sys.dim}")
    return EffectiveInvariant(
        dim=2,
        reservoirs=(
            ReservoirSpec(lambda x: -sys(x)[1], 0, name="w1"),
            ReservoirSpec(lambda x: sys(x)[0], 1, name="w2"),
        ),
    )
