"""Phase-space primitives: states, scalar fields, system definitions.

Coordinates are stored as one flat vector. For canonical systems of
dimension ``2n`` the first ``n`` entries are positions and the last ``n``
are the conjugate momenta.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from hamform.errors import DimensionError, DomainError

if TYPE_CHECKING:
    from hamform.reservoir import EffectiveInvariant

Vector = np.ndarray
Matrix = np.ndarray


@dataclass(frozen=True)
class PhaseState:
    """A time-stamped point in phase space."""

    t: float
    x: Vector

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if x.size < 1:
            raise DimensionError("phase state needs at least one coordinate")
        if not np.all(np.isfinite(x)):
            raise DomainError("phase state has non-finite coordinates", state=x)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return self.x.size


def as_coords(s) -> Vector:
    """Return the coordinate vector of a `PhaseState` or array-like."""
    if isinstance(s, PhaseState):
        return s.x
    return np.asarray(s, dtype=float).reshape(-1)


def fd_gradient(fun: Callable[[Vector], float], x, rel_step: float = 1e-5) -> Vector:
    """Fourth-order central-difference gradient.

    The step for coordinate ``i`` is ``rel_step * (1 + |x_i|)``.
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (
            -fun(x + 2 * e) + 8 * fun(x + e) - 8 * fun(x - e) + fun(x - 2 * e)
        ) / (12 * h)
    return grad


def fd_jacobian(field: Callable[[Vector], Vector], x, h: float) -> Matrix:
    """Second-order central-difference Jacobian ``J[i, j] = d f_i / d x_j``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(field(x + e)) - np.asarray(field(x - e))) / (2 * h))
    return np.column_stack(cols)


@dataclass(frozen=True)
class ScalarField:
    """A real function on phase space with an optional analytic gradient.

    When ``grad`` is absent, `gradient` falls back to fourth-order central
    differences.
    """

    eval: Callable[[Vector], float]
    grad: Optional[Callable[[Vector], Vector]] = None

    def __call__(self, x) -> float:
        return float(self.eval(as_coords(x)))

    def gradient(self, x) -> Vector:
        x = as_coords(x)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return fd_gradient(self.eval, x)


class Orthant:
    """Domain guard accepting states whose coordinates are positive.

    Args:
        strict: require ``x_i > 0``; otherwise ``x_i >= 0``.
        indices: coordinates to constrain (all when ``None``).
    """

    def __init__(self, strict: bool = True, indices=None):
        self.strict = strict
        self.indices = None if indices is None else tuple(indices)

    def violation(self, x) -> Optional[int]:
        """Index of the first offending coordinate, or ``None``."""
        x = np.asarray(x)
        idx = range(x.size) if self.indices is None else self.indices
        for i in idx:
            if (x[i] <= 0) if self.strict else (x[i] < 0):
                return i
        return None

    def __call__(self, x) -> bool:
        return self.violation(x) is None

    def __repr__(self):
        return f"Orthant(strict={self.strict}, indices={self.indices})"


@dataclass(frozen=True)
class SystemDef:
    """An autonomous vector field ``x' = f(x)`` with optional structure.

    Attributes:
        dim: phase-space dimension.
        field: the right-hand side ``f``.
        hamiltonian: a first integral ``H`` (or resource function).
        skew: state-dependent skew matrix ``B`` with ``f = B grad H``.
        pfaffian: the effective-invariant decomposition of the field.
        domain_guard: predicate marking valid states; ``None`` means all of R^d.
        divergence: analytic divergence of ``f``.
        name: free-form label.
    """

    dim: int
    field: Callable[[Vector], Vector]
    hamiltonian: Optional[ScalarField] = None
    skew: Optional[Callable[[Vector], Matrix]] = None
    pfaffian: Optional["EffectiveInvariant"] = None
    domain_guard: Optional[Callable[[Vector], bool]] = None
    divergence: Optional[Callable[[Vector], float]] = None
    name: str = ""

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DimensionError(f"dimension must be positive, got {self.dim}")

    def __call__(self, x) -> Vector:
        return np.asarray(self.field(as_coords(x)), dtype=float)

    def accepts(self, x) -> bool:
        x = as_coords(x)
        if not np.all(np.isfinite(x)):
            return False
        return self.domain_guard is None or bool(self.domain_guard(x))

    def require(self, x) -> Vector:
        """Return ``x`` as coordinates or raise `DomainError` if it is invalid."""
        x = as_coords(x)
        if x.size != self.dim:
            raise DimensionError(f"state has {x.size} coordinates, system has {self.dim}")
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise DomainError(f"non-finite coordinate x{bad + 1}", component=bad, state=x)
        if self.domain_guard is not None and not self.domain_guard(x):
            comp = None
            if hasattr(self.domain_guard, "violation"):
                comp = self.domain_guard.violation(x)
            where = "" if comp is None else f" at coordinate x{comp + 1} = {float(x[comp])!r}"
            raise DomainError(f"state left the domain{where}", component=comp, state=x)
        return x

    def replace(self, **changes) -> "SystemDef":
        return dataclasses.replace(self, **changes)


def canonical_matrix(dim: int) -> Matrix:
    """The canonical symplectic matrix ``[[0, I], [-I, 0]]``."""
    if dim % 2:
        raise DimensionError(f"canonical structure needs even dimension, got {dim}")
    n = dim // 2
    J = np.zeros((dim, dim))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def _even_dim(x):
    if x.size % 2:
        raise DimensionError(f"canonical operation needs even dimension, got {x.size}")
    return x.size // 2


def poisson_bracket(f: ScalarField, g: ScalarField, s) -> float:
    """Canonical bracket ``{f, g} = sum_i df/dx_i dg/dp_i - df/dp_i dg/dx_i``."""
    x = as_coords(s)
    n = _even_dim(x)
    df, dg = f.gradient(x), g.gradient(x)
    return float(df[:n] @ dg[n:] - df[n:] @ dg[:n])


def hamiltonian_field(H: ScalarField, s) -> Vector:
    """Canonical Hamiltonian vector field ``(dH/dp, -dH/dx)``."""
    x = as_coords(s)
    n = _even_dim(x)
    dH = H.gradient(x)
    return np.concatenate([dH[n:], -dH[:n]])


def hamiltonian_system(H: ScalarField, dim: int, **kwargs) -> SystemDef:
    """Wrap a Hamiltonian into a canonical `SystemDef` carrying ``J`` and ``H``."""
    J = canonical_matrix(dim)
    return SystemDef(
        dim=dim,
        field=lambda x: hamiltonian_field(H, x),
        hamiltonian=H,
        skew=lambda x: J,
        **kwargs,
    )


def divergence(sys: SystemDef, s, h_fd: float = 1e-5) -> float:
    """Divergence of ``sys.field`` at ``s``.

    Uses ``sys.divergence`` when present, otherwise second-order central
    differences with step ``h_fd``. Every stencil point must lie inside the
    domain, so states on the domain boundary raise `DomainError`.
    """
    if h_fd <= 0:
        raise ValueError("h_fd must be positive")
    x = sys.require(s)
    if sys.divergence is not None:
        return float(sys.divergence(x))
    total = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h_fd
        hi, lo = x + e, x - e
        if not (sys.accepts(hi) and sys.accepts(lo)):
            raise DomainError(
                f"state too close to the domain boundary in x{i + 1}", component=i, state=x
            )
        total += (sys(hi)[i] - sys(lo)[i]) / (2 * h_fd)
    return float(total)


def skew_gradient_residual(sys: SystemDef, samples) -> float:
    """Max relative residual ``|f - B grad H| / max(|f|, 1)`` over samples."""
    if sys.skew is None or sys.hamiltonian is None:
        raise ValueError("system carries no (skew, hamiltonian) pair")
    worst = 0.0
    for s in samples:
        x = as_coords(s)
        f = sys(x)
        r = f - np.asarray(sys.skew(x)) @ sys.hamiltonian.gradient(x)
        worst = max(worst, float(np.linalg.norm(r) / max(np.linalg.norm(f), 1.0)))
    return worst
