"""Skew-gradient representations ``f = B grad H`` and Casimir reduction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from hamform.core import ScalarField, SystemDef, as_coords
from hamform.errors import (
    DegenerateGradientError,
    DimensionError,
    PreconditionError,
    UnsupportedReductionError,
)


@dataclass(frozen=True)
class SkewField:
    """A state-dependent ``d x d`` matrix that should be skew-symmetric."""

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        B = np.asarray(self.eval(as_coords(x)), dtype=float)
        if B.shape != (self.dim, self.dim):
            raise DimensionError(f"matrix has shape {B.shape}, expected {(self.dim, self.dim)}")
        return B

    @classmethod
    def constant(cls, matrix) -> "SkewField":
        M = np.array(matrix, dtype=float)
        M.setflags(write=False)
        return cls(M.shape[0], lambda x: M)


@dataclass(frozen=True)
class CasimirSpec:
    """Eliminate ``x[eliminated_index]`` on the leaf ``casimir(x) == fixed_value``."""

    casimir: ScalarField
    fixed_value: float
    eliminated_index: int


def quispel_capel(
    sys: SystemDef,
    s,
    tol_grad: float = 1e-10,
    first_integral_rtol: Optional[float] = 1e-8,
) -> np.ndarray:
    """Particular skew matrix ``B = (f grad(H)^T - grad(H) f^T) / |grad H|^2``.

    Satisfies ``B grad H = f`` whenever ``grad(H) . f = 0``.

    Args:
        sys: system carrying a ``hamiltonian``.
        s: state.
        tol_grad: gradients with norm at or below this are rejected.
        first_integral_rtol: if set, require ``|grad(H) . f| <= rtol |f| |grad H|``.
            Pass ``None`` to skip the check.

    Raises:
        DegenerateGradientError: if ``|grad H| <= tol_grad``.
        PreconditionError: if H is not a first integral at ``s``.
    """
    if sys.hamiltonian is None:
        raise PreconditionError("quispel_capel needs a system with a hamiltonian")
    x = as_coords(s)
    f = sys(x)
    g = sys.hamiltonian.gradient(x)
    norm = float(np.linalg.norm(g))
    if norm <= tol_grad:
        raise DegenerateGradientError(f"|grad H| = {norm:.3e} <= {tol_grad:.1e}")
    if first_integral_rtol is not None:
        dot = abs(float(g @ f))
        if dot > first_integral_rtol * np.linalg.norm(f) * norm:
            raise PreconditionError(
                f"H is not a first integral here: |grad(H).f| = {dot:.3e}"
            )
    return (np.outer(f, g) - np.outer(g, f)) / norm**2


@dataclass(frozen=True)
class SkewReport:
    """Result of `check_skew`."""

    max_quadratic: float
    max_asymmetry: float
    tol: float

    @property
    def residual(self) -> float:
        return max(self.max_quadratic, self.max_asymmetry)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def check_skew(B: SkewField, samples, n_vectors: int = 10, tol: float = 1e-12, seed: int = 0) -> SkewReport:
    """Measure ``max |v.Bv|`` over random unit ``v`` and ``max |B + B^T|``."""
    rng = np.random.default_rng(seed)
    quad = asym = 0.0
    for s in samples:
        M = B(s)
        # v.Mv only sees the symmetric part; using it directly avoids round-off for exact skew M
        sym = 0.5 * (M + M.T)
        asym = max(asym, float(np.max(np.abs(M + M.T))))
        for _ in range(n_vectors):
            v = rng.standard_normal(M.shape[0])
            v /= np.linalg.norm(v)
            quad = max(quad, abs(float(v @ sym @ v)))
    return SkewReport(quad, asym, tol)


def _matrix_derivatives(B: SkewField, x: np.ndarray, h_fd: float) -> np.ndarray:
    # dB[l] = d B / d x_l by central differences
    d = x.size
    dB = np.empty((d, d, d))
    for l in range(d):
        e = np.zeros(d)
        e[l] = h_fd
        dB[l] = (B(x + e) - B(x - e)) / (2 * h_fd)
    return dB


def check_jacobi(B: SkewField, s, h_fd: float = 1e-5, normalized: bool = False) -> float:
    """Largest Jacobi-identity residual over index triples.

    Evaluates ``sum_l B_li d_l B_jk + B_lj d_l B_ki + B_lk d_l B_ij`` with
    central-difference derivatives. With ``normalized=True`` the residual is
    divided by ``max|B| * max|dB|`` (and is 0 when B is constant).
    """
    if h_fd <= 0:
        raise ValueError("h_fd must be positive")
    x = as_coords(s)
    M = B(x)
    dB = _matrix_derivatives(B, x, h_fd)
    # T[i, j, k] = sum_l M[l, i] dB[l, j, k]
    T = np.einsum("li,ljk->ijk", M, dB)
    cyc = T + np.transpose(T, (1, 2, 0)) + np.transpose(T, (2, 0, 1))
    raw = float(np.max(np.abs(cyc)))
    if not normalized:
        return raw
    scale = float(np.max(np.abs(M))) * float(np.max(np.abs(dB)))
    return 0.0 if scale == 0.0 else raw / scale


def jacobi_residual_triples(B: SkewField, s, h_fd: float = 1e-5) -> dict:
    """Per-triple Jacobi residuals, keyed by ``(i, j, k)`` with ``i < j < k``."""
    x = as_coords(s)
    M = B(x)
    dB = _matrix_derivatives(B, x, h_fd)
    out = {}
    for i, j, k in itertools.combinations(range(x.size), 3):
        out[(i, j, k)] = float(
            sum(
                M[l, i] * dB[l, j, k] + M[l, j] * dB[l, k, i] + M[l, k] * dB[l, i, j]
                for l in range(x.size)
            )
        )
    return out


@dataclass(frozen=True)
class CasimirReport:
    max_residual: float
    tol: float

    @property
    def confirmed(self) -> bool:
        return self.max_residual <= self.tol


def verify_casimir(B: SkewField, C: ScalarField, samples, tol: float = 1e-10) -> CasimirReport:
    """Max ``|B grad C|`` over samples; a Casimir when it stays below ``tol``."""
    worst = 0.0
    for s in samples:
        worst = max(worst, float(np.linalg.norm(B(s) @ C.gradient(s))))
    return CasimirReport(worst, tol)


def _affine_split(spec: CasimirSpec, rest: np.ndarray, dim: int):
    # C(x) = slope * x_k + offset, both evaluated with x_k in {0, 1}
    k = spec.eliminated_index
    x = np.insert(rest, k, 0.0)
    c0 = spec.casimir(x)
    x[k] = 1.0
    c1 = spec.casimir(x)
    return c1 - c0, c0


def casimir_lift(spec: CasimirSpec, y, dim: int) -> np.ndarray:
    """Reinsert the eliminated coordinate so that ``C(x) == fixed_value``."""
    y = as_coords(y)
    slope, offset = _affine_split(spec, y, dim)
    if slope == 0.0:
        raise UnsupportedReductionError("Casimir does not depend on the eliminated coordinate")
    return np.insert(y, spec.eliminated_index, (spec.fixed_value - offset) / slope)


def _check_affine(spec: CasimirSpec, dim: int, seed: int = 0, trials: int = 5):
    rng = np.random.default_rng(seed)
    k = spec.eliminated_index
    for _ in range(trials):
        x = rng.uniform(0.1, 2.0, dim)
        e = np.zeros(dim)
        e[k] = 1.0
        vals = [spec.casimir(x + t * e) for t in (-1.0, 0.0, 1.0)]
        second = vals[0] - 2 * vals[1] + vals[2]
        if abs(second) > 1e-9 * max(1.0, max(abs(v) for v in vals)):
            raise UnsupportedReductionError(
                f"Casimir is not affine in x{k + 1} (second difference {second:.3e})"
            )
        if vals[2] == vals[1]:
            raise UnsupportedReductionError(f"Casimir does not depend on x{k + 1}")


def casimir_reduce(sys: SystemDef, spec: CasimirSpec) -> SystemDef:
    """Restrict ``sys`` to one Casimir leaf by eliminating one coordinate.

    The returned system has dimension ``d - 1``; its field is the original
    field with the eliminated component dropped, evaluated at the lifted
    state. Use `casimir_lift` to map reduced states back.
    """
    d = sys.dim
    if d < 3:
        raise UnsupportedReductionError(f"reduction needs dimension >= 3, got {d}")
    k = spec.eliminated_index
    if not 0 <= k < d:
        raise DimensionError(f"eliminated index {k} out of range for dimension {d}")
    _check_affine(spec, d)
    keep = [i for i in range(d) if i != k]

    def field(y):
        return sys(casimir_lift(spec, y, d))[keep]

    guard = None
    if sys.domain_guard is not None:
        def guard(y):
            return bool(sys.domain_guard(casimir_lift(spec, y, d)))

    return SystemDef(
        dim=d - 1,
        field=field,
        domain_guard=guard,
        name=f"{sys.name}|leaf" if sys.name else "leaf",
    )
