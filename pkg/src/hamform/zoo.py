"""Built-in example systems with their effective-invariant decompositions.

Every entry carries a field, an `EffectiveInvariant` whose Pfaffian
components reproduce the field through a constant structure matrix, and
where available a skew matrix ``B`` with a first integral ``H``.

Two decompositions differ from the commonly printed forms:

* Van der Pol: the reservoir integrand is ``-eps (1 - x^2) p`` (against x).
  With the ``x' = K_p, p' = -K_x`` convention this sign is forced; the
  positive sign does not keep K constant.
* Brusselator: the exact part is ``a y - b x^2 / 2``. Only this choice
  makes ``dK(f) = 0`` hold with the reservoirs ``x^2 y dx`` and
  ``(x^2 y - b x - x) dy``.

Holling type 2 and 3 responses use ``u / (1 + u)`` and ``u^2 / (1 + u^2)``
(unit half-saturation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from hamform.core import Orthant, PhaseState, ScalarField, SystemDef, as_coords, canonical_matrix
from hamform.errors import ConfigurationError, DomainError
from hamform.reservoir import EffectiveInvariant, PfaffianForm, ReservoirSpec
from hamform.skew import SkewField

J2 = canonical_matrix(2)
ROBERTSON_STRUCTURE = np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]])


@dataclass(frozen=True)
class Param:
    default: float
    low: float = -math.inf
    high: float = math.inf
    low_open: bool = False
    choices: Optional[tuple] = None

    def validate(self, name, value):
        if self.choices is not None:
            if value not in self.choices:
                raise ConfigurationError(f"{name} must be one of {self.choices}, got {value!r}")
            return value
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{name} must be a number, got {value!r}") from None
        if math.isnan(value):
            raise ConfigurationError(f"{name} is NaN")
        too_low = value <= self.low if self.low_open else value < self.low
        if too_low or value > self.high:
            lo = "(" if self.low_open else "["
            raise ConfigurationError(
                f"{name}={value} outside admissible range {lo}{self.low}, {self.high}]"
            )
        return value


@dataclass(frozen=True)
class ZooEntry:
    """A fully wired example system.

    Attributes:
        name: registry name.
        params: resolved parameter values.
        system: the vector field with guard, divergence and optional ``(B, H)``.
        invariant: decomposition of K into potential part and reservoirs.
        description: short human-readable label.
        box: ``(low, high)`` corners of the region used for random sampling.
        default_state: a representative initial condition.
        casimirs: ``(structure, casimir)`` pairs that should satisfy ``S grad C = 0``.
        jacobi_expected: whether ``system.skew`` should satisfy the Jacobi
            identity (``None`` when there is no skew matrix).
    """

    name: str
    params: dict
    system: SystemDef
    invariant: EffectiveInvariant
    description: str
    box: tuple
    default_state: np.ndarray
    casimirs: tuple = ()
    jacobi_expected: Optional[bool] = None

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def skew(self) -> Optional[SkewField]:
        if self.system.skew is None:
            return None
        return SkewField(self.dim, self.system.skew)

    @property
    def hamiltonian(self) -> Optional[ScalarField]:
        return self.system.hamiltonian

    @property
    def structure(self) -> SkewField:
        return SkewField.constant(self.invariant.structure_matrix())

    def samples(self, n: int, seed: int = 0) -> np.ndarray:
        """``n`` random valid states drawn uniformly from ``box``."""
        rng = np.random.default_rng(seed)
        lo, hi = (np.asarray(b, dtype=float) for b in self.box)
        out = []
        while len(out) < n:
            x = rng.uniform(lo, hi)
            if self.system.accepts(x):
                out.append(x)
        return np.array(out).reshape(n, self.dim)


def _total_mass():
    return ScalarField(lambda x: float(np.sum(x)), lambda x: np.ones_like(x))


def _energy():
    return ScalarField(lambda x: 0.5 * float(x @ x), lambda x: np.array(x, dtype=float))


def _conservative_extras(conservative):
    if not conservative:
        return {}
    return {"hamiltonian": _energy(), "skew": lambda x: J2}


def damped_oscillator(b=0.1):
    def f(x):
        return np.array([x[1], -x[0] - b * x[1]])

    inv = EffectiveInvariant(
        2, _energy(), (ReservoirSpec(lambda x: b * x[1], 0, name="w"),)
    )
    sys = SystemDef(2, f, pfaffian=inv, divergence=lambda x: -b, name="damped_oscillator",
                    **_conservative_extras(b == 0))
    return dict(system=sys, invariant=inv, description="linearly damped harmonic oscillator",
                box=([-2, -2], [2, 2]), default_state=[1.0, 0.0],
                jacobi_expected=True if b == 0 else None)


def two_reservoir(d=0.1, e=0.1, gamma=0.05):
    # D(x, p) = d + gamma p acts on p, E(x, p) = e on x, V(x) = x^2 / 2
    def f(x):
        return np.array([x[1] + e, -x[0] - (d + gamma * x[1])])

    inv = EffectiveInvariant(
        2,
        _energy(),
        (
            ReservoirSpec(lambda x: d + gamma * x[1], 0, name="w"),
            ReservoirSpec(lambda x: e, 1, name="z"),
        ),
    )
    sys = SystemDef(2, f, pfaffian=inv, divergence=lambda x: -gamma, name="two_reservoir")
    return dict(system=sys, invariant=inv, description="oscillator with reservoirs on x and p",
                box=([-2, -2], [2, 2]), default_state=[1.0, 0.0])


def vdp(eps=0.5):
    def f(x):
        return np.array([x[1], -x[0] + eps * (1 - x[0] ** 2) * x[1]])

    inv = EffectiveInvariant(
        2, _energy(), (ReservoirSpec(lambda x: -eps * (1 - x[0] ** 2) * x[1], 0, name="w"),)
    )
    sys = SystemDef(2, f, pfaffian=inv, divergence=lambda x: eps * (1 - x[0] ** 2), name="vdp",
                    **_conservative_extras(eps == 0))
    return dict(system=sys, invariant=inv, description="Van der Pol oscillator",
                box=([-2.5, -3], [2.5, 3]), default_state=[2.0, 0.0],
                jacobi_expected=True if eps == 0 else None)


def brusselator(a=1.0, b=3.0):
    def f(x):
        u, v = x
        return np.array([a + u * u * v - b * u - u, b * u - u * u * v])

    potential = ScalarField(lambda x: a * x[1] - 0.5 * b * x[0] ** 2,
                            lambda x: np.array([-b * x[0], a]))
    inv = EffectiveInvariant(
        2,
        potential,
        (
            ReservoirSpec(lambda x: x[0] ** 2 * x[1], 0, name="w"),
            ReservoirSpec(lambda x: x[0] ** 2 * x[1] - b * x[0] - x[0], 1, name="z"),
        ),
    )
    sys = SystemDef(2, f, pfaffian=inv, domain_guard=Orthant(strict=True),
                    divergence=lambda x: 2 * x[0] * x[1] - b - 1 - x[0] ** 2, name="brusselator")
    return dict(system=sys, invariant=inv, description="Brusselator with abundant A, B",
                box=([0.1, 0.1], [4.0, 4.0]), default_state=[1.0, 1.0])


def lv_resource(alpha=1.0, beta=1.0) -> ScalarField:
    """Resource function ``beta ln u + ln v - u - alpha v`` on the positive quadrant."""
    return ScalarField(
        lambda x: beta * math.log(x[0]) + math.log(x[1]) - x[0] - alpha * x[1],
        lambda x: np.array([beta / x[0] - 1.0, 1.0 / x[1] - alpha]),
    )


def lv_skew(x) -> np.ndarray:
    uv = x[0] * x[1]
    return np.array([[0.0, uv], [-uv, 0.0]])


def lv(alpha=1.0, beta=1.0):
    def f(x):
        u, v = x
        return np.array([u - alpha * u * v, -beta * v + u * v])

    inv = EffectiveInvariant(
        2,
        None,
        (
            ReservoirSpec(lambda x: x[1] * (beta - x[0]), 0, name="w_u"),
            ReservoirSpec(lambda x: x[0] * (1 - alpha * x[1]), 1, name="w_v"),
        ),
    )
    sys = SystemDef(2, f, hamiltonian=lv_resource(alpha, beta), skew=lv_skew, pfaffian=inv,
                    domain_guard=Orthant(strict=True),
                    divergence=lambda x: 1 - beta - alpha * x[1] + x[0], name="lv")
    return dict(system=sys, invariant=inv, description="Lotka-Volterra, Poisson form",
                box=([0.2, 0.2], [3.0, 3.0]), default_state=[2.0, 1.0], jacobi_expected=True)


def lv_canonical_resource(alpha=1.0, beta=1.0) -> ScalarField:
    """``p - alpha e^p + beta q - e^q`` in log coordinates."""
    return ScalarField(
        lambda x: x[1] - alpha * math.exp(x[1]) + beta * x[0] - math.exp(x[0]),
        lambda x: np.array([beta - math.exp(x[0]), 1.0 - alpha * math.exp(x[1])]),
    )


def lv_canonical(alpha=1.0, beta=1.0):
    M = lv_canonical_resource(alpha, beta)

    def f(x):
        return np.array([1.0 - alpha * math.exp(x[1]), -beta + math.exp(x[0])])

    inv = EffectiveInvariant(2, M)
    sys = SystemDef(2, f, hamiltonian=M, skew=lambda x: J2, pfaffian=inv,
                    divergence=lambda x: 0.0, name="lv_canonical")
    return dict(system=sys, invariant=inv, description="Lotka-Volterra in log coordinates",
                box=([-1.0, -1.0], [1.0, 1.0]), default_state=[math.log(2.0), 0.0],
                jacobi_expected=True)


def robertson_mass_action_skew(a=1.0, b=1.0, c=1.0) -> Callable:
    """Skew matrix with ``B(1, 1, 1)^T`` equal to the Robertson field."""
    def B(x):
        u, v, w = x
        p = c * v * w + b * v * v
        q = a * u + b * v * v
        r = a * u
        return np.array([[0.0, p, -q], [-p, 0.0, r], [q, -r, 0.0]])

    return B


def robertson_field(a=1.0, b=1.0, c=1.0):
    def f(x):
        u, v, w = x
        return np.array([-a * u + c * v * w, a * u - b * v * v - c * v * w, b * v * v])

    return f


def robertson(a=1.0, b=1.0, c=1.0):
    potential = ScalarField(
        lambda x: -0.5 * a * x[0] ** 2 - b * x[1] ** 3 / 3.0,
        lambda x: np.array([-a * x[0], -b * x[1] ** 2, 0.0]),
    )
    inv = EffectiveInvariant(
        3,
        potential,
        (
            ReservoirSpec(lambda x: -a * x[0], 1, name="w"),
            ReservoirSpec(lambda x: -(b * x[1] ** 2 + c * x[1] * x[2]), 2, name="z"),
        ),
        structure=ROBERTSON_STRUCTURE,
    )
    mass = _total_mass()
    sys = SystemDef(3, robertson_field(a, b, c), hamiltonian=mass,
                    skew=robertson_mass_action_skew(a, b, c), pfaffian=inv,
                    domain_guard=Orthant(strict=False),
                    divergence=lambda x: -a - 2 * b * x[1] - c * x[2], name="robertson")
    return dict(system=sys, invariant=inv, description="Robertson autocatalytic network",
                box=([0.05] * 3, [2.0] * 3), default_state=[1.0, 0.0, 0.0],
                casimirs=((SkewField.constant(ROBERTSON_STRUCTURE), mass),),
                jacobi_expected=False)


class _LeafGuard:
    def __init__(self, m0):
        self.m0 = m0

    def violation(self, x):
        if x[0] < 0:
            return 0
        if x[1] < 0:
            return 1
        return None

    def __call__(self, x):
        return self.violation(x) is None and x[0] + x[1] <= self.m0


def robertson_reduced(a=1.0, b=1.0, c=1.0, m0=1.0):
    mu = a * m0

    def f(x):
        y, z = x
        return np.array([mu - a * y - a * z - b * y * y - c * y * z, b * y * y])

    potential = ScalarField(
        lambda x: -mu * x[1] + 0.5 * a * x[1] ** 2 + b * x[0] ** 3 / 3.0,
        lambda x: np.array([b * x[0] ** 2, -mu + a * x[1]]),
    )
    inv = EffectiveInvariant(
        2,
        potential,
        (ReservoirSpec(lambda x: a * x[0] + b * x[0] ** 2 + c * x[0] * x[1], 1, name="w"),),
        structure=-J2,
    )
    sys = SystemDef(2, f, pfaffian=inv, domain_guard=_LeafGuard(m0),
                    divergence=lambda x: -a - 2 * b * x[0] - c * x[1], name="robertson_reduced")
    return dict(system=sys, invariant=inv,
                description="Robertson network on the leaf x + y + z = m0",
                box=([0.05 * m0] * 2, [0.45 * m0] * 2), default_state=[0.5 * m0, 0.25 * m0])


HOLLING = {
    1: (lambda u: u, lambda u: 1.0),
    2: (lambda u: u / (1.0 + u), lambda u: 1.0 / (1.0 + u) ** 2),
    3: (lambda u: u * u / (1.0 + u * u), lambda u: 2.0 * u / (1.0 + u * u) ** 2),
}


def holling_response(kind: int) -> Callable[[float], float]:
    """Functional response ``h(u)`` of Holling type 1, 2 or 3."""
    if kind not in HOLLING:
        raise ConfigurationError(f"Holling type must be 1, 2 or 3, got {kind!r}")
    return HOLLING[kind][0]


def _rosenzweig(r=1.0, capacity=10.0, alpha=1.0, beta=1.0, holling=1):
    resp, dresp = HOLLING[holling]

    def prey(x):
        u, v = x
        return r * u * (1.0 - u / capacity) - v * resp(u)

    def f(x):
        return np.array([prey(x), x[1] * (-beta + alpha * resp(x[0]))])

    inv = EffectiveInvariant(
        2,
        None,
        (
            ReservoirSpec(lambda x: x[1] * (beta - alpha * resp(x[0])), 0, name="w_u"),
            ReservoirSpec(prey, 1, name="w_v"),
        ),
    )

    def div(x):
        u, v = x
        return r * (1.0 - 2.0 * u / capacity) - v * dresp(u) - beta + alpha * resp(u)

    sys = SystemDef(2, f, pfaffian=inv, domain_guard=Orthant(strict=True), divergence=div,
                    name="rosenzweig")
    return dict(system=sys, invariant=inv,
                description=f"Rosenzweig-MacArthur, Holling type {holling}",
                box=([0.1, 0.1], [3.0, 3.0]), default_state=[1.0, 0.5])


POS = dict(low=0.0, low_open=True)
SCHEMAS: Dict[str, Dict[str, Param]] = {
    "damped_oscillator": {"b": Param(0.1, low=0.0)},
    "two_reservoir": {"d": Param(0.1), "e": Param(0.1), "gamma": Param(0.05, low=0.0)},
    "vdp": {"eps": Param(0.5, low=0.0)},
    "brusselator": {"a": Param(1.0, **POS), "b": Param(3.0, **POS)},
    "lv": {"alpha": Param(1.0, **POS), "beta": Param(1.0, **POS)},
    "lv_canonical": {"alpha": Param(1.0, **POS), "beta": Param(1.0, **POS)},
    "robertson": {"a": Param(1.0, **POS), "b": Param(1.0, **POS), "c": Param(1.0, **POS)},
    "robertson_reduced": {
        "a": Param(1.0, **POS), "b": Param(1.0, **POS), "c": Param(1.0, **POS),
        "m0": Param(1.0, **POS),
    },
    "rosenzweig": {
        "r": Param(1.0, **POS), "capacity": Param(10.0, **POS),
        "alpha": Param(1.0, **POS), "beta": Param(1.0, **POS),
        "holling": Param(1, choices=(1, 2, 3)),
    },
}

FACTORIES = {
    "damped_oscillator": damped_oscillator,
    "two_reservoir": two_reservoir,
    "vdp": vdp,
    "brusselator": brusselator,
    "lv": lv,
    "lv_canonical": lv_canonical,
    "robertson": robertson,
    "robertson_reduced": robertson_reduced,
    "rosenzweig": _rosenzweig,
}

NAMES = tuple(FACTORIES)


def resolve_params(name: str, params: Optional[dict] = None) -> dict:
    """Fill defaults and validate ranges; unknown keys are rejected."""
    if name not in SCHEMAS:
        raise ConfigurationError(f"unknown system {name!r}; known: {', '.join(NAMES)}")
    schema = SCHEMAS[name]
    params = dict(params or {})
    unknown = set(params) - set(schema)
    if unknown:
        raise ConfigurationError(f"unknown parameter(s) for {name}: {sorted(unknown)}")
    return {k: spec.validate(k, params.get(k, spec.default)) for k, spec in schema.items()}


def build(name: str, params: Optional[dict] = None, **kwargs) -> ZooEntry:
    """Build a zoo entry by name.

    >>> build("vdp", eps=0.5).system([0.0, 1.0])
    array([0., 1.])
    """
    merged = dict(params or {})
    merged.update(kwargs)
    resolved = resolve_params(name, merged)
    parts = FACTORIES[name](**resolved)
    parts["box"] = tuple(np.asarray(b, dtype=float) for b in parts["box"])
    parts["default_state"] = np.asarray(parts["default_state"], dtype=float)
    return ZooEntry(name=name, params=resolved, **parts)


def rosenzweig(params: Optional[dict] = None, holling: int = 1) -> ZooEntry:
    """Rosenzweig-MacArthur predator-prey entry with a Holling response.

    ``capacity`` may be ``inf``, in which case the logistic term drops out
    and type 1 reduces to Lotka-Volterra.
    """
    merged = dict(params or {})
    merged["holling"] = holling
    return build("rosenzweig", merged)


def _map(s, fun):
    if isinstance(s, PhaseState):
        return PhaseState(s.t, fun(s.x))
    return fun(as_coords(s))


def lv_log_transform(s):
    """``(u, v) -> (ln u, ln v)``; keeps the time stamp of a `PhaseState`."""
    def fwd(x):
        if np.any(x <= 0):
            bad = int(np.flatnonzero(x <= 0)[0])
            raise DomainError(f"log transform needs positive concentrations, x{bad + 1} = {x[bad]}",
                              component=bad, state=x)
        return np.log(x)

    return _map(s, fwd)


def lv_exp_transform(s):
    """Inverse of `lv_log_transform`: ``(q, p) -> (e^q, e^p)``."""
    return _map(s, np.exp)


def lv_pfaffian_K(alpha=1.0, beta=1.0) -> PfaffianForm:
    """``dK = v (beta - u) du + u (1 - alpha v) dv`` for the Poisson LV system."""
    return PfaffianForm(
        2,
        (lambda x: x[1] * (beta - x[0]), lambda x: x[0] * (1.0 - alpha * x[1])),
    )


def lv_pushforward(alpha=1.0, beta=1.0) -> Callable:
    """The Poisson LV field written in log coordinates, ``(u'/u, v'/v)``."""
    f = lv(alpha, beta)["system"]

    def g(q):
        x = np.exp(as_coords(q))
        return f(x) / x

    return g
