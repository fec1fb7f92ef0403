"""Reaction-network DSL, mass-action compilation and linear conservation laws.

Grammar (one reaction per line, or separated by ``;``)::

    reaction := side ARROW side '[' rate ']'
    side     := '0' | term ('+' term)*
    term     := [INTEGER] SPECIES
    rate     := NUMBER | NAME | NAME '=' NUMBER
    ARROW    := '->' | '→'

``#`` starts a comment. Named rates without a value are looked up in the
``params`` mapping given to `parse_network`. Species are ordered by first
appearance. External (abundant) species are folded into rate constants,
e.g. ``0 -> X [a]``.

Example::

    >>> net = parse_network("X -> Y [0.04]")
    >>> net.species
    ('X', 'Y')
    >>> stoichiometric_matrix(net).T.tolist()
    [[-1, 1]]
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from hamform.core import Orthant, SystemDef
from hamform.errors import NetworkSyntaxError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<arrow>->|→)
  | (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<plus>\+)
  | (?P<lbr>\[)
  | (?P<rbr>\])
  | (?P<eq>=)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Reaction:
    """One reaction; sides are ``(species, coefficient)`` pairs in source order."""

    reactants: Tuple[Tuple[str, int], ...]
    products: Tuple[Tuple[str, int], ...]
    rate: float
    label: Optional[str] = None

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate constant must be positive and finite, got {self.rate}")
        for _, m in self.reactants + self.products:
            if int(m) != m or m < 0:
                raise ValueError(f"stoichiometric coefficient must be a non-negative integer, got {m}")


@dataclass(frozen=True)
class ReactionNetwork:
    species: Tuple[str, ...]
    reactions: Tuple[Reaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        if len(set(self.species)) != len(self.species):
            raise ValueError(f"species names must be unique: {self.species}")
        known = set(self.species)
        for r in self.reactions:
            for name, _ in r.reactants + r.products:
                if name not in known:
                    raise ValueError(f"reaction uses undeclared species {name!r}")

    def _side_matrix(self, attr) -> np.ndarray:
        idx = {s: i for i, s in enumerate(self.species)}
        M = np.zeros((len(self.species), len(self.reactions)), dtype=int)
        for k, r in enumerate(self.reactions):
            for name, m in getattr(r, attr):
                M[idx[name], k] += m
        return M

    @property
    def reactant_matrix(self) -> np.ndarray:
        return self._side_matrix("reactants")

    @property
    def product_matrix(self) -> np.ndarray:
        return self._side_matrix("products")

    @property
    def rates(self) -> np.ndarray:
        return np.array([r.rate for r in self.reactions], dtype=float)


def stoichiometric_matrix(net: ReactionNetwork) -> np.ndarray:
    """Integer matrix ``N = products - reactants`` (species x reactions)."""
    return net.product_matrix - net.reactant_matrix


class _Tokens:
    def __init__(self, text, line, col0):
        self.items = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise NetworkSyntaxError(f"unexpected character {text[pos]!r}", line,
                                         col0 + pos + 1, len(self.items) + 1)
            if m.lastgroup != "ws":
                self.items.append((m.lastgroup, m.group(), col0 + pos + 1))
            pos = m.end()
        self.i = 0
        self.line = line
        self.end_col = col0 + len(text) + 1

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else ("eol", "", self.end_col)

    def take(self, kind=None, what=None):
        tok = self.peek()
        if kind is not None and tok[0] != kind:
            self.fail(f"expected {what or kind}, found {tok[1]!r}" if tok[0] != "eol"
                      else f"expected {what or kind} before end of reaction")
        self.i += 1
        return tok

    def fail(self, message):
        tok = self.peek()
        raise NetworkSyntaxError(message, self.line, tok[2], self.i + 1)


def _parse_side(toks: _Tokens) -> List[Tuple[str, int]]:
    kind, text, _ = toks.peek()
    if kind == "number" and text == "0":
        nxt = toks.items[toks.i + 1][0] if toks.i + 1 < len(toks.items) else "eol"
        if nxt != "name":
            toks.take()
            return []
    terms = []
    while True:
        coef = 1
        if toks.peek()[0] == "number":
            raw = toks.peek()[1]
            if not raw.isdigit() or int(raw) < 1:
                toks.fail(f"stoichiometric coefficient must be a positive integer, found {raw!r}")
            coef = int(raw)
            toks.take()
        _, name, _ = toks.take("name", "species name")
        terms.append((name, coef))
        if toks.peek()[0] != "plus":
            return terms
        toks.take()


def _merge(terms, line):
    merged: Dict[str, int] = {}
    for name, m in terms:
        if name in merged:
            warnings.warn(f"line {line}: species {name} repeated on one side; "
                          f"coefficients summed", UserWarning, stacklevel=4)
        merged[name] = merged.get(name, 0) + m
    return tuple(merged.items())


def _parse_rate(toks: _Tokens, params: Mapping[str, float]):
    toks.take("lbr", "'[' opening the rate constant")
    kind, text, _ = toks.peek()
    label = None
    if kind == "name":
        label = text
        toks.take()
        if toks.peek()[0] == "eq":
            toks.take()
            value = float(toks.take("number", "rate value")[1])
        elif label in params:
            value = float(params[label])
        else:
            toks.i -= 1
            toks.fail(f"rate {label!r} has no value; give [{label}=value] or pass params")
    elif kind == "number":
        value = float(text)
        toks.take()
    else:
        toks.fail("expected a rate constant")
    if not value > 0:
        toks.i -= 1
        toks.fail(f"rate constant must be positive, got {value}")
    toks.take("rbr", "']' closing the rate constant")
    return value, label


def _statements(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        col = 0
        for part in body.split(";"):
            if part.strip():
                yield lineno, col, part
            col += len(part) + 1


def parse_network(text: str, params: Optional[Mapping[str, float]] = None) -> ReactionNetwork:
    """Parse reaction DSL text.

    Raises:
        NetworkSyntaxError: with line, column and 1-based token index.
    """
    params = dict(params or {})
    species: List[str] = []
    reactions: List[Reaction] = []
    for lineno, col0, part in _statements(text):
        toks = _Tokens(part, lineno, col0)
        lhs = _parse_side(toks)
        toks.take("arrow", "'->'")
        rhs = _parse_side(toks)
        rate, label = _parse_rate(toks, params)
        if toks.peek()[0] != "eol":
            toks.fail(f"unexpected {toks.peek()[1]!r} after the rate constant")
        lhs, rhs = _merge(lhs, lineno), _merge(rhs, lineno)
        for name, _ in lhs + rhs:
            if name not in species:
                species.append(name)
        reactions.append(Reaction(lhs, rhs, rate, label))
    return ReactionNetwork(tuple(species), tuple(reactions))


def _format_side(side) -> str:
    if not side:
        return "0"
    return " + ".join(name if m == 1 else f"{m} {name}" for name, m in side)


def serialize_network(net: ReactionNetwork) -> str:
    """Inverse of `parse_network`; floats are written with ``repr`` for exact round trips."""
    lines = []
    for r in net.reactions:
        rate = repr(r.rate) if r.label is None else f"{r.label}={r.rate!r}"
        lines.append(f"{_format_side(r.reactants)} -> {_format_side(r.products)} [{rate}]")
    return "\n".join(lines) + ("\n" if lines else "")


def mass_action_odes(net: ReactionNetwork) -> SystemDef:
    """Compile ``x' = N r(x)`` with ``r_k = k_k prod_i x_i^{m_ik}``.

    The domain is the closed non-negative orthant.
    """
    M = net.reactant_matrix.astype(float)
    N = stoichiometric_matrix(net).astype(float)
    k = net.rates

    def field(x):
        x = np.asarray(x, dtype=float)
        r = k * np.prod(x[:, None] ** M, axis=0)
        return N @ r

    return SystemDef(dim=len(net.species), field=field, domain_guard=Orthant(strict=False),
                     name="mass_action")


def reaction_rates(net: ReactionNetwork, x) -> np.ndarray:
    """Mass-action rate vector ``r(x)``."""
    x = np.asarray(x, dtype=float)
    return net.rates * np.prod(x[:, None] ** net.reactant_matrix, axis=0)


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _monomial(net, k) -> str:
    parts = []
    col = net.reactant_matrix[:, k]
    for name, m in zip(net.species, col):
        if m == 1:
            parts.append(name)
        elif m > 1:
            parts.append(f"{name}^{m}")
    return "*".join(parts)


def ode_strings(net: ReactionNetwork) -> List[str]:
    """Right-hand sides as polynomial strings, terms in reaction order.

    Named rates are printed by name; reactions sharing a rate and monomial
    are merged. ``2X + Y -> 3X [1]`` contributes ``X^2*Y`` to ``X'``.
    """
    N = stoichiometric_matrix(net)
    out = []
    for i in range(len(net.species)):
        terms: Dict[Tuple[str, str], float] = {}
        for k, r in enumerate(net.reactions):
            if N[i, k] == 0:
                continue
            if r.label is not None:
                key, mult = (r.label, _monomial(net, k)), float(N[i, k])
            else:
                key, mult = ("", _monomial(net, k)), float(N[i, k]) * r.rate
            terms[key] = terms.get(key, 0.0) + mult
        pieces = []
        for (label, mono), c in terms.items():
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            factors = []
            if label:
                if mag != 1:
                    factors.append(_fmt_number(mag))
                factors.append(label)
            elif mag != 1 or not mono:
                factors.append(_fmt_number(mag))
            if mono:
                factors.append(mono)
            pieces.append((sign, "*".join(factors)))
        if not pieces:
            out.append("0")
            continue
        text = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        out.append(text)
    return out


def _rational_nullspace(A: Sequence[Sequence[int]], ncols: int) -> List[List[Fraction]]:
    """Basis of ``{c : A c = 0}`` by exact Gauss-Jordan elimination."""
    rows = [[Fraction(v) for v in row] for row in A]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [v / p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


def _primitive(v: List[Fraction]) -> List[int]:
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(math.gcd, (abs(i) for i in ints), 0) or 1
    ints = [i // g for i in ints]
    first = next((i for i in ints if i != 0), 0)
    return [-i for i in ints] if first < 0 else ints


def linear_invariants(net: ReactionNetwork) -> np.ndarray:
    """Primitive integer basis of the left null space of ``N`` (rows ``c`` with ``c^T N = 0``)."""
    n = len(net.species)
    N = stoichiometric_matrix(net)
    if n == 0:
        return np.zeros((0, 0), dtype=int)
    basis = _rational_nullspace(N.T.tolist(), n)
    if not basis:
        return np.zeros((0, n), dtype=int)
    return np.array([_primitive(v) for v in basis], dtype=int)


def format_linear(c, names: Sequence[str]) -> str:
    """``[1, 1, 1], ('x', 'y', 'z') -> 'x + y + z'``."""
    pieces = []
    for coef, name in zip(c, names):
        if coef == 0:
            continue
        mag = abs(int(coef))
        body = name if mag == 1 else f"{mag}*{name}"
        pieces.append(("-" if coef < 0 else "+", body))
    if not pieces:
        return "0"
    text = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text
