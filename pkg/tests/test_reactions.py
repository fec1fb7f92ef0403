import warnings

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hamform.errors import NetworkSyntaxError
from hamform.integrators import IntegratorConfig, integrate
from hamform.reactions import (
    Reaction,
    ReactionNetwork,
    format_linear,
    linear_invariants,
    mass_action_odes,
    ode_strings,
    parse_network,
    reaction_rates,
    serialize_network,
    stoichiometric_matrix,
)

BRUSSELATOR = """
# abundant A and B folded into the rate constants
0 -> x [a=1]
2x + y -> 3x [1]
x -> y [b=3]
x -> 0 [1]
"""
ROBERTSON = "x -> y [a]; y + y -> y + z [b]; y + z -> x + z [c]"


def _robertson(a=1.0, b=1.0, c=1.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return parse_network(ROBERTSON, {"a": a, "b": b, "c": c})


def _sympy_left_null(N):
    # independent oracle: rational left null space via sympy
    return [list(v) for v in sympy.Matrix(N.tolist()).T.nullspace()]


class TestParse:
    def test_single_conversion(self):
        net = parse_network("X -> Y [0.04]")
        assert net.species == ("X", "Y")
        assert len(net.reactions) == 1
        np.testing.assert_array_equal(stoichiometric_matrix(net)[:, 0], [-1, 1])

    def test_brusselator_shape(self):
        net = parse_network(BRUSSELATOR)
        assert net.species == ("x", "y")
        assert len(net.reactions) == 4
        np.testing.assert_array_equal(stoichiometric_matrix(net), [[1, 1, -1, -1], [0, -1, 1, 0]])

    def test_missing_species_after_plus(self):
        with pytest.raises(NetworkSyntaxError) as info:
            parse_network("X + -> Y [1]")
        err = info.value
        assert (err.line, err.column, err.token) == (1, 5, 3)
        assert "line 1" in str(err) and "column 5" in str(err)

    def test_error_line_number(self):
        with pytest.raises(NetworkSyntaxError) as info:
            parse_network("X -> Y [1]\n\n# comment\nY => X [2]")
        assert info.value.line == 4

    @pytest.mark.parametrize("rate", ["0", "-1", "0.0"])
    def test_non_positive_rate(self, rate):
        with pytest.raises(NetworkSyntaxError):
            parse_network(f"X -> Y [{rate}]")

    @pytest.mark.parametrize("text", ["X -> Y", "X -> Y [1", "X Y -> Z [1]", "-> Y [1]", "X -> Y [k]",
                                      "1.5X -> Y [1]", "X -> Y [1] extra", "X ! Y [1]"])
    def test_malformed(self, text):
        with pytest.raises(NetworkSyntaxError):
            parse_network(text)

    def test_named_rate_from_params(self):
        net = parse_network("X -> Y [k]", {"k": 2.5})
        assert net.reactions[0].rate == 2.5 and net.reactions[0].label == "k"

    def test_duplicate_species_merged_with_warning(self):
        with pytest.warns(UserWarning, match="repeated"):
            net = parse_network("Y + Y -> Z [1]")
        assert net.reactions[0].reactants == (("Y", 2),)

    def test_unicode_arrow_and_comments(self):
        net = parse_network("A → B [1]  # conversion\n")
        assert net.species == ("A", "B")

    def test_empty_text(self):
        net = parse_network("# nothing here\n\n")
        assert net.species == () and net.reactions == ()

    def test_species_in_first_appearance_order(self):
        net = parse_network("C + A -> B [1]\nD -> A [1]")
        assert net.species == ("C", "A", "B", "D")

    def test_coefficients_kept(self):
        net = parse_network("2X + Y -> 3X [1]")
        np.testing.assert_array_equal(net.reactant_matrix[:, 0], [2, 1])
        np.testing.assert_array_equal(stoichiometric_matrix(net)[:, 0], [1, -1])


class TestNetworkInvariants:
    def test_rate_must_be_positive(self):
        with pytest.raises(ValueError):
            Reaction((("X", 1),), (), 0.0)

    def test_unique_species(self):
        with pytest.raises(ValueError):
            ReactionNetwork(("X", "X"), ())

    def test_undeclared_species(self):
        with pytest.raises(ValueError):
            ReactionNetwork(("X",), (Reaction((("Y", 1),), (), 1.0),))


class TestMassAction:
    def test_conversion(self):
        sys = mass_action_odes(parse_network("X -> Y [a]", {"a": 2.0}))
        np.testing.assert_allclose(sys([3.0, 0.0]), [-6.0, 6.0])

    def test_brusselator(self):
        sys = mass_action_odes(parse_network(BRUSSELATOR))
        np.testing.assert_allclose(sys([1.0, 1.0]), [-2.0, 2.0])

    def test_robertson(self):
        sys = mass_action_odes(_robertson())
        np.testing.assert_allclose(sys([1.0, 1.0, 1.0]), [0.0, -1.0, 1.0])

    def test_robertson_matches_zoo(self, rng):
        from hamform import zoo

        sys = mass_action_odes(_robertson(0.04, 3e7, 1e4))
        f = zoo.robertson_field(0.04, 3e7, 1e4)
        for x in rng.uniform(0, 1, (20, 3)):
            np.testing.assert_allclose(sys(x), f(x), rtol=1e-13)

    def test_non_negative_domain(self):
        sys = mass_action_odes(parse_network("X -> Y [1]"))
        assert sys.accepts([0.0, 0.0]) and not sys.accepts([-1e-3, 0.0])

    def test_polynomial_degree(self, rng):
        # total degree 3: fourth differences along any line vanish
        sys = mass_action_odes(parse_network(BRUSSELATOR))
        for _ in range(10):
            x0, d = rng.uniform(0.5, 1.5, 2), rng.normal(size=2)
            h = 0.1
            vals = [sys(x0 + k * h * d) for k in range(5)]
            fourth = vals[0] - 4 * vals[1] + 6 * vals[2] - 4 * vals[3] + vals[4]
            assert np.max(np.abs(fourth)) <= 1e-10

    def test_non_negative_trajectory(self):
        sys = mass_action_odes(_robertson())
        tr = integrate(sys, [1.0, 0.0, 0.0], IntegratorConfig(h=1e-2), 5.0, record_divergence=False)
        assert tr.x.min() >= -1e-9


class TestLinearInvariants:
    def test_robertson(self):
        np.testing.assert_array_equal(linear_invariants(_robertson()), [[1, 1, 1]])

    def test_conversion(self):
        np.testing.assert_array_equal(linear_invariants(parse_network("X -> Y [1]")), [[1, 1]])

    def test_brusselator_open(self):
        net = parse_network(BRUSSELATOR)
        assert linear_invariants(net).shape == (0, 2)
        assert _sympy_left_null(stoichiometric_matrix(net)) == []

    def test_against_sympy(self):
        net = parse_network("A + B -> C [1]\nC -> A + B [2]\nC + D -> E [1]")
        basis = linear_invariants(net)
        N = stoichiometric_matrix(net)
        np.testing.assert_array_equal(basis @ N, 0)
        assert basis.shape[0] == len(_sympy_left_null(N))
        assert np.linalg.matrix_rank(basis) == basis.shape[0]

    def test_conservation_along_field(self, rng):
        net = parse_network("A + B -> C [1.5]\nC -> A + B [0.5]\n2C -> D [0.7]")
        basis = linear_invariants(net)
        sys = mass_action_odes(net)
        for x in rng.uniform(0.01, 3, (50, 4)):
            assert np.max(np.abs(basis @ sys(x))) <= 1e-13

    def test_primitive_and_sign(self):
        net = parse_network("2A -> B [1]")
        np.testing.assert_array_equal(linear_invariants(net), [[1, 2]])
        assert format_linear([1, 2], net.species) == "A + 2*B"


_species = st.sampled_from(["X", "Y", "Z", "W"])
_side = st.lists(st.tuples(_species, st.integers(1, 3)), max_size=3)
_rate = st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False)


def _side_text(side):
    if not side:
        return "0"
    seen = {}
    for s, m in side:
        seen[s] = seen.get(s, 0) + m
    return " + ".join(f"{m}{s}" if m > 1 else s for s, m in seen.items())


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(_side, _side, _rate, st.booleans()), min_size=1, max_size=5))
def test_parse_serialize_round_trip(reactions):
    lines = []
    for k, (lhs, rhs, rate, named) in enumerate(reactions):
        r = f"k{k}={rate!r}" if named else repr(rate)
        lines.append(f"{_side_text(lhs)} -> {_side_text(rhs)} [{r}]")
    net = parse_network("\n".join(lines))
    again = parse_network(serialize_network(net))
    assert again == net
    assert serialize_network(again) == serialize_network(net)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(_side, _side, _rate, st.booleans()), min_size=1, max_size=5),
       st.integers(0, 2**31 - 1))
def test_linear_invariants_annihilate_rates(reactions, seed):
    lines = [f"{_side_text(l)} -> {_side_text(r)} [{k!r}]" for l, r, k, _ in reactions]
    net = parse_network("\n".join(lines))
    if not net.species:
        return
    basis = linear_invariants(net)
    x = np.random.default_rng(seed).uniform(0.1, 2, len(net.species))
    r = reaction_rates(net, x)
    N = stoichiometric_matrix(net)
    for c in basis:
        assert abs(c @ N @ r) <= 1e-13 * max(1.0, np.abs(np.abs(c) @ np.abs(N) @ r))


def test_ode_strings_brusselator():
    assert ode_strings(parse_network(BRUSSELATOR)) == ["a + x^2*y - b*x - x", "-x^2*y + b*x"]


def test_ode_strings_robertson():
    assert ode_strings(_robertson()) == ["-a*x + c*y*z", "a*x - b*y^2 - c*y*z", "b*y^2"]


def test_ode_strings_agree_with_sympy():
    net = parse_network(BRUSSELATOR)
    x, y, a, b = sympy.symbols("x y a b")
    for text, ref in zip(ode_strings(net), [a + x**2 * y - b * x - x, b * x - x**2 * y]):
        assert sympy.simplify(sympy.sympify(text.replace("^", "**")) - ref) == 0
