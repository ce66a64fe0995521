import math

import pytest
from hypothesis import given, settings

from pinnforge import expr as ex
from pinnforge.errors import ExprSyntaxError, UnknownSymbolError

from strategies import trees


def canon(text):
    return ex.canonicalize(ex.parse(text))


class TestParse:
    def test_operator_notation_heat(self):
        tree = canon("du/dt - 0.01*d2u/dx2")
        expected = ex.sum_(
            ex.time_deriv(ex.var("u"), 1),
            ex.prod(ex.num(-0.01), ex.space_deriv(ex.var("u"), "x", 2)),
        )
        assert tree == ex.canonicalize(expected)

    def test_subscript_burgers_term(self):
        tree = canon("u_t + u*u_x")
        expected = ex.sum_(
            ex.time_deriv(ex.var("u"), 1),
            ex.prod(ex.var("u"), ex.space_deriv(ex.var("u"), "x", 1)),
        )
        assert tree == ex.canonicalize(expected)

    def test_malformed_derivative_offset(self):
        with pytest.raises(ExprSyntaxError) as err:
            ex.parse("du/d")
        assert err.value.offset == 4

    def test_empty_input(self):
        with pytest.raises(ExprSyntaxError):
            ex.parse("   ")

    def test_unknown_function(self):
        with pytest.raises(UnknownSymbolError):
            ex.parse("tan(u)")

    def test_equation_becomes_residual(self):
        assert canon("u_t = 0.5*u_xx") == canon("u_t - 0.5*u_xx")

    def test_division_by_constant(self):
        assert canon("u_x/2") == canon("0.5*u_x")

    def test_power_right_associative(self):
        tree = ex.parse("u^2^3")
        assert tree.kind == ex.KIND_POW
        assert tree.children[1].kind == ex.KIND_POW

    def test_function_application(self):
        tree = canon("sin(pi*x)")
        assert tree.kind == ex.KIND_FUNC and tree.name == "sin"

    def test_differentiated_symbols_become_vars(self):
        tree = ex.parse("u_t - c*u_xx")
        kinds = {}

        def walk(t):
            if t.kind in (ex.KIND_VAR, ex.KIND_CONST):
                kinds[t.name] = t.kind
            for ch in t.children:
                walk(ch)

        walk(tree)
        assert kinds["u"] == ex.KIND_VAR
        assert kinds["c"] == ex.KIND_CONST

    def test_mixed_subscript_orders(self):
        # grouped letters become nested derivative nodes in canonical order
        assert canon("u_xt") == canon("u_tx")
        tree = canon("u_xxt")
        assert tree.kind == ex.KIND_TIME and tree.order == 1
        inner = tree.children[0]
        assert inner.kind == ex.KIND_SPACE and inner.order == 2


class TestCanonicalize:
    def test_commutative_reorder(self):
        assert canon("u_xx + u_t") == canon("u_t + u_xx")

    def test_like_term_folding(self):
        assert canon("2*u_x + 3*u_x") == canon("5*u_x")

    def test_notation_unification(self):
        assert canon("d2u/dx2") == canon("u_xx")

    def test_constant_folding(self):
        assert canon("2*3*u") == canon("6*u")
        assert canon("u + 0") == canon("u")

    def test_cancellation_to_zero(self):
        assert canon("u_x - u_x") == ex.num(0.0)

    def test_pow_simplifications(self):
        assert canon("u^1") == ex.const("u")  # undifferentiated symbol stays const
        assert canon("2^3") == ex.num(8.0)

    def test_subtraction_as_negated_sum(self):
        tree = canon("u_t - 0.1*u_xx")
        product = [c for c in tree.children if c.kind == ex.KIND_PROD][0]
        values = [c.value for c in product.children if c.kind == ex.KIND_NUM]
        assert values == [-0.1]

    @given(trees)
    @settings(max_examples=300, deadline=None)
    def test_idempotent(self, tree):
        once = ex.canonicalize(tree)
        assert ex.canonicalize(once) == once

    @given(trees)
    @settings(max_examples=200, deadline=None)
    def test_prefix_round_trip(self, tree):
        once = ex.canonicalize(tree)
        assert ex.canonicalize(ex.from_prefix(ex.to_prefix(once))) == once


class TestNodeCount:
    def test_leaf(self):
        assert ex.node_count(ex.var("u")) == 1

    def test_sum_of_two_leaves(self):
        assert ex.node_count(ex.sum_(ex.var("u"), ex.var("v"))) == 3

    def test_heat_canonical_hand_count(self):
        # sum, dt, u, prod, -0.1, dxx, u -> 7 nodes
        assert ex.node_count(canon("u_t - 0.1*u_xx")) == 7


class TestStructuralQueries:
    def test_linear_heat(self):
        assert ex.is_linear(canon("u_t - 0.5*u_xx"))

    def test_nonlinear_burgers(self):
        assert not ex.is_linear(canon("u_t + u*u_x - 0.1*u_xx"))

    def test_nonlinear_square(self):
        assert not ex.is_linear(canon("u_t + u^2"))

    def test_forcing_is_linear(self):
        assert ex.is_linear(canon("u_xx + sin(pi*x)"))

    def test_max_order(self):
        assert ex.max_derivative_order(canon("u_t + u_xxxx")) == 4

    def test_axes(self):
        assert ex.spatial_axes(canon("u_xx + u_yy")) == {"x", "y"}

    def test_evaluate_with_pi(self):
        value = ex.evaluate(canon("sin(pi*x)"), {"x": 0.5})
        assert value == pytest.approx(1.0)

    def test_evaluate_unbound(self):
        with pytest.raises(KeyError):
            ex.evaluate(ex.const("q"), {})

    def test_literals_must_be_finite(self):
        with pytest.raises(ValueError):
            ex.num(math.inf)
