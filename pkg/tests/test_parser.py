import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from ncdeform.parser import Atom, BinOp, Comm, EvalError, Neg, Num, ParseError, Vac, evaluate, parse_expr, to_text
from ncdeform.realization import RealizationSpec, build_box
from ncdeform.scalar import I
from ncdeform.weyl import D, X, const


@pytest.fixture
def spec(kappa2):
    return RealizationSpec(kappa2, trunc=8)


def test_commutator_node():
    assert parse_expr("[D_0, X_0]") == Comm(Atom("D", (0,)), Atom("X", (0,)))


def test_precedence_and_associativity():
    tree = parse_expr("X_0 - X_1 + 2*D_0*D_1")
    assert tree == BinOp(
        "+",
        BinOp("-", Atom("X", (0,)), Atom("X", (1,))),
        BinOp("*", BinOp("*", Num("2"), Atom("D", (0,))), Atom("D", (1,))),
    )
    # unary minus binds tighter than '*'
    assert parse_expr("-X_0*X_1") == BinOp("*", Neg(Atom("X", (0,))), Atom("X", (1,)))
    assert parse_expr("X_0 - (X_1 - X_0)").right == BinOp("-", Atom("X", (1,)), Atom("X", (0,)))


def test_vacuum_postfix():
    assert parse_expr("[xhat_0, xhat_1] |0>") == Vac(Comm(Atom("xhat", (0,)), Atom("xhat", (1,))))


def test_truncated_input_error_position():
    with pytest.raises(ParseError) as err:
        parse_expr("[D_0, X_")
    assert err.value.line == 1 and err.value.col == 8


@pytest.mark.parametrize(
    "text, col",
    [("X_0 +", 6), ("[X_0 X_1]", 6), ("M_0", 1), ("foo_1", 1), ("X_0 $ X_1", 5), ("(X_0", 5)],
)
def test_error_columns(text, col):
    with pytest.raises(ParseError) as err:
        parse_expr(text)
    assert err.value.col == col
    assert err.value.expected


def test_error_line_numbers():
    with pytest.raises(ParseError) as err:
        parse_expr("X_0 +\n  * X_1")
    assert (err.value.line, err.value.col) == (2, 3)


def test_lorentz_closure_expression_is_zero(spec):
    tree = parse_expr("[xhat_0, xhat_1] - i*(a_0*xhat_1 - a_1*xhat_0) - s*M_0_1")
    assert evaluate(tree, spec).is_zero()


def test_heisenberg_expression(spec):
    assert evaluate(parse_expr("[D_0, X_0]"), spec) == const(2, -1)
    assert evaluate(parse_expr("[D_1, X_1] - 1"), spec).is_zero()


def test_vacuum_evaluation(spec, kappa2):
    got = evaluate(parse_expr("[xhat_0, xhat_1] |0>"), spec)
    want = (X(2, 1).scale(kappa2.a[0]) - X(2, 0).scale(kappa2.a[1])).scale(I)
    # M_01 annihilates the vacuum and xhat_mu |0> = X_mu
    assert got == want.truncated(got.trunc)


def test_named_operators(spec):
    assert evaluate(parse_expr("Box"), spec) == build_box(spec)
    zinv = evaluate(parse_expr("Zinv"), spec)
    z = evaluate(parse_expr("Z"), spec)
    assert (evaluate(parse_expr("Z*Zinv"), spec) - const(2, 1)).truncated(6).is_zero()
    assert zinv.trunc == z.trunc == spec.trunc


def test_index_out_of_range(spec):
    with pytest.raises(EvalError):
        evaluate(parse_expr("X_2"), spec)


def test_rational_literals(spec):
    assert evaluate(parse_expr("3/4*D_1"), spec) == D(2, 1).scale(mpq(3, 4))


# --- round trip ----------------------------------------------------------------

index = st.integers(0, 3)
atoms = st.one_of(
    st.builds(lambda n, i: Atom(n, (i,)), st.sampled_from(["X", "D", "xhat", "a"]), index),
    st.builds(lambda i, j: Atom("M", (i, j)), index, index),
    st.sampled_from([Atom("Z"), Atom("Zinv"), Atom("Box"), Atom("s"), Atom("i")]),
    st.builds(lambda p, q: Num(f"{p}/{q}" if q > 1 else str(p)), st.integers(0, 20), st.integers(1, 9)),
)
trees = st.recursive(
    atoms,
    lambda sub: st.one_of(
        st.builds(BinOp, st.sampled_from(["+", "-", "*"]), sub, sub),
        st.builds(Neg, sub),
        st.builds(Comm, sub, sub),
        st.builds(Vac, sub),
    ),
    max_leaves=8,
)


@given(trees)
def test_print_parse_round_trip(tree):
    text = to_text(tree)
    assert parse_expr(text) == tree
    assert to_text(parse_expr(text)) == text


@given(st.text(alphabet="XD_01[],+-*() |>", max_size=12))
def test_parser_never_crashes(text):
    try:
        parse_expr(text)
    except ParseError as err:
        assert err.line >= 1 and err.col >= 1
