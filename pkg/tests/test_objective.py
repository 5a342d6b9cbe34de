import pytest
from hypothesis import given, strategies as st

from noisysynth.core import INF
from noisysynth.dsl import Leaf, enumerate_programs, parse_program, program_size, toy_grammar
from noisysynth.objective import (CostTable, LexPair, MissingCostError, ObjectiveError, Tradeoff,
                                  assert_monotone, bayesian_cost_table, cost, lexicographic,
                                  parse_objective)

TOY = toy_grammar()
weights = st.one_of(st.floats(min_value=0, max_value=1e6, allow_nan=False), st.just(INF))


def test_unit_cost_is_size():
    table = CostTable.unit(TOY)
    for p in enumerate_programs(TOY, 3):
        assert cost(p, table) == program_size(p)


def test_terminal_cost_and_node_cost():
    table = CostTable({"x": 2.5, "2": 1.0, "3": 1.0}, {"+": 1.0, "×": 1.0})
    assert cost(Leaf("x"), table) == 2.5
    assert cost(parse_program("(+ x 2)", TOY), CostTable.unit(TOY)) == 3


def test_missing_cost_entry():
    with pytest.raises(MissingCostError):
        cost(Leaf("x"), CostTable({}, {}))


def test_negative_cost_rejected():
    with pytest.raises(ValueError):
        CostTable({"x": -1.0}, {})


def test_cost_table_file(tmp_path):
    f = tmp_path / "costs.txt"
    f.write_text("# weights\n× 4\nx 0.5\n", encoding="utf-8")
    t = CostTable.load(f, TOY)
    assert t.func_cost["×"] == 4 and t.terminal_cost["x"] == 0.5 and t.func_cost["+"] == 1
    f.write_text("nope 3\n", encoding="utf-8")
    with pytest.raises(ValueError):
        CostTable.load(f, TOY)


@pytest.mark.parametrize("lam, l, c, want", [(0.1, 2, 5, 2.5), (0.1, INF, 5, INF), (0.001, 0, 17, 0.017)])
def test_tradeoff(lam, l, c, want):
    assert Tradeoff(lam)(l, c) == pytest.approx(want)


@pytest.mark.parametrize("lam", [0, -1, float("inf")])
def test_tradeoff_needs_positive_lambda(lam):
    with pytest.raises(ObjectiveError):
        Tradeoff(lam)


def test_lexicographic_order():
    assert lexicographic(0, 5) < lexicographic(1, 1)
    assert lexicographic(1, 1) < lexicographic(1, 2)
    assert lexicographic(INF, 1) > lexicographic(5, 999)
    assert lexicographic(1, 2) == LexPair(1, 2)


@given(weights, weights, weights, st.sampled_from([0.001, 0.1, 1.0]))
def test_monotone_in_complexity(l, c1, c2, lam):
    c1, c2 = sorted((c1, c2))
    for u in (lexicographic, Tradeoff(lam)):
        assert not u(l, c2) < u(l, c1)


def test_assert_monotone():
    assert_monotone(lexicographic)
    assert_monotone(Tradeoff(0.5))
    with pytest.raises(ObjectiveError):
        assert_monotone(lambda l, c: -c if c != INF else -1e308)


def test_parse_objective():
    assert parse_objective("lex") is lexicographic
    assert parse_objective("tradeoff:0.1") == Tradeoff(0.1)
    for bad in ("tradeoff:x", "tradeoff:0", "max"):
        with pytest.raises(ObjectiveError):
            parse_objective(bad)


def test_bayesian_cost_table():
    t = bayesian_cost_table(TOY, {"×": 0.5, "3": 0.0})
    assert t.func_cost["×"] == pytest.approx(0.6931471805599453)
    assert t.terminal_cost["3"] == INF
    assert t.func_cost["+"] == 0
