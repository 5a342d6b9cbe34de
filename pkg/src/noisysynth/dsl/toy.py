"""Small grammars used for worked examples and property tests."""

from __future__ import annotations

import operator

from ..core import lookup
from .grammar import Builtin, Grammar, Production


def _const(v):
    return lambda env: v


def toy_grammar() -> Grammar:
    """``n := x | n + t | n × t ;  t := 2 | 3`` over an integer input ``x``."""
    return Grammar(
        terminals={"x": lambda env: lookup(env, "x"), "2": _const(2), "3": _const(3)},
        nonterminals=("n", "t"),
        productions=(
            Production("n", None, ("x",)),
            Production("n", "+", ("n", "t")),
            Production("n", "×", ("n", "t")),
            Production("t", None, ("2",)),
            Production("t", None, ("3",)),
        ),
        start="n",
        builtins={"+": Builtin(2, operator.add), "×": Builtin(2, operator.mul)},
        name="toy",
    )


def boolean_grammar() -> Grammar:
    """Propositional formulas over the constants True and False."""
    return Grammar(
        terminals={"True": _const(True), "False": _const(False)},
        nonterminals=("b",),
        productions=(
            Production("b", None, ("True",)),
            Production("b", None, ("False",)),
            Production("b", "not", ("b",)),
            Production("b", "and", ("b", "b")),
            Production("b", "or", ("b", "b")),
        ),
        start="b",
        builtins={
            "not": Builtin(1, operator.not_),
            "and": Builtin(2, lambda a, b: a and b),
            "or": Builtin(2, lambda a, b: a or b),
        },
        name="boolean",
    )
