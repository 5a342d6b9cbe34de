"""Program complexity and objective functions over (loss, complexity)."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, NamedTuple, Protocol, Union

from .core import INF, Weight, weight
from .dsl.grammar import Grammar, Leaf, Program

__all__ = [
    "CostTable",
    "LexPair",
    "MissingCostError",
    "Objective",
    "ObjectiveError",
    "Tradeoff",
    "assert_monotone",
    "bayesian_cost_table",
    "cost",
    "lexicographic",
    "parse_objective",
    "tradeoff",
]


class MissingCostError(KeyError):
    pass


class ObjectiveError(ValueError):
    pass


@dataclass(frozen=True)
class CostTable:
    terminal_cost: Mapping[str, float]
    func_cost: Mapping[str, float]

    def __post_init__(self) -> None:
        for name, c in (*self.terminal_cost.items(), *self.func_cost.items()):
            try:
                weight(c)
            except ValueError:
                raise ValueError(f"cost of {name!r} must be non-negative, got {c!r}") from None

    @classmethod
    def unit(cls, grammar: Grammar) -> "CostTable":
        return cls({t: 1.0 for t in grammar.terminals}, {f: 1.0 for f in grammar.builtins})

    @classmethod
    def parse(cls, text: str, grammar: Grammar, default: float = 1.0) -> "CostTable":
        """Read ``name cost`` lines; ``#`` starts a comment.

        Grammar symbols not listed get ``default``.
        """
        table = cls.unit(grammar)
        terms = {t: default for t in table.terminal_cost}
        funcs = {f: default for f in table.func_cost}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.rsplit(None, 1)
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'name cost'")
            name, value = parts
            try:
                c = float(value)
            except ValueError:
                raise ValueError(f"line {lineno}: bad cost {value!r}") from None
            if name in funcs:
                funcs[name] = c
            elif name in terms:
                terms[name] = c
            else:
                raise ValueError(f"line {lineno}: {name!r} is not a symbol of the grammar")
        return cls(terms, funcs)

    @classmethod
    def load(cls, path: Union[str, Path], grammar: Grammar) -> "CostTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"), grammar)

    def of_terminal(self, name: str) -> float:
        try:
            return self.terminal_cost[name]
        except KeyError:
            raise MissingCostError(name) from None

    def of_func(self, name: str) -> float:
        try:
            return self.func_cost[name]
        except KeyError:
            raise MissingCostError(name) from None


def cost(program: Program, table: CostTable) -> Weight:
    if isinstance(program, Leaf):
        return table.of_terminal(program.symbol)
    return table.of_func(program.func) + sum(cost(c, table) for c in program.children)


def bayesian_cost_table(grammar: Grammar, prior: Mapping[str, float]) -> CostTable:
    """Costs ``-log P(symbol)`` from per-symbol prior probabilities.

    Symbols missing from ``prior`` get probability 1 (cost 0).
    """

    def nll(name: str) -> float:
        p = prior.get(name, 1.0)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"prior of {name!r} must lie in [0, 1]")
        return INF if p == 0.0 else max(0.0, -math.log(p))

    return CostTable({t: nll(t) for t in grammar.terminals}, {f: nll(f) for f in grammar.builtins})


# -- objectives --------------------------------------------------------------


class LexPair(NamedTuple):
    loss: Weight
    complexity: Weight

    def __str__(self) -> str:
        return f"({_fmt(self.loss)}, {_fmt(self.complexity)})"


def _fmt(w: Weight) -> str:
    if w == INF:
        return "inf"
    return str(int(w)) if float(w).is_integer() else repr(w)


class Objective(Protocol):
    name: str

    def __call__(self, loss: Weight, complexity: Weight): ...


@dataclass(frozen=True)
class Tradeoff:
    """``loss + lam * complexity``."""

    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0 or math.isinf(self.lam):
            raise ObjectiveError(f"tradeoff weight must be a positive real, got {self.lam!r}")

    @property
    def name(self) -> str:
        return f"tradeoff:{self.lam:g}"

    def __call__(self, loss: Weight, complexity: Weight) -> Weight:
        if loss == INF or complexity == INF:
            return INF
        return loss + self.lam * complexity


@dataclass(frozen=True)
class _Lexicographic:
    name: str = "lex"

    def __call__(self, loss: Weight, complexity: Weight) -> LexPair:
        return LexPair(loss, complexity)


lexicographic = _Lexicographic()


def tradeoff(lam: float) -> Tradeoff:
    return Tradeoff(lam)


def parse_objective(text: str) -> Objective:
    if text == "lex":
        return lexicographic
    if text.startswith("tradeoff:"):
        try:
            lam = float(text.split(":", 1)[1])
        except ValueError:
            raise ObjectiveError(f"bad tradeoff weight in {text!r}") from None
        return Tradeoff(lam)
    raise ObjectiveError(f"unknown objective {text!r}; use 'lex' or 'tradeoff:<lambda>'")


def format_objective(value) -> str:
    return str(value) if isinstance(value, LexPair) else _fmt(value)


def assert_monotone(objective: Callable[[Weight, Weight], object], samples: int = 200,
                    seed: int = 0) -> None:
    """Spot-check that the objective never decreases as complexity grows."""
    rng = random.Random(seed)
    pool = [0.0, 1.0, INF]
    for _ in range(samples):
        loss = rng.choice(pool + [rng.uniform(0, 100)])
        c1, c2 = sorted(rng.choice(pool + [rng.uniform(0, 100)]) for _ in range(2))
        if objective(loss, c2) < objective(loss, c1):
            raise ObjectiveError(
                f"objective decreases in complexity at loss={loss}: c={c1} -> c={c2}")
