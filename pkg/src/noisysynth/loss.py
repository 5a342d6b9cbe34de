"""Per-example losses, data sets and dataset loss."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .core import INF, Env, Value, Weight, weight
from .dsl.grammar import Grammar, Program, evaluate

__all__ = [
    "DataSet",
    "Example",
    "LOSSES",
    "PerExampleLoss",
    "dataset_loss",
    "dl",
    "get_loss",
    "likelihood_loss",
    "n_substitution",
    "one_delete",
    "squared",
    "zero_inf",
    "zero_one",
]


@dataclass(frozen=True)
class Example:
    env: Mapping[str, Value]
    output: Value

    def key(self) -> tuple:
        return tuple(sorted(self.env.items(), key=lambda kv: kv[0])), self.output


@dataclass(frozen=True)
class DataSet:
    examples: tuple[Example, ...]

    @classmethod
    def of(cls, pairs: Iterable[tuple[Env, Value]]) -> "DataSet":
        return cls(tuple(Example(dict(env), out) for env, out in pairs))

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i: int) -> Example:
        return self.examples[i]

    @property
    def envs(self) -> list[Env]:
        return [e.env for e in self.examples]

    @property
    def outputs(self) -> list[Value]:
        return [e.output for e in self.examples]

    def pairs(self) -> list[tuple[Env, Value]]:
        return [(e.env, e.output) for e in self.examples]

    def subset(self, indices: Sequence[int]) -> "DataSet":
        return DataSet(tuple(self.examples[i] for i in indices))

    def with_outputs(self, outputs: Sequence[Value]) -> "DataSet":
        if len(outputs) != len(self.examples):
            raise ValueError("output count does not match the data set")
        return DataSet(tuple(Example(e.env, o) for e, o in zip(self.examples, outputs)))

    def dedupe(self) -> "DataSet":
        """Drop repeated (input, output) rows, keeping first occurrences."""
        seen: set = set()
        kept = []
        for e in self.examples:
            k = e.key()
            if k not in seen:
                seen.add(k)
                kept.append(e)
        return DataSet(tuple(kept))


@dataclass(frozen=True)
class PerExampleLoss:
    """``fn(expected, produced)``; ``name`` is the CLI selector."""

    name: str
    fn: Callable[[Value, Value], Weight]

    def __call__(self, expected: Value, produced: Value) -> Weight:
        return self.fn(expected, produced)


def zero_one(o: Value, c: Value) -> Weight:
    return 0.0 if c == o else 1.0


def zero_inf(o: Value, c: Value) -> Weight:
    return 0.0 if c == o else INF


def _require_text(*vals: Value) -> None:
    for v in vals:
        if not isinstance(v, str):
            raise TypeError(f"text loss applied to non-string value {v!r}")


def dl(a: str, b: str) -> Weight:
    """Optimal string alignment distance (adjacent transpositions, no substring reuse)."""
    _require_text(a, b)
    n, m = len(a), len(b)
    prev2: list[int] = []
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            sub = 0 if a[i - 1] == b[j - 1] else 1
            best = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + sub)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                best = min(best, prev2[j - 2] + 1)
            cur[j] = best
        prev2, prev = prev, cur
    return float(prev[m])


def one_delete(o_prog: str, o_data: str) -> Weight:
    """0 when equal, 1 when one deletion from ``o_prog`` gives ``o_data``, else inf."""
    _require_text(o_prog, o_data)
    if o_prog == o_data:
        return 0.0
    if len(o_prog) != len(o_data) + 1:
        return INF
    i = 0
    while i < len(o_data) and o_prog[i] == o_data[i]:
        i += 1
    return 1.0 if o_prog[i + 1:] == o_data[i:] else INF


def n_substitution(o_prog: str, o_data: str) -> Weight:
    _require_text(o_prog, o_data)
    if len(o_prog) != len(o_data):
        return INF
    return float(sum(x != y for x, y in zip(o_prog, o_data)))


def squared(o: Value, c: Value) -> Weight:
    """``(c - o)**2`` on integers; used for the toy arithmetic DSL."""
    return float((c - o) ** 2)


LOSSES: dict[str, PerExampleLoss] = {
    "01": PerExampleLoss("01", zero_one),
    "0inf": PerExampleLoss("0inf", zero_inf),
    "dl": PerExampleLoss("dl", dl),
    # the two noise-matched losses take the program output first
    "1del": PerExampleLoss("1del", lambda o, c: one_delete(c, o)),
    "nsub": PerExampleLoss("nsub", lambda o, c: n_substitution(c, o)),
    "sq": PerExampleLoss("sq", squared),
}


def get_loss(name: str) -> PerExampleLoss:
    try:
        return LOSSES[name]
    except KeyError:
        raise ValueError(f"unknown loss {name!r}; choose from {', '.join(LOSSES)}") from None


def likelihood_loss(name: str, likelihood: Callable[[Value, Value], float]) -> PerExampleLoss:
    """Loss ``-log P(o | c)`` for a caller-supplied noise model ``likelihood(o, c)``."""

    def fn(o: Value, c: Value) -> Weight:
        p = likelihood(o, c)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"likelihood must lie in [0, 1], got {p!r}")
        return INF if p == 0.0 else weight(max(0.0, -math.log(p)))

    return PerExampleLoss(name, fn)


def output_loss(outputs: Sequence[Optional[Value]], data: DataSet, loss: PerExampleLoss) -> Weight:
    """Sum of per-example losses for a vector of produced outputs; ``None`` costs inf."""
    total = 0.0
    for produced, ex in zip(outputs, data.examples):
        total += INF if produced is None else loss(ex.output, produced)
    return total


def dataset_loss(program: Program, data: DataSet, loss: PerExampleLoss, grammar: Grammar) -> Weight:
    outputs = [evaluate(program, ex.env, grammar) for ex in data.examples]
    return output_loss(outputs, data, loss)
