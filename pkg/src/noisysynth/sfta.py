"""State-weighted finite tree automata.

An SFTA is a CFTA whose accepting states carry weights.  Every state of the
start symbol is accepting and weighted by the loss of its value vector.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Optional

from .cfta import Cfta, Graph, StateId, build_graph, product_graph
from .core import Env, Value, Weight, weights_close
from .dsl.grammar import Grammar
from .loss import DataSet, PerExampleLoss

__all__ = [
    "Sfta",
    "build_sfta",
    "build_sfta_dataset",
    "drop_weights",
    "plus_intersect",
    "prune",
    "select",
    "slash_intersect",
]


@dataclass(frozen=True, eq=False)
class Sfta:
    base: Cfta
    weights: Mapping[StateId, Weight]

    def __post_init__(self) -> None:
        if set(self.weights) != set(self.base.accepting):
            raise ValueError("weights must be defined exactly on the accepting states")

    @property
    def grammar(self) -> Grammar:
        return self.base.grammar

    @property
    def accepting(self) -> frozenset:
        return self.base.accepting

    @property
    def state_count(self) -> int:
        return len(self.base.states)

    def accepting_in_order(self) -> list[StateId]:
        """Accepting states in construction order (stable across runs)."""
        keys = self.base.graph.keys
        return [keys[i] for i in sorted(self.base.accepting_ids)]

    def histogram(self) -> dict[Weight, int]:
        """Number of accepting states per weight, keyed in increasing weight order."""
        return dict(sorted(Counter(self.weights.values()).items()))


def _weighted(grammar: Grammar, graph: Graph, width: int, height: int, weights) -> Sfta:
    base = Cfta(grammar, width, graph, frozenset(weights), height)
    return Sfta(base, weights)


def build_sfta(grammar: Grammar, env: Env, output: Value, loss: PerExampleLoss, height: int,
               len_slack: Optional[int] = 1) -> Sfta:
    return build_sfta_dataset(grammar, DataSet.of([(env, output)]), loss, height, len_slack)


def build_sfta_dataset(grammar: Grammar, data: DataSet, loss: PerExampleLoss, height: int,
                       len_slack: Optional[int] = 1) -> Sfta:
    """Build the SFTA over the whole data set at once.

    Under the 0/inf loss repeated rows are dropped first.  Weights are the
    per-example losses summed left to right.
    """
    if not len(data):
        raise ValueError("empty dataset")
    if loss.name == "0inf":
        data = data.dedupe()
    outputs = data.outputs
    graph = build_graph(grammar, data.envs, outputs, height, len_slack)
    # many states share a component value, so memoise losses per row
    memo: list[dict] = [{} for _ in outputs]
    weights: dict[StateId, Weight] = {}
    for q in graph.keys:
        if q.symbol == grammar.start:
            total = 0.0
            for o, c, m in zip(outputs, q.values, memo):
                w = m.get(c)
                if w is None:
                    w = m[c] = loss(o, c)
                total += w
            weights[q] = total
    return _weighted(grammar, graph, len(outputs), height, weights)


def plus_intersect(a: Sfta, b: Sfta) -> Sfta:
    """Product SFTA whose weights are the sums of the operands' weights."""
    graph, pairs = product_graph(a.base, b.base)
    ka, kb = a.base.graph.keys, b.base.graph.keys
    weights = {}
    for q, (i, j) in zip(graph.keys, pairs):
        wa = a.weights.get(ka[i])
        wb = b.weights.get(kb[j])
        if wa is not None and wb is not None:
            weights[q] = wa + wb
    return _weighted(a.grammar, graph, a.base.width + b.base.width,
                     min(a.base.height_bound, b.base.height_bound), weights)


def slash_intersect(a: Sfta, c: Cfta) -> Sfta:
    """Product with ``c`` that keeps ``a``'s weights and requires acceptance on both sides."""
    graph, pairs = product_graph(a.base, c)
    ka = a.base.graph.keys
    acc_c = c.accepting_ids
    weights = {}
    for q, (i, j) in zip(graph.keys, pairs):
        wa = a.weights.get(ka[i])
        if wa is not None and j in acc_c:
            weights[q] = wa
    return _weighted(a.grammar, graph, a.base.width + c.width,
                     min(a.base.height_bound, c.height_bound), weights)


def prune(a: Sfta, w0: Weight) -> Sfta:
    """Keep the accepting states with weight at most ``w0``."""
    kept = {q: w for q, w in a.weights.items() if w <= w0 or weights_close(w, w0)}
    return Sfta(a.base.with_accepting(kept), kept)


def select(a: Sfta, q: StateId) -> Cfta:
    if q not in a.weights:
        raise KeyError(f"{q} is not an accepting state")
    return a.base.with_accepting([q])


def drop_weights(a: Sfta) -> Cfta:
    return a.base
