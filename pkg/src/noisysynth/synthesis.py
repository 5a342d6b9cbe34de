"""Program extraction and the synthesis drivers.

Every accepting state stands for one class of programs that behave the same
on the data, so they all share one loss.  The driver finds the cheapest
program of each class and keeps the class whose (loss, cost) pair scores
best under the objective.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .cfta import Cfta, Graph, StateId
from .core import Value, Weight
from .dsl.grammar import Grammar, Leaf, Node, Program, format_program
from .loss import DataSet, PerExampleLoss, get_loss, likelihood_loss
from .objective import CostTable, Objective, Tradeoff
from .sfta import Sfta, build_sfta_dataset, prune, slash_intersect

__all__ = [
    "NoProgramError",
    "SynthesisResult",
    "at_most_k_wrong",
    "best_for_accuracy",
    "forced_accuracy",
    "min_cost_per_state",
    "min_costs",
    "most_probable",
    "select_best",
    "synthesize",
]


class NoProgramError(Exception):
    """No accepting state survives within the height bound (and loss bound, if any)."""


@dataclass(frozen=True)
class SynthesisResult:
    program: Program
    loss: Weight
    complexity: Weight
    objective: object
    chosen_state: StateId
    sfta_state_count: int
    seconds: float = 0.0

    @property
    def text(self) -> str:
        return format_program(self.program)


def _min_costs_ids(g: Graph, table: CostTable) -> list[Optional[tuple[Weight, str, int]]]:
    """Knuth's generalisation of Dijkstra to hypergraphs, on state numbers.

    Entry ``q`` is ``(cost, text, source)`` for the cheapest program reaching
    ``q``, where ``source`` is the transition index that built it (-1 for a
    terminal), or ``None`` when ``q`` is unreachable.
    """
    n = len(g)
    best: list = [None] * n
    raw = g.raw
    waiting: list[list[int]] = [[] for _ in range(n)]
    remaining = [len(args) for _, args, _ in raw]
    for i, (_, args, _) in enumerate(raw):
        for q in args:
            waiting[q].append(i)
    heap: list = []
    for sym, q in g.terminal_ids.items():
        heap.append((table.of_terminal(sym), sym, q, -1))
    fcost: dict = {}
    for i, (p, args, t) in enumerate(raw):
        if not args:
            heap.append((table.of_func(p.func), f"({p.func})", t, i))
    heapq.heapify(heap)
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        c, s, q, src = pop(heap)
        if best[q] is not None:
            continue
        best[q] = (c, s, src)
        for i in waiting[q]:
            remaining[i] -= 1
            if remaining[i]:
                continue
            p, args, t = raw[i]
            if best[t] is not None:
                continue
            if p.func is None:
                push(heap, (c, s, t, i))
                continue
            f = p.func
            fc = fcost.get(f)
            if fc is None:
                fc = fcost[f] = table.of_func(f)
            kids = [best[x] for x in args]
            push(heap, (fc + sum(k[0] for k in kids), f"({f} {' '.join(k[1] for k in kids)})", t, i))
    return best


def _program(g: Graph, best: list, q: int, memo: dict) -> Program:
    p = memo.get(q)
    if p is not None:
        return p
    src = best[q][2]
    if src < 0:
        p = Leaf(g.keys[q].symbol)
    else:
        prod, args, _ = g.raw[src]
        if prod.func is None:
            p = _program(g, best, args[0], memo)
        else:
            p = Node(prod.func, tuple(_program(g, best, x, memo) for x in args))
    memo[q] = p
    return p


def min_costs(a: Cfta, table: CostTable) -> dict[StateId, tuple[Program, Weight]]:
    """Cheapest program reaching every reachable state.

    A transition fires once all of its argument states are settled, costing
    ``cost(f)`` plus its arguments' costs; unit transitions add nothing.
    Equal costs are broken by program text, so the choice does not depend on
    transition order.
    """
    g = a.graph
    best = _min_costs_ids(g, table)
    memo: dict = {}
    return {g.keys[q]: (_program(g, best, q, memo), b[0]) for q, b in enumerate(best) if b is not None}


def min_cost_per_state(a: Union[Sfta, Cfta], table: CostTable) -> dict[StateId, tuple[Program, Weight]]:
    base = a.base if isinstance(a, Sfta) else a
    g = base.graph
    best = _min_costs_ids(g, table)
    memo: dict = {}
    return {g.keys[q]: (_program(g, best, q, memo), best[q][0])
            for q in sorted(base.accepting_ids) if best[q] is not None}


def select_best(
    a: Sfta, table: CostTable, objective: Callable[[Weight, Weight], object],
) -> SynthesisResult:
    """Pick the accepting state minimising ``objective(w(q), cost(p_q))``.

    Ties prefer lower cost, then the smallest program text.
    """
    g = a.base.graph
    best_ids = _min_costs_ids(g, table)
    keys = g.keys
    best_key = None
    chosen = -1
    for q in sorted(a.base.accepting_ids):
        b = best_ids[q]
        if b is None:
            continue
        c, text, _ = b
        key = (objective(a.weights[keys[q]], c), c, text)
        if best_key is None or key < best_key:
            best_key, chosen = key, q
    if best_key is None:
        raise NoProgramError("no program within the height bound")
    obj, c, _ = best_key
    qid = keys[chosen]
    return SynthesisResult(_program(g, best_ids, chosen, {}), a.weights[qid], c, obj, qid,
                           a.state_count)


def _timed(fn):
    def wrapper(*args, **kwargs) -> SynthesisResult:
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        return SynthesisResult(res.program, res.loss, res.complexity, res.objective,
                               res.chosen_state, res.sfta_state_count, time.perf_counter() - t0)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    wrapper.__wrapped__ = fn
    return wrapper


@_timed
def synthesize(grammar: Grammar, data: DataSet, loss: PerExampleLoss, table: CostTable,
               objective: Objective, height: int, len_slack: Optional[int] = 1) -> SynthesisResult:
    """Minimise ``objective(dataset loss, cost)`` over programs within the height bound."""
    a = build_sfta_dataset(grammar, data, loss, height, len_slack)
    return select_best(a, table, objective)


def _complexity_only(loss: Weight, complexity: Weight) -> Weight:
    return complexity


@_timed
def best_for_accuracy(grammar: Grammar, data: DataSet, loss: PerExampleLoss, table: CostTable,
                      bound: Weight, height: int, len_slack: Optional[int] = 1) -> SynthesisResult:
    """Cheapest program whose dataset loss is at most ``bound``."""
    a = prune(build_sfta_dataset(grammar, data, loss, height, len_slack), bound)
    try:
        return select_best(a, table, _complexity_only)
    except NoProgramError:
        raise NoProgramError(f"no program with loss <= {bound} within the height bound") from None


@_timed
def forced_accuracy(grammar: Grammar, data: DataSet, trusted: Sequence[int], loss: PerExampleLoss,
                    table: CostTable, objective: Objective, bound: Weight, height: int,
                    len_slack: Optional[int] = 1) -> SynthesisResult:
    """Optimise over all rows while keeping the loss on the ``trusted`` rows at most ``bound``.

    ``trusted`` holds row indices into ``data``.
    """
    if any(not 0 <= i < len(data) for i in trusted):
        raise IndexError("trusted row index out of range")
    a = build_sfta_dataset(grammar, data, loss, height, len_slack)
    if trusted:
        sub = build_sfta_dataset(grammar, data.subset(sorted(set(trusted))), loss, height, len_slack)
        a = slash_intersect(a, prune(sub, bound).base)
    try:
        return select_best(a, table, objective)
    except NoProgramError:
        raise NoProgramError(f"no program with trusted-row loss <= {bound}") from None


def at_most_k_wrong(grammar: Grammar, data: DataSet, table: CostTable, k: int, height: int,
                    len_slack: Optional[int] = 1) -> SynthesisResult:
    """Cheapest program that disagrees with at most ``k`` rows."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return best_for_accuracy(grammar, data, get_loss("01"), table, float(k), height, len_slack)


def most_probable(grammar: Grammar, data: DataSet,
                  likelihood: Callable[[Value, Value], float], prior_costs: CostTable,
                  height: int, len_slack: Optional[int] = 1) -> SynthesisResult:
    """Maximum a posteriori program.

    ``likelihood(o, c)`` is the probability of observing ``o`` when the
    program outputs ``c``; ``prior_costs`` holds ``-log`` prior
    probabilities (see :func:`~noisysynth.objective.bayesian_cost_table`).
    """
    return synthesize(grammar, data, likelihood_loss("nll", likelihood), prior_costs,
                      Tradeoff(1.0), height, len_slack)
