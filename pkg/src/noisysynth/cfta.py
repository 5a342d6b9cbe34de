"""Concrete finite tree automata over a DSL grammar.

A state pairs a grammar symbol with the vector of values that every program
reaching it computes on the example inputs.  Automata are built bottom-up,
one scope level at a time, and the same level-synchronised saturation is
reused for intersection.  Running intersection through the same level
bound is what makes "intersect single-example automata" and "build over the
whole data set at once" produce the same automaton.

Internally states are numbered in construction order and transitions refer
to those numbers; the :class:`StateId` / :class:`Transition` views are built
on demand.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, NamedTuple, Optional, Sequence

from .core import Env, Value, format_value
from .dsl.grammar import Grammar, Leaf, Node, Production, Program, format_program

__all__ = [
    "Cfta",
    "Graph",
    "GrammarMismatchError",
    "StateId",
    "Transition",
    "accepts",
    "build_cfta",
    "build_cfta_dataset",
    "dump",
    "enumerate_accepted",
    "intersect",
]


class GrammarMismatchError(ValueError):
    pass


class StateId(NamedTuple):
    symbol: str
    values: tuple

    def __str__(self) -> str:
        return f"{self.symbol}:[{', '.join(format_value(v) for v in self.values)}]"


class Transition(NamedTuple):
    prod: Production
    args: tuple[StateId, ...]
    target: StateId

    @property
    def func(self) -> Optional[str]:
        return self.prod.func

    def __str__(self) -> str:
        return f"{self.func or 'id'}({', '.join(map(str, self.args))}) -> {self.target}"


RawTransition = tuple[Production, tuple[int, ...], int]


class Graph:
    """States and transitions of an automaton, with states numbered in construction order.

    ``levels[i]`` is the scope level at which state ``i`` was first built
    (0 for terminals).  Automata differing only in their accepting sets
    share one graph and its lazily built indexes.
    """

    def __init__(self, keys: Sequence[StateId], levels: Sequence[int], raw: Sequence[RawTransition]):
        self.keys = keys
        self.levels = levels
        self.raw = raw

    def __len__(self) -> int:
        return len(self.keys)

    @cached_property
    def ids(self) -> dict[StateId, int]:
        return {q: i for i, q in enumerate(self.keys)}

    @cached_property
    def states(self) -> dict[StateId, int]:
        return dict(zip(self.keys, self.levels))

    @cached_property
    def transitions(self) -> tuple[Transition, ...]:
        k = self.keys
        return tuple(Transition(p, tuple(k[i] for i in args), k[t]) for p, args, t in self.raw)

    @cached_property
    def terminal_ids(self) -> dict[str, int]:
        return {self.keys[i].symbol: i for i, lvl in enumerate(self.levels) if lvl == 0}

    @cached_property
    def index(self) -> dict[tuple[Production, tuple[int, ...]], int]:
        return {(p, args): t for p, args, t in self.raw}

    @cached_property
    def by_func_args(self) -> dict[tuple[str, tuple[int, ...]], list[int]]:
        out: dict = defaultdict(list)
        for p, args, t in self.raw:
            if p.func is not None:
                out[p.func, args].append(t)
        return dict(out)

    @cached_property
    def unit_out(self) -> dict[int, list[int]]:
        out: dict = defaultdict(list)
        for p, args, t in self.raw:
            if p.func is None:
                out[args[0]].append(t)
        return dict(out)


@dataclass(frozen=True, eq=False)
class Cfta:
    grammar: Grammar
    width: int
    graph: Graph
    accepting: frozenset
    height_bound: int

    def __post_init__(self) -> None:
        ids = self.graph.ids
        stray = [q for q in self.accepting if q not in ids]
        if stray:
            raise ValueError(f"accepting states missing from the automaton: {stray[:3]}")

    def __len__(self) -> int:
        return len(self.graph)

    @property
    def states(self) -> dict[StateId, int]:
        """Every state mapped to the scope level at which it was first built."""
        return self.graph.states

    @property
    def transitions(self) -> tuple[Transition, ...]:
        return self.graph.transitions

    @property
    def terminal_states(self) -> dict[str, StateId]:
        return {s: self.graph.keys[i] for s, i in self.graph.terminal_ids.items()}

    @cached_property
    def accepting_ids(self) -> frozenset[int]:
        ids = self.graph.ids
        return frozenset(ids[q] for q in self.accepting)

    def with_accepting(self, accepting: Iterable[StateId]) -> "Cfta":
        return Cfta(self.grammar, self.width, self.graph, frozenset(accepting), self.height_bound)


# -- saturation --------------------------------------------------------------

Key = Hashable
Handler = Callable[[tuple[int, ...], list], Optional[Key]]


def _saturate(
    grammar: Grammar,
    leaves: dict[str, Key],
    make_handler: Callable[[Production], Handler],
    bound: int,
) -> tuple[list[Key], list[int], list[RawTransition]]:
    """Apply the Term and Prod rules level by level up to scope level ``bound``.

    Keys are tuples whose first item is the symbol.  ``make_handler(prod)``
    returns a function mapping an argument tuple of state numbers (and the
    key list) to the target key, or ``None`` when no state results.  A
    recursive production fires at level L on argument tuples whose
    same-cycle arguments were all built below L with at least one built at
    exactly L - 1; every other production fires once, at level 1.
    """
    index: dict[Key, int] = {}
    keys: list[Key] = []
    levels: list[int] = []
    by_sym: dict[str, list[int]] = {s: [] for s in (*grammar.terminals, *grammar.nonterminals)}
    raw: list[RawTransition] = []
    for sym, key in leaves.items():
        index[key] = len(keys)
        by_sym[sym].append(len(keys))
        keys.append(key)
        levels.append(0)

    for comp_index, comp in enumerate(grammar.sccs):
        prods = [(p, make_handler(p)) for s in comp for p in grammar.by_lhs[s]]
        limit = bound if grammar.scc_is_recursive(comp_index) else 1
        # start of the states built at the previous level, per symbol
        mark = {s: 0 for s in comp}
        for level in range(1, limit + 1):
            created: list[int] = []
            for prod, handle in prods:
                rec = grammar.is_recursive(prod)
                if rec != (level > 1):
                    continue
                for combo in _combos(grammar, prod, comp_index, by_sym, mark, rec):
                    key = handle(combo, keys)
                    if key is None:
                        continue
                    i = index.get(key)
                    if i is None:
                        i = index[key] = len(keys)
                        keys.append(key)
                        levels.append(level)
                        created.append(i)
                    raw.append((prod, combo, i))
            if not created and level > 1:
                break
            for s in comp:
                mark[s] = len(by_sym[s])
            for i in created:
                by_sym[keys[i][0]].append(i)
    return keys, levels, raw


def _combos(grammar, prod, comp_index, by_sym, mark, rec):
    pools = [by_sym[a] for a in prod.args]
    if not rec:
        return itertools.product(*pools)
    same = [grammar.scc_of.get(a) == comp_index for a in prod.args]
    # semi-naive split: position j is the first same-cycle argument taken
    # from the previous level; earlier ones come from strictly older levels
    parts = []
    for j, sj in enumerate(same):
        if not sj:
            continue
        choice = []
        for i, a in enumerate(prod.args):
            if not same[i]:
                choice.append(pools[i])
            elif i < j:
                choice.append(pools[i][: mark[a]])
            elif i == j:
                choice.append(pools[i][mark[a]:])
            else:
                choice.append(pools[i])
        parts.append(itertools.product(*choice))
    return itertools.chain.from_iterable(parts)


# -- construction ------------------------------------------------------------


def _length_limits(outputs: Sequence[Value], len_slack: Optional[int]):
    if len_slack is None or not outputs or not all(isinstance(o, str) for o in outputs):
        return None
    return tuple(len(o) + len_slack for o in outputs)


def build_graph(grammar: Grammar, envs: Sequence[Env], outputs: Sequence[Value], height: int,
                len_slack: Optional[int]) -> Graph:
    """States and transitions over the inputs ``envs``.

    With text outputs, start-symbol states longer than the matching output
    plus ``len_slack`` are not built (``None`` turns this off).
    """
    if height < 1:
        raise ValueError("height bound must be >= 1")
    leaves = {}
    for t, term in grammar.terminals.items():
        vals = tuple(term(env) for env in envs)
        if None not in vals:
            leaves[t] = StateId(t, vals)
    limits = _length_limits(outputs, len_slack)

    def make_handler(prod: Production) -> Handler:
        lhs = prod.lhs
        limited = limits is not None and lhs == grammar.start
        b = grammar.builtins.get(prod.func) if prod.func is not None else None
        if b is None or b.identity:
            def compute(combo, keys):
                return keys[combo[0]].values
        else:
            fn = b.fn

            def compute(combo, keys):
                vals = tuple(map(fn, *[keys[c].values for c in combo]))
                return None if None in vals else vals

        if not limited:
            def handle(combo, keys):
                vals = compute(combo, keys)
                return None if vals is None else StateId(lhs, vals)
        else:
            def handle(combo, keys):
                vals = compute(combo, keys)
                if vals is None:
                    return None
                for v, lim in zip(vals, limits):
                    if len(v) > lim:
                        return None
                return StateId(lhs, vals)
        return handle

    keys, levels, raw = _saturate(grammar, leaves, make_handler, height)
    return Graph(keys, levels, raw)


def build_cfta(grammar: Grammar, env: Env, output: Value, height: int,
               len_slack: Optional[int] = 1) -> Cfta:
    """Automaton accepting the programs that map ``env`` to ``output``.

    States for the start symbol whose text value is longer than the output
    plus ``len_slack`` are never built; ``len_slack=None`` disables this.
    """
    return build_cfta_dataset(grammar, [(env, output)], height, len_slack)


def build_cfta_dataset(grammar: Grammar, examples: Sequence[tuple[Env, Value]], height: int,
                       len_slack: Optional[int] = 1) -> Cfta:
    envs = [env for env, _ in examples]
    outputs = tuple(o for _, o in examples)
    graph = build_graph(grammar, envs, outputs, height, len_slack)
    goal = StateId(grammar.start, outputs)
    accepting = frozenset([goal]) if goal in graph.ids else frozenset()
    return Cfta(grammar, len(examples), graph, accepting, height)


def _check_same_grammar(a: Grammar, b: Grammar) -> None:
    if a is b:
        return
    if (a.start, a.nonterminals, a.productions, tuple(a.terminals), tuple(a.builtins)) != (
        b.start, b.nonterminals, b.productions, tuple(b.terminals), tuple(b.builtins)
    ):
        raise GrammarMismatchError("automata were built over different grammars")


def product_graph(a: Cfta, b: Cfta) -> tuple[Graph, list[tuple[int, int]]]:
    """Re-saturated product of two automata.

    Returns the product graph and, for each product state, the pair of
    component state numbers it was built from.
    """
    _check_same_grammar(a.grammar, b.grammar)
    ga, gb = a.graph, b.graph
    leaves = {}
    for sym, i in ga.terminal_ids.items():
        j = gb.terminal_ids.get(sym)
        if j is not None:
            leaves[sym] = (sym, i, j)
    ia, ib = ga.index, gb.index

    def make_handler(prod: Production) -> Handler:
        lhs = prod.lhs

        def handle(combo, keys):
            ta = ia.get((prod, tuple([keys[c][1] for c in combo])))
            if ta is None:
                return None
            tb = ib.get((prod, tuple([keys[c][2] for c in combo])))
            if tb is None:
                return None
            return (lhs, ta, tb)

        return handle

    keys, levels, raw = _saturate(a.grammar, leaves, make_handler,
                                  min(a.height_bound, b.height_bound))
    merged = [StateId(s, ga.keys[i].values + gb.keys[j].values) for s, i, j in keys]
    return Graph(merged, levels, raw), [(i, j) for _, i, j in keys]


def intersect(a: Cfta, b: Cfta) -> Cfta:
    """Product automaton; state values are ``a``'s vector followed by ``b``'s.

    The product is re-saturated under the smaller of the two height bounds,
    so on programs within that bound it accepts exactly what both accept.
    """
    graph, pairs = product_graph(a, b)
    acc_a, acc_b = a.accepting_ids, b.accepting_ids
    accepting = frozenset(graph.keys[k] for k, (i, j) in enumerate(pairs)
                          if i in acc_a and j in acc_b)
    return Cfta(a.grammar, a.width + b.width, graph, accepting,
                min(a.height_bound, b.height_bound))


# -- queries -----------------------------------------------------------------


def _unit_closure(g: Graph, labels: set[int]) -> set[int]:
    todo = list(labels)
    unit_out = g.unit_out
    while todo:
        q = todo.pop()
        for r in unit_out.get(q, ()):
            if r not in labels:
                labels.add(r)
                todo.append(r)
    return labels


def _labels(g: Graph, p: Program) -> set[int]:
    if isinstance(p, Leaf):
        q = g.terminal_ids.get(p.symbol)
        return _unit_closure(g, {q}) if q is not None else set()
    kids = [_labels(g, c) for c in p.children]
    out: set[int] = set()
    for combo in itertools.product(*kids):
        out.update(g.by_func_args.get((p.func, combo), ()))
    return _unit_closure(g, out)


def accepts(a: Cfta, p: Program) -> bool:
    return not a.accepting_ids.isdisjoint(_labels(a.graph, p))


def enumerate_accepted(a: Cfta, max_size: int, max_count: int) -> list[Program]:
    """Distinct accepted programs of size <= ``max_size``, ordered by (size, text)."""
    if max_size < 1 or max_count < 1:
        raise ValueError("max_size and max_count must be >= 1")
    g = a.graph
    table: dict[int, dict[int, set[Program]]] = defaultdict(lambda: defaultdict(set))
    funcs = [(p, args, t) for p, args, t in g.raw if p.func is not None]
    out: list[Program] = []
    for size in range(1, max_size + 1):
        if size == 1:
            for sym, q in g.terminal_ids.items():
                table[q][1].add(Leaf(sym))
        for p, args, t in funcs:
            if not args:
                if size == 1:
                    table[t][1].add(Node(p.func, ()))
                continue
            for parts in _compositions(size - 1, len(args)):
                pools = [table[q][n] if q in table else () for q, n in zip(args, parts)]
                if not all(pools):
                    continue
                for kids in itertools.product(*pools):
                    table[t][size].add(Node(p.func, kids))
        _close_units(g, table, size)
        found: set[Program] = set()
        for q in a.accepting_ids:
            if q in table:
                found |= table[q][size]
        out.extend(sorted(found, key=format_program))
        if len(out) >= max_count:
            return out[:max_count]
    return out


def _close_units(g: Graph, table, size: int) -> None:
    changed = True
    while changed:
        changed = False
        for q, targets in g.unit_out.items():
            progs = table[q][size] if q in table else None
            if not progs:
                continue
            for r in targets:
                before = len(table[r][size])
                table[r][size] |= progs
                changed |= len(table[r][size]) != before


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def dump(a: Cfta) -> str:
    """One ``f(q1, ..., qk) -> q`` line per transition, sorted."""
    return "\n".join(sorted(str(t) for t in a.transitions))
