"""Grammars, parse-tree programs and their interpreter.

A grammar has terminals (evaluated directly in an environment), nonterminals
and productions ``lhs -> func(args...)``.  A production whose ``func`` is
``None`` is a unit alternative such as ``n := x``; unit steps do not appear
in program trees, so ``n := x`` contributes the bare leaf ``x``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from ..core import Env, Value

__all__ = [
    "Builtin",
    "Grammar",
    "GrammarError",
    "Leaf",
    "Node",
    "ParseError",
    "Production",
    "Program",
    "enumerate_programs",
    "evaluate",
    "format_program",
    "parse_program",
    "program_height",
    "program_size",
]


class GrammarError(ValueError):
    pass


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Builtin:
    """``identity`` marks a one-argument builtin returning its argument unchanged."""

    arity: int
    fn: Callable[..., Optional[Value]]
    identity: bool = False


@dataclass(frozen=True)
class Production:
    lhs: str
    func: Optional[str]
    args: tuple[str, ...]

    @property
    def is_unit(self) -> bool:
        return self.func is None

    def __str__(self) -> str:
        if self.func is None:
            return f"{self.lhs} := {self.args[0]}"
        return f"{self.lhs} := {self.func}({', '.join(self.args)})"


@dataclass(frozen=True)
class Leaf:
    symbol: str

    def __str__(self) -> str:
        return self.symbol


@dataclass(frozen=True)
class Node:
    func: str
    children: tuple["Program", ...]

    def __str__(self) -> str:
        return format_program(self)


Program = Union[Leaf, Node]
TerminalEval = Callable[[Env], Optional[Value]]


class Grammar:
    """A finite DSL grammar ``(T, N, P, s0)`` plus black-box builtins."""

    def __init__(
        self,
        terminals: Mapping[str, TerminalEval],
        nonterminals: Iterable[str],
        productions: Iterable[Production],
        start: str,
        builtins: Mapping[str, Builtin],
        name: str = "",
    ):
        self.name = name
        self.terminals = dict(terminals)
        self.nonterminals = tuple(nonterminals)
        self.productions = tuple(productions)
        self.start = start
        self.builtins = dict(builtins)
        self._validate()
        self.sccs = _strongly_connected(self.nonterminals, self.productions)
        self.scc_of = {s: i for i, comp in enumerate(self.sccs) for s in comp}
        self.by_lhs = {s: tuple(p for p in self.productions if p.lhs == s) for s in self.nonterminals}

    def _validate(self) -> None:
        clash = set(self.terminals) & set(self.nonterminals)
        if clash:
            raise GrammarError(f"symbols used as both terminal and nonterminal: {sorted(clash)}")
        if len(set(self.nonterminals)) != len(self.nonterminals):
            raise GrammarError("duplicate nonterminal")
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start!r} is not a nonterminal")
        symbols = set(self.terminals) | set(self.nonterminals)
        for p in self.productions:
            if p.lhs not in self.nonterminals:
                raise GrammarError(f"production lhs {p.lhs!r} is not a nonterminal")
            missing = [a for a in p.args if a not in symbols]
            if missing:
                raise GrammarError(f"{p}: unknown symbols {missing}")
            if p.func is None:
                if len(p.args) != 1:
                    raise GrammarError(f"{p}: unit production needs exactly one argument")
                continue
            if p.func not in self.builtins:
                raise GrammarError(f"{p}: unknown builtin {p.func!r}")
            if self.builtins[p.func].arity != len(p.args):
                raise GrammarError(f"{p}: arity mismatch")

    def is_terminal(self, symbol: str) -> bool:
        return symbol in self.terminals

    def is_recursive(self, prod: Production) -> bool:
        """True when some argument lies in the same recursion cycle as ``prod.lhs``."""
        comp = self.scc_of[prod.lhs]
        return any(self.scc_of.get(a) == comp for a in prod.args)

    def scc_is_recursive(self, index: int) -> bool:
        return any(self.is_recursive(p) for s in self.sccs[index] for p in self.by_lhs[s])

    def __repr__(self) -> str:
        return f"Grammar({self.name or self.start!r}, {len(self.productions)} productions)"


def _strongly_connected(nodes: Sequence[str], prods: Sequence[Production]) -> list[tuple[str, ...]]:
    # Tarjan; emits dependencies before dependents.
    edges: dict[str, list[str]] = {n: [] for n in nodes}
    for p in prods:
        edges[p.lhs].extend(a for a in p.args if a in edges)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    out: list[tuple[str, ...]] = []
    counter = itertools.count()

    def visit(v: str) -> None:
        index[v] = low[v] = next(counter)
        stack.append(v)
        on_stack.add(v)
        for w in edges[v]:
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(tuple(sorted(comp, key=nodes.index)))

    for n in nodes:
        if n not in index:
            visit(n)
    return out


# -- interpreter -------------------------------------------------------------


def evaluate(program: Program, env: Env, grammar: Grammar) -> Optional[Value]:
    """Run ``program`` on ``env``; ``None`` when a builtin is undefined on its inputs.

    Reading a variable that ``env`` does not bind raises
    :class:`~noisysynth.core.UnboundVariableError`.
    """
    if isinstance(program, Leaf):
        try:
            term = grammar.terminals[program.symbol]
        except KeyError:
            raise GrammarError(f"unknown terminal {program.symbol!r}") from None
        return term(env)
    try:
        builtin = grammar.builtins[program.func]
    except KeyError:
        raise GrammarError(f"unknown builtin {program.func!r}") from None
    args = []
    for child in program.children:
        v = evaluate(child, env, grammar)
        if v is None:
            return None
        args.append(v)
    return builtin.fn(*args)


def program_size(program: Program) -> int:
    if isinstance(program, Leaf):
        return 1
    return 1 + sum(program_size(c) for c in program.children)


def program_height(program: Program) -> int:
    if isinstance(program, Leaf):
        return 1
    return 1 + max((program_height(c) for c in program.children), default=0)


# -- S-expression syntax -----------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<open>\()
      | (?P<close>\))
      | (?P<atom>[^\s()"]*"(?:[^"\\]|\\.)*"|[^\s()"]+)
    )""",
    re.VERBOSE,
)


def format_program(program: Program) -> str:
    if isinstance(program, Leaf):
        return program.symbol
    if not program.children:
        return f"({program.func})"
    return f"({program.func} {' '.join(format_program(c) for c in program.children)})"


def _tokenize(text: str) -> Iterator[tuple[str, str]]:
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        assert kind is not None
        yield kind, m.group(kind)
        pos = m.end()


def parse_program(text: str, grammar: Grammar) -> Program:
    """Parse the canonical S-expression syntax produced by :func:`format_program`."""
    tokens = list(_tokenize(text))
    if not tokens:
        raise ParseError("empty program text")
    program, pos = _parse(tokens, 0, grammar)
    if pos != len(tokens):
        raise ParseError(f"trailing input after program: {tokens[pos][1]!r}")
    return program


def _parse(tokens: list[tuple[str, str]], pos: int, grammar: Grammar) -> tuple[Program, int]:
    if pos >= len(tokens):
        raise ParseError("unexpected end of input")
    kind, text = tokens[pos]
    if kind == "atom":
        if text not in grammar.terminals:
            raise ParseError(f"unknown terminal {text!r}")
        return Leaf(text), pos + 1
    if kind == "close":
        raise ParseError("unexpected ')'")
    pos += 1
    if pos >= len(tokens) or tokens[pos][0] != "atom":
        raise ParseError("expected a function name after '('")
    func = tokens[pos][1]
    if func not in grammar.builtins:
        raise ParseError(f"unknown function {func!r}")
    pos += 1
    children = []
    while True:
        if pos >= len(tokens):
            raise ParseError("missing ')'")
        if tokens[pos][0] == "close":
            pos += 1
            break
        child, pos = _parse(tokens, pos, grammar)
        children.append(child)
    arity = grammar.builtins[func].arity
    if arity != len(children):
        raise ParseError(f"{func} expects {arity} arguments, got {len(children)}")
    return Node(func, tuple(children)), pos


# -- enumeration -------------------------------------------------------------


def enumerate_programs(grammar: Grammar, height: int, symbol: Optional[str] = None) -> list[Program]:
    """All programs derivable from ``symbol`` within the bounded scope ``height``.

    Scope height counts only recursive steps: a production whose arguments
    stay in the lhs's recursion cycle adds one level on top of its deepest
    such argument, every other production sits at level 1.  This works on
    the grammar alone and serves as the brute-force reference for the
    automata.
    """
    if height < 1:
        raise ValueError("height must be >= 1")
    found: dict[str, dict[Program, int]] = {t: {Leaf(t): 0} for t in grammar.terminals}
    for s in grammar.nonterminals:
        found[s] = {}
    for comp_index, comp in enumerate(grammar.sccs):
        prods = [p for s in comp for p in grammar.by_lhs[s]]
        levels = height if grammar.scc_is_recursive(comp_index) else 1
        for level in range(1, levels + 1):
            fresh: list[tuple[str, Program]] = []
            for prod in prods:
                rec = grammar.is_recursive(prod)
                if rec != (level > 1):
                    continue
                pools = []
                for a in prod.args:
                    if grammar.scc_of.get(a) == grammar.scc_of[prod.lhs]:
                        pools.append([(p, h) for p, h in found[a].items() if h <= level - 1])
                    else:
                        pools.append(list(found[a].items()))
                for combo in itertools.product(*pools):
                    if rec and max(h for (_, h), a in zip(combo, prod.args)
                                   if grammar.scc_of.get(a) == grammar.scc_of[prod.lhs]) != level - 1:
                        continue
                    kids = tuple(p for p, _ in combo)
                    prog = kids[0] if prod.func is None else Node(prod.func, kids)
                    fresh.append((prod.lhs, prog))
            for lhs, prog in fresh:
                found[lhs].setdefault(prog, level)
    return list(found[symbol or grammar.start])
