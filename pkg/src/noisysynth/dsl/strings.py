"""String transformation DSL.

    e   := Str(f) | Concat(f, e)
    f   := ConstStr(s) | SubStr(x, p, p)
    p   := Pos(x, tau, k, dir) | ConstPos(kc)
    dir := Start | End

Positions are gap indices ``0..len(x)``.  ``Pos`` picks the k-th match of a
token (negative k counts from the end) and returns its start or end gap.
``ConstPos(k)`` evaluates to the raw offset ``k``; ``SubStr`` resolves it
against the input, so a negative offset counts back from the end.
"""

from __future__ import annotations

import json
import operator
import re
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from ..core import Direction, Token, lookup
from .grammar import Builtin, Grammar, GrammarError, Production

__all__ = [
    "ALPHABETS",
    "DEFAULT_CONST_POS",
    "DEFAULT_KS",
    "DEFAULT_TOKENS",
    "DIGITS",
    "LOWERCASE",
    "STANDARD_TOKENS",
    "UPPERCASE",
    "WHITESPACE",
    "char_token",
    "const_pos",
    "pos",
    "punctuation_tokens",
    "resolve_tokens",
    "string_grammar",
    "substr",
]

DIGITS = Token("Digits", r"[0-9]+")
ALPHABETS = Token("Alphabets", r"[A-Za-z]+")
LOWERCASE = Token("Lowercase", r"[a-z]+")
UPPERCASE = Token("Uppercase", r"[A-Z]+")
WHITESPACE = Token("Whitespace", r"\s+")

STANDARD_TOKENS = {t.name: t for t in (DIGITS, ALPHABETS, LOWERCASE, UPPERCASE, WHITESPACE)}
DEFAULT_TOKENS = tuple(STANDARD_TOKENS.values())
DEFAULT_KS = (1, 2, 3, -1, -2, -3)
DEFAULT_CONST_POS = (0, 1, 2, 3, -1)


def char_token(c: str) -> Token:
    """A token matching each occurrence of the single character ``c``."""
    if len(c) != 1:
        raise ValueError(f"literal tokens match one character, got {c!r}")
    return Token("Char" + json.dumps(c, ensure_ascii=False), re.escape(c))


def punctuation_tokens(constants: Iterable[str]) -> list[Token]:
    seen: dict[str, None] = {}
    for s in constants:
        for c in s:
            if not c.isalnum() and not c.isspace():
                seen.setdefault(c)
    return [char_token(c) for c in seen]


def resolve_tokens(names: Iterable[str], constants: Sequence[str] = ()) -> list[Token]:
    """Map config token names to tokens.

    ``Punctuation`` expands to one literal token per punctuation character
    occurring in ``constants``; ``Char"c"`` names a literal token directly.
    """
    out: dict[str, Token] = {}
    for name in names:
        if name in STANDARD_TOKENS:
            toks = [STANDARD_TOKENS[name]]
        elif name == "Punctuation":
            toks = punctuation_tokens(constants)
        elif name.startswith('Char"'):
            toks = [char_token(json.loads(name[4:]))]
        else:
            raise GrammarError(f"unknown token class {name!r}")
        for t in toks:
            out.setdefault(t.name, t)
    return list(out.values())


@lru_cache(maxsize=1 << 16)
def _matches(token: Token, text: str) -> tuple[tuple[int, int], ...]:
    return tuple(token.matches(text))


def const_pos(x: str, k: int) -> Optional[int]:
    if k >= 0:
        return k if k <= len(x) else None
    p = len(x) + k + 1
    return p if p >= 0 else None


def pos(x: str, token: Token, k: int, d: Direction) -> Optional[int]:
    ms = _matches(token, x)
    if k >= 1:
        i = k - 1
    elif k <= -1:
        i = len(ms) + k
    else:
        return None
    if not 0 <= i < len(ms):
        return None
    start, end = ms[i]
    return start if d is Direction.START else end


def substr(x: str, p1: int, p2: int) -> Optional[str]:
    a = const_pos(x, p1)
    b = const_pos(x, p2)
    if a is None or b is None or a > b:
        return None
    return x[a:b]


def _identity(v):
    return v


STRING_BUILTINS = {
    "Str": Builtin(1, _identity, identity=True),
    "Concat": Builtin(2, operator.add),
    "ConstStr": Builtin(1, _identity, identity=True),
    "SubStr": Builtin(3, substr),
    "Pos": Builtin(4, pos),
    "ConstPos": Builtin(1, _identity, identity=True),
}


def string_grammar(
    constants: Sequence[str] = (),
    ks: Sequence[int] = DEFAULT_KS,
    tokens: Sequence[Token] = DEFAULT_TOKENS,
    const_positions: Sequence[int] = DEFAULT_CONST_POS,
    var: str = "x",
) -> Grammar:
    """Build the string DSL over input variable ``var``.

    ``ks`` are the occurrence indices available to ``Pos`` and
    ``const_positions`` the offsets available to ``ConstPos``.
    """
    if not ks:
        raise GrammarError("ks must be nonempty")
    if any(k == 0 for k in ks):
        raise GrammarError("Pos occurrence indices must be nonzero")
    if not tokens:
        raise GrammarError("tokens must be nonempty")
    constants = list(dict.fromkeys(constants))
    ints = list(dict.fromkeys([*ks, *const_positions]))

    terminals = {var: lambda env: lookup(env, var)}
    for s in constants:
        terminals[json.dumps(s, ensure_ascii=False)] = (lambda v: lambda env: v)(s)
    for k in ints:
        terminals[str(k)] = (lambda v: lambda env: v)(k)
    for t in tokens:
        terminals[t.name] = (lambda v: lambda env: v)(t)
    terminals["Start"] = lambda env: Direction.START
    terminals["End"] = lambda env: Direction.END

    prods = [
        Production("e", "Str", ("f",)),
        Production("e", "Concat", ("f", "e")),
        Production("f", "SubStr", (var, "p", "p")),
        Production("p", "Pos", (var, "tau", "k", "dir")),
    ]
    builtins = dict(STRING_BUILTINS)
    nonterminals = ["e", "f", "p", "k", "tau", "dir"]
    if constants:
        prods.insert(2, Production("f", "ConstStr", ("s",)))
        nonterminals.append("s")
        prods += [Production("s", None, (json.dumps(s, ensure_ascii=False),)) for s in constants]
    if const_positions:
        prods.append(Production("p", "ConstPos", ("kc",)))
        nonterminals.append("kc")
        prods += [Production("kc", None, (str(k),)) for k in const_positions]
    prods += [Production("k", None, (str(k),)) for k in ks]
    prods += [Production("tau", None, (t.name,)) for t in tokens]
    prods += [Production("dir", None, ("Start",)), Production("dir", None, ("End",))]
    return Grammar(terminals, nonterminals, prods, "e", builtins, name="strings")
