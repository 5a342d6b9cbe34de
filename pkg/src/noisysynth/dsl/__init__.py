"""DSL grammars, parse-tree programs and the interpreter."""

from .grammar import (
    Builtin,
    Grammar,
    GrammarError,
    Leaf,
    Node,
    ParseError,
    Production,
    Program,
    enumerate_programs,
    evaluate,
    format_program,
    parse_program,
    program_height,
    program_size,
)
from .strings import resolve_tokens, string_grammar
from .toy import boolean_grammar, toy_grammar

__all__ = [
    "Builtin",
    "Grammar",
    "GrammarError",
    "Leaf",
    "Node",
    "ParseError",
    "Production",
    "Program",
    "boolean_grammar",
    "enumerate_programs",
    "evaluate",
    "format_program",
    "parse_program",
    "program_height",
    "program_size",
    "resolve_tokens",
    "string_grammar",
    "toy_grammar",
]
