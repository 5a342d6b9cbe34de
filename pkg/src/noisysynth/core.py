"""Run-time values, weights and environments shared by every other module.

Values are plain Python objects: ``str`` for text, ``int`` for integers,
:class:`Direction` for match boundaries and :class:`Token` for token classes.
Weights are non-negative floats where ``math.inf`` stands for an infinite
loss or cost.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Union

__all__ = [
    "INF",
    "Direction",
    "Env",
    "Token",
    "UnboundVariableError",
    "Value",
    "Weight",
    "WEIGHT_TOL",
    "format_value",
    "lookup",
    "weight",
    "weight_add",
    "weights_close",
]


class Direction(enum.Enum):
    START = "Start"
    END = "End"

    def __repr__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Token:
    """A token class matched against an input string.

    Matches are the maximal non-overlapping matches of ``pattern`` found
    left to right.
    """

    name: str
    pattern: str = field(compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_regex", re.compile(self.pattern))

    def matches(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in self._regex.finditer(text) if m.end() > m.start()]

    def __repr__(self) -> str:
        return self.name


Value = Union[str, int, Direction, Token]
Weight = float
Env = Mapping[str, Value]

INF: Weight = math.inf
WEIGHT_TOL = 1e-9


class UnboundVariableError(KeyError):
    """Raised when a program reads a variable missing from its environment."""


def lookup(env: Env, name: str) -> Value:
    try:
        return env[name]
    except KeyError:
        raise UnboundVariableError(name) from None


def weight(x: float) -> Weight:
    """Validate and coerce ``x`` into a weight (a non-negative float or inf)."""
    w = float(x)
    if math.isnan(w) or w < 0:
        raise ValueError(f"weights must be non-negative, got {x!r}")
    return w


def weight_add(a: Weight, b: Weight) -> Weight:
    return a + b


def weights_close(a: Weight, b: Weight) -> bool:
    if a == b:
        return True
    return abs(a - b) <= WEIGHT_TOL


def format_value(v: Value) -> str:
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    return repr(v)
