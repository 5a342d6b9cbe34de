"""Output corruption used to build noisy benchmark data.

Random draws come from Python's ``random.Random`` (MT19937), so a seed
reproduces the same corruption on every platform.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Union

from .loss import DataSet

__all__ = ["CyclicDelete", "DigitReplace", "NoiseSpec", "cyclic_delete", "digit_replace"]

RNG_ALGORITHM = "MT19937 (Python random.Random)"


def cyclic_delete(data: DataSet, preserve_last: int = 0) -> DataSet:
    """Delete character ``i mod len`` from output ``i``; the last ``preserve_last`` rows stay intact."""
    n = len(data)
    if not 0 <= preserve_last <= n:
        raise ValueError(f"preserve_last must lie in [0, {n}]")
    outputs = list(data.outputs)
    for i in range(n - preserve_last):
        o = outputs[i]
        if not isinstance(o, str) or not o:
            raise ValueError(f"row {i}: cyclic deletion needs a nonempty string output")
        j = i % len(o)
        outputs[i] = o[:j] + o[j + 1:]
    return data.with_outputs(outputs)


def digit_replace(data: DataSet, b: float, seed: int) -> DataSet:
    """Resample each output digit with probability ``b`` from a uniform digit."""
    if not 0.0 <= b <= 1.0:
        raise ValueError("b must lie in [0, 1]")
    rng = random.Random(seed)
    outputs = []
    for i, o in enumerate(data.outputs):
        if not isinstance(o, str):
            raise ValueError(f"row {i}: digit replacement needs a string output")
        chars = list(o)
        for j, ch in enumerate(chars):
            if "0" <= ch <= "9" and rng.random() < b:
                chars[j] = str(rng.randrange(10))
        outputs.append("".join(chars))
    return data.with_outputs(outputs)


@dataclass(frozen=True)
class CyclicDelete:
    preserve_last: int = 0

    def apply(self, data: DataSet) -> DataSet:
        return cyclic_delete(data, self.preserve_last)

    def provenance(self) -> dict:
        return {"kind": "cyclic_delete", "preserve_last": self.preserve_last}


@dataclass(frozen=True)
class DigitReplace:
    b: float
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")

    def apply(self, data: DataSet) -> DataSet:
        return digit_replace(data, self.b, self.seed)

    def provenance(self) -> dict:
        return {"kind": "digit_replace", "b": self.b, "seed": self.seed, "rng": RNG_ALGORITHM}


NoiseSpec = Union[CyclicDelete, DigitReplace]
