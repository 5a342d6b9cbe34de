import random

import pytest
from hypothesis import given, strategies as st

from noisysynth.loss import DataSet, n_substitution, one_delete
from noisysynth.noise import CyclicDelete, DigitReplace, cyclic_delete, digit_replace


def rows(outputs):
    return DataSet.of([({"x": str(i)}, o) for i, o in enumerate(outputs)])


def test_cyclic_delete_wraps():
    assert cyclic_delete(rows(["abc"] * 4)).outputs == ["bc", "ac", "ab", "bc"]


def test_cyclic_delete_preserve_all_is_identity():
    data = rows(["abc", "de"])
    assert cyclic_delete(data, preserve_last=2) == data


def test_cyclic_delete_single_char():
    assert cyclic_delete(rows(["x"])).outputs == [""]


def test_cyclic_delete_preserves_tail():
    out = cyclic_delete(rows(["abc", "abc", "abc"]), preserve_last=1).outputs
    assert out == ["bc", "ac", "abc"]


@pytest.mark.parametrize("outputs, preserve", [([""], 0), (["ab"], 2), (["ab"], -1)])
def test_cyclic_delete_errors(outputs, preserve):
    with pytest.raises(ValueError):
        cyclic_delete(rows(outputs), preserve)


@given(st.lists(st.text(min_size=1, max_size=8), min_size=1, max_size=8), st.data())
def test_cyclic_delete_lengths_and_link(outputs, data):
    keep = data.draw(st.integers(0, len(outputs)))
    noisy = cyclic_delete(rows(outputs), keep).outputs
    for i, (o, n) in enumerate(zip(outputs, noisy)):
        if i < len(outputs) - keep:
            assert len(n) == len(o) - 1
            assert one_delete(o, n) == 1
        else:
            assert n == o


def test_digit_replace_zero_is_identity():
    data = rows(["425-555-0123", "no digits"])
    assert digit_replace(data, 0.0, 1) == data


def test_digit_replace_non_digits_untouched():
    data = rows(["abc-def", "  "])
    assert digit_replace(data, 1.0, 3) == data


def test_digit_replace_reproducible():
    data = rows(["0123456789" * 3] * 5)
    assert digit_replace(data, 0.5, 42) == digit_replace(data, 0.5, 42)
    assert digit_replace(data, 0.5, 42) != digit_replace(data, 0.5, 43)


def test_digit_replace_known_stream():
    # pins the generator: MT19937 seeded with 7
    out = digit_replace(rows(["00000"]), 1.0, 7).outputs[0]
    rng = random.Random(7)
    want = ""
    for _ in range(5):
        assert rng.random() < 1.0
        want += str(rng.randrange(10))
    assert out == want


@pytest.mark.parametrize("b", [0.2, 0.5, 1.0])
def test_digit_replace_rate(b):
    data = rows(["0123456789" * 100] * 12)
    noisy = digit_replace(data, b, 11)
    changed = sum(n_substitution(o, c) for o, c in zip(noisy.outputs, data.outputs))
    assert abs(changed / 12_000 - 0.9 * b) <= 0.03


def test_digit_replace_b_range():
    with pytest.raises(ValueError):
        digit_replace(rows(["1"]), 1.5, 0)
    with pytest.raises(ValueError):
        DigitReplace(-0.1, 0)


def test_specs_and_provenance():
    data = rows(["abc", "def"])
    assert CyclicDelete(1).apply(data).outputs == ["bc", "def"]
    assert DigitReplace(0.3, 9).provenance()["seed"] == 9
    assert CyclicDelete().provenance() == {"kind": "cyclic_delete", "preserve_last": 0}
