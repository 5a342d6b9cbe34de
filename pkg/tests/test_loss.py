import random

import pytest
from hypothesis import given, settings, strategies as st

from noisysynth.core import INF
from noisysynth.dsl import parse_program, string_grammar, toy_grammar
from noisysynth.loss import (LOSSES, DataSet, dataset_loss, dl, get_loss, likelihood_loss,
                             n_substitution, one_delete, squared, zero_inf, zero_one)

from oracles import naive_osa

TOY = toy_grammar()
short = st.text(alphabet="abc", max_size=6)


@pytest.mark.parametrize("o, c, want", [("abc", "abc", 0), ("abc", "abd", 1), (9, 12, 1)])
def test_zero_one(o, c, want):
    assert zero_one(o, c) == want


def test_zero_inf():
    assert zero_inf("a", "a") == 0
    assert zero_inf("a", "b") == INF


@pytest.mark.parametrize("a, b, want", [("abc", "abc", 0), ("ab", "ba", 1), ("kitten", "sitting", 3),
                                        ("ca", "abc", 3), ("", "abc", 3)])
def test_dl_examples(a, b, want):
    assert dl(a, b) == want
    assert naive_osa(a, b) == want


def test_dl_rejects_non_text():
    with pytest.raises(TypeError):
        dl(1, "a")


@settings(max_examples=300)
@given(short, short)
def test_dl_properties(a, b):
    d = dl(a, b)
    assert d == dl(b, a)
    assert (d == 0) == (a == b)
    assert d <= max(len(a), len(b))
    assert d == naive_osa(a, b)


@pytest.mark.parametrize("prog, data, want", [("FreeHafer", "reeHafer", 1), ("abc", "abc", 0),
                                              ("abc", "xyz", INF), ("abc", "abcd", INF),
                                              ("aab", "ab", 1)])
def test_one_delete(prog, data, want):
    assert one_delete(prog, data) == want


@given(short, short)
def test_one_delete_matches_definition(a, b):
    single = len(a) == len(b) + 1 and any(a[:i] + a[i + 1:] == b for i in range(len(a)))
    w = one_delete(a, b)
    assert (w == 1) == single
    assert (w == 0) == (a == b)


@pytest.mark.parametrize("prog, data, want", [("123", "124", 1), ("123", "1234", INF), ("000", "111", 3)])
def test_n_substitution(prog, data, want):
    assert n_substitution(prog, data) == want


@given(short, short)
def test_n_substitution_is_hamming(a, b):
    w = n_substitution(a, b)
    if len(a) != len(b):
        assert w == INF
    else:
        assert w == sum(x != y for x, y in zip(a, b))


@pytest.mark.parametrize("name", sorted(LOSSES))
def test_all_losses_zero_on_equal(name):
    v = 7 if name == "sq" else "abc"
    assert get_loss(name)(v, v) == 0


def test_noise_losses_take_program_output_first():
    # registry signature is (expected, produced); 1del deletes from the produced text
    assert get_loss("1del")("reeHafer", "FreeHafer") == 1
    assert get_loss("1del")("FreeHafer", "reeHafer") == INF


def test_unknown_loss():
    with pytest.raises(ValueError):
        get_loss("mse")


def test_squared():
    assert squared(9, 12) == 9


def test_dataset_loss():
    data = DataSet.of([({"x": 1}, 9), ({"x": 2}, 12), ({"x": 3}, 0), ({"x": 4}, 1)])
    p = parse_program("(× (+ x 2) 3)", TOY)
    assert dataset_loss(p, data.subset([0, 1]), get_loss("0inf"), TOY) == 0
    assert dataset_loss(p, data, get_loss("01"), TOY) == 2
    assert dataset_loss(p, data.subset([0, 2]), get_loss("0inf"), TOY) == INF


def test_dataset_loss_undefined_output_is_infinite():
    g = string_grammar()
    p = parse_program("(Str (SubStr x (Pos x Digits 2 Start) (ConstPos -1)))", g)
    data = DataSet.of([({"x": "a1"}, "1")])
    for name in ("01", "dl", "nsub"):
        assert dataset_loss(p, data, get_loss(name), g) == INF


def test_dataset_loss_depends_only_on_outputs():
    rng = random.Random(0)
    data = DataSet.of([({"x": x}, rng.randint(0, 20)) for x in range(4)])
    # both compute x + 6
    a = parse_program("(+ (+ x 3) 3)", TOY)
    b = parse_program("(+ (+ (+ x 2) 2) 2)", TOY)
    for name in ("01", "sq", "0inf"):
        assert dataset_loss(a, data, get_loss(name), TOY) == dataset_loss(b, data, get_loss(name), TOY)


def test_dedupe_keeps_first_occurrences():
    data = DataSet.of([({"x": 1}, 9), ({"x": 1}, 9), ({"x": 2}, 12)])
    assert len(data.dedupe()) == 2
    assert data.dedupe().outputs == [9, 12]


def test_likelihood_loss():
    loss = likelihood_loss("nll", lambda o, c: 1.0 if o == c else 0.0)
    assert loss("a", "a") == 0
    assert loss("a", "b") == INF
