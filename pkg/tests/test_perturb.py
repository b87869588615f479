import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from punctrobust.evaluate import attachment_scores
from punctrobust.perturb import (
    AlignmentError,
    PerturbConfig,
    PerturbError,
    attach_stripped,
    inject_punct,
    strip_for_parsing,
    strip_punct,
)
from punctrobust.tree import COMMA, DOT, PunctClass, is_projective, is_punct, validate

from conftest import dominates, make_sentence, sentences

DC = PunctClass.DOTS_AND_COMMAS


class FixedDraws:
    """Stands in for a generator: returns a fixed (n, 2) draw matrix."""

    def __init__(self, draws):
        self.draws = np.asarray(draws, dtype=float)

    def random(self, shape):
        assert self.draws.shape == shape
        return self.draws


def test_strip_appositive(appositive):
    stripped, log = strip_punct(appositive, DC)
    assert stripped.forms == ["John", "27", "likes", "jazz"]
    assert stripped.heads == [3, 1, 0, 3]
    assert [t.deprel for t in stripped.tokens] == ["nsubj", "amod", "root", "dobj"]
    assert [r.original_position for r in log.removed] == [2, 4, 7]
    assert log.lifted_dependents == 0


def test_strip_without_punct_is_identity():
    s = make_sentence(["a", "b"], [0, 1])
    stripped, log = strip_punct(s, DC)
    assert stripped == s
    assert log.removed == [] and log.lifted_dependents == 0


def test_strip_lifts_dependents_of_removed_comma():
    # "x , y z": y hangs off the comma, which hangs off x
    s = make_sentence(["x", ",", "y", "z"], [0, 1, 2, 1])
    stripped, log = strip_punct(s, DC)
    assert stripped.forms == ["x", "y", "z"]
    assert stripped.heads == [0, 1, 1]
    assert log.lifted_dependents == 1


def test_strip_refuses_punct_root_and_all_punct():
    with pytest.raises(PerturbError):
        strip_punct(make_sentence([".", "a"], [0, 1]), DC)
    with pytest.raises(PerturbError):
        strip_punct(make_sentence([","], [0]), DC)


def test_inject_with_zero_probabilities_is_identity(appositive):
    out, log = inject_punct(appositive, PerturbConfig(0.0, 0.0))
    assert out == appositive
    assert log.injected == []


def test_comma_before_every_word():
    s = make_sentence(["John", "likes", "jazz"], [2, 0, 2])
    out, log = inject_punct(s, PerturbConfig(chi=1.0, delta=0.0))
    assert out.forms == [",", "John", ",", "likes", ",", "jazz"]
    # first comma is sentence-initial and takes the root token
    assert out.heads == [4, 4, 2, 0, 4, 4]
    assert log.commas == 3 and log.dots == 0


def test_injected_dot_can_break_projectivity():
    s = make_sentence(["big", "dogs", "bark"], [2, 3, 0])
    draws = [[1.0, 0.0], [1.0, 1.0], [1.0, 1.0]]
    out, log = inject_punct(s, PerturbConfig(chi=0.0, delta=0.5), rng=FixedDraws(draws))
    assert out.forms == ["big", ".", "dogs", "bark"]
    assert out.heads == [3, 4, 4, 0]
    assert log.made_nonprojective is True
    assert not is_projective(out)


def test_attach_stripped_restores_appositive(appositive):
    core, log = strip_punct(appositive, DC)
    assert attach_stripped(core, log) == appositive


def test_attach_stripped_without_removals_is_identity():
    s = make_sentence(["a", "b"], [0, 1])
    core, log = strip_punct(s, DC)
    assert attach_stripped(core, log) is core


def test_dot_follows_the_predicted_root():
    gold = make_sentence(["John", "likes", "jazz", "."], [2, 0, 2, 2])
    core, log = strip_punct(gold, DC)
    predicted = make_sentence(["John", "likes", "jazz"], [3, 3, 0])
    out = attach_stripped(predicted, log)
    assert out.forms == ["John", "likes", "jazz", "."]
    assert out.heads == [3, 3, 0, 3]


def test_attach_stripped_rejects_mismatched_core():
    gold = make_sentence(["a", "b", "."], [0, 1, 1])
    _, log = strip_punct(gold, DC)
    with pytest.raises(AlignmentError):
        attach_stripped(make_sentence(["a", "c"], [0, 1]), log)
    with pytest.raises(AlignmentError):
        attach_stripped(make_sentence(["a"], [0]), log)


def test_strip_for_parsing_ignores_input_heads():
    a = make_sentence(["x", ",", "y", "."], [0, 1, 1, 1])
    b = make_sentence(["x", ",", "y", "."], [3, 3, 0, 3])
    assert strip_for_parsing(a)[0] == strip_for_parsing(b)[0]


def test_perturb_config_rejects_bad_probability():
    with pytest.raises(ValueError):
        PerturbConfig(chi=1.5)
    with pytest.raises(ValueError):
        PerturbConfig(delta=-0.1)


probabilities = st.floats(0.0, 1.0)


@given(sentences(), probabilities, probabilities, st.integers(0, 2**63))
def test_inject_output_is_a_valid_tree(s, chi, delta, seed):
    out, log = inject_punct(s, PerturbConfig(chi, delta, master_seed=seed))
    assert validate(out).ok
    assert len(out) == len(s) + len(log.injected)
    assert len(log.injected) <= 2 * len(s)


@given(sentences(), probabilities, probabilities, st.integers(0, 2**63))
def test_inject_preserves_original_structure(s, chi, delta, seed):
    out, log = inject_punct(s, PerturbConfig(chi, delta, master_seed=seed))
    injected = {t.new_position for t in log.injected}
    survivors = [t for t in out.tokens if t.id not in injected]
    assert len(survivors) == len(s)
    position_of = {0: 0}
    position_of.update({orig.id: new.id for orig, new in zip(s.tokens, survivors)})
    for orig, new in zip(s.tokens, survivors):
        assert (orig.form, orig.deprel) == (new.form, new.deprel)
        assert new.head == position_of[orig.head]
    for t in log.injected:
        assert out[t.new_position].form in (COMMA, DOT)
        assert out[t.new_position].deprel == "punct"


@given(sentences(), probabilities, probabilities, st.integers(0, 2**63))
def test_strip_after_inject_equals_strip(s, chi, delta, seed):
    out, _ = inject_punct(s, PerturbConfig(chi, delta, master_seed=seed))
    assert strip_punct(out, DC)[0] == strip_punct(s, DC)[0]


@given(sentences())
def test_strip_output_is_valid_and_lifts_to_ancestors(s):
    stripped, log = strip_punct(s, DC)
    assert validate(stripped).ok
    assert len(stripped) == len(s) - len(log.removed)
    assert not any(is_punct(t, DC) for t in stripped.tokens)
    kept = [t.id for t in s.tokens if not is_punct(t, DC)]
    heads = s.heads
    for new, old_id in zip(stripped.tokens, kept):
        old_head = 0 if new.head == 0 else kept[new.head - 1]
        assert dominates(heads, old_head, old_id)
        assert old_head != old_id


@given(sentences(), probabilities, probabilities, st.integers(0, 2**63))
def test_gold_scores_are_invariant_under_perturbation(s, chi, delta, seed):
    injected, _ = inject_punct(s, PerturbConfig(chi, delta, master_seed=seed))
    stripped, _ = strip_punct(s, DC)
    for variant in (injected, stripped):
        report = attachment_scores([s], [variant], DC)
        assert report.head_correct == report.both_correct == report.scored_tokens


@given(sentences(), st.integers(0, 2**63))
def test_strip_then_reattach_restores_dots_and_commas_convention(s, seed):
    # a tree whose punctuation already follows the convention comes back exactly
    conventional, _ = inject_punct(strip_punct(s, DC)[0], PerturbConfig(0.3, 0.3, master_seed=seed))
    core, log = strip_punct(conventional, DC)
    assert attach_stripped(core, log) == conventional


@settings(max_examples=30)
@given(st.lists(sentences(), min_size=1, max_size=6), st.integers(0, 2**63))
def test_injection_is_independent_of_processing_order(doc, seed):
    config = PerturbConfig(0.2, 0.2, master_seed=seed)
    forward = [inject_punct(s, config, ordinal=i)[0] for i, s in enumerate(doc)]
    backward = {i: inject_punct(doc[i], config, ordinal=i)[0] for i in reversed(range(len(doc)))}
    assert forward == [backward[i] for i in range(len(doc))]


def test_injection_count_matches_binomial_mean():
    s = make_sentence([f"w{i}" for i in range(20)], [0] + [1] * 19)
    chi, delta = 0.1, 0.05
    total, draws = 0, 0
    for ordinal in range(2000):
        _, log = inject_punct(s, PerturbConfig(chi, delta, master_seed=3), ordinal=ordinal)
        total += len(log.injected)
        draws += len(s)
    expected = draws * (chi + delta)
    se = math.sqrt(draws * (chi * (1 - chi) + delta * (1 - delta)))
    assert abs(total - expected) <= 3 * se


def test_same_seed_same_output_different_seed_differs(appositive):
    a = inject_punct(appositive, PerturbConfig(0.5, 0.5, master_seed=1))[0]
    b = inject_punct(appositive, PerturbConfig(0.5, 0.5, master_seed=1))[0]
    c = [inject_punct(appositive, PerturbConfig(0.5, 0.5, master_seed=k))[0] for k in range(2, 8)]
    assert a == b
    assert any(x != a for x in c)


def test_injected_tokens_carry_punct_columns(appositive):
    out, log = inject_punct(appositive, PerturbConfig(1.0, 1.0))
    for t in log.injected:
        tok = out[t.new_position]
        assert (tok.upos, tok.deprel, tok.xpos) == ("PUNCT", "punct", tok.form)
