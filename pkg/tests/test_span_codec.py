import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import love_school, opinion, random_overlap_free_sentence, sent, span
from sentigraph import BIO_LABELS, CodecError, Role, ValidationError, decode, encode, union_same_role


def test_encode_love_school():
    assert encode(love_school()) == ("B-HOLDER", "B-EXP", "B-TARG")


def test_encode_no_opinions_all_o():
    assert encode(sent("s", ["a", "b", "c"])) == ("O", "O", "O")


def test_encode_unions_overlapping_same_role():
    # expressions [1,3) and [2,4) merge to [1,4)
    s = sent(
        "u", ["w0", "w1", "w2", "w3", "w4"],
        opinions=[
            opinion(expressions=[span("e", 1, 3)]),
            opinion(expressions=[span("e", 2, 4)]),
        ],
    )
    assert encode(s) == ("O", "B-EXP", "I-EXP", "I-EXP", "O")


def test_encode_unions_adjacent_same_role():
    s = sent(
        "adj", ["w0", "w1", "w2"],
        opinions=[
            opinion(expressions=[span("e", 0, 1)]),
            opinion(expressions=[span("e", 1, 3)]),
        ],
    )
    assert encode(s) == ("B-EXP", "I-EXP", "I-EXP")


def test_encode_multi_token_span():
    s = sent(
        "m", ["the", "front", "desk", "shone"],
        opinions=[opinion(targets=[span("t", 1, 3)], expressions=[span("e", 3, 4)])],
    )
    assert encode(s) == ("O", "B-TARG", "I-TARG", "B-EXP")


def test_encode_cross_role_overlap_names_token_and_roles():
    s = sent(
        "x", ["w0", "w1", "w2"],
        opinions=[opinion(targets=[span("t", 0, 2)], expressions=[span("e", 1, 3)])],
    )
    with pytest.raises(CodecError) as err:
        encode(s)
    message = str(err.value)
    assert "token 1" in message
    assert "TARGET" in message and "EXPRESSION" in message


def test_decode_simple_run():
    assert decode(["B-TARG", "I-TARG", "O"]) == {span("t", 0, 2)}


def test_decode_repairs_orphan_inside():
    assert decode(["O", "I-EXP", "I-EXP"]) == {span("e", 1, 3)}


def test_decode_repairs_role_switch():
    assert decode(["B-TARG", "I-EXP"]) == {span("t", 0, 1), span("e", 1, 2)}


def test_decode_b_after_b_splits():
    assert decode(["B-TARG", "B-TARG"]) == {span("t", 0, 1), span("t", 1, 2)}


def test_decode_rejects_unknown_label():
    with pytest.raises(ValidationError):
        decode(["B-THING"])


def test_union_same_role_keeps_disjoint():
    spans = {span("t", 0, 1), span("t", 2, 3), span("e", 1, 2)}
    assert union_same_role(spans) == spans


def test_round_trip_on_random_sentences():
    rng = random.Random(99)
    for k in range(300):
        s = random_overlap_free_sentence(rng, f"s{k}")
        assert decode(encode(s)) == s.spans()


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(BIO_LABELS), min_size=0, max_size=15))
def test_decode_total_over_alphabet(labels):
    spans = decode(labels)
    for sp in spans:
        assert 0 <= sp.start < sp.end <= len(labels)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(BIO_LABELS), min_size=1, max_size=15))
def test_repair_idempotence(labels):
    # encoding the spans decoded from any sequence yields well-formed BIO
    spans = decode(labels)
    if not spans:
        return
    expressions = {s for s in spans if s.role is Role.EXPRESSION}
    # tuples need an expression anchor; park a synthetic one past the
    # decoded spans when the sequence had none (no expression exists, so
    # no same-role union or overlap can result)
    if not expressions:
        expressions = {span("e", len(labels), len(labels) + 1)}
    s = sent(
        "re",
        [f"w{i}" for i in range(len(labels) + 1)],
        opinions=[
            opinion(
                holders={x for x in spans if x.role is Role.HOLDER},
                targets={x for x in spans if x.role is Role.TARGET},
                expressions=expressions,
            )
        ],
    )
    labels2 = encode(s)
    for i, label in enumerate(labels2):
        if label.startswith("I-"):
            assert labels2[i - 1] in (f"B{label[1:]}", label)
