"""Shared fixture builders for the test suite."""

from __future__ import annotations

import random
from typing import Iterable, Optional, Sequence, Tuple

from sentigraph import Dataset, OpinionTuple, Role, Sentence, Span, Token

ROLES = (Role.HOLDER, Role.TARGET, Role.EXPRESSION)


def span(role: str, start: int, end: int) -> Span:
    return Span({"h": Role.HOLDER, "t": Role.TARGET, "e": Role.EXPRESSION}[role], start, end)


def opinion(
    holders: Iterable[Span] = (),
    targets: Iterable[Span] = (),
    expressions: Iterable[Span] = (),
    polarity: Optional[str] = None,
) -> OpinionTuple:
    return OpinionTuple(
        holders=holders, targets=targets, expressions=expressions, polarity=polarity
    )


def sent(
    sent_id: str,
    words: Sequence[str],
    opinions: Iterable[OpinionTuple] = (),
    pos: Optional[Sequence[Optional[str]]] = None,
) -> Sentence:
    tokens = []
    offset = 0
    for i, word in enumerate(words):
        tokens.append(
            Token(
                text=word,
                char_start=offset,
                char_end=offset + len(word),
                pos=pos[i] if pos is not None else None,
            )
        )
        offset += len(word) + 1
    return Sentence(id=sent_id, text=" ".join(words), tokens=tuple(tokens), opinions=opinions)


def love_school() -> Sentence:
    """'I love school': holder I, expression love, target school."""
    return sent(
        "s-love",
        ["I", "love", "school"],
        opinions=[
            opinion(
                holders=[span("h", 0, 1)],
                targets=[span("t", 2, 3)],
                expressions=[span("e", 1, 2)],
            )
        ],
        pos=["PRON", "VERB", "NOUN"],
    )


def random_overlap_free_sentence(rng: random.Random, sent_id: str, max_tokens: int = 12) -> Sentence:
    """Random sentence whose span set is cross-role disjoint and has no
    same-role overlapping or adjacent spans (a fixed point of span union)."""
    n = rng.randint(1, max_tokens)
    spans = []
    i = 0
    while i < n:
        if rng.random() < 0.5:
            role = rng.choice(ROLES)
            if spans and spans[-1].end == i and spans[-1].role is role:
                i += 1
                continue
            end = min(i + rng.randint(1, 3), n)
            spans.append(Span(role, i, end))
            i = end
        else:
            i += 1
    if spans and not any(s.role is Role.EXPRESSION for s in spans):
        # no other expression exists, so relabeling cannot create same-role
        # adjacency
        spans[0] = Span(Role.EXPRESSION, spans[0].start, spans[0].end)
    opinions = []
    if spans:
        opinions.append(
            opinion(
                holders=[s for s in spans if s.role is Role.HOLDER],
                targets=[s for s in spans if s.role is Role.TARGET],
                expressions=[s for s in spans if s.role is Role.EXPRESSION],
            )
        )
    return sent(sent_id, [f"w{j}" for j in range(n)], opinions=opinions)


def random_dataset(rng: random.Random, n_sentences: int, name: str = "rand") -> Dataset:
    return Dataset(
        name=name,
        sentences=tuple(
            random_overlap_free_sentence(rng, f"r{k}") for k in range(n_sentences)
        ),
    )
