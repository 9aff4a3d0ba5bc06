"""Conversion between opinion spans and per-token BIO tag sequences.

``encode`` turns a sentence's spans into one label per token; ``decode``
recovers spans from any label sequence, repairing ill-formed input: an
``I-X`` without a valid predecessor is treated as ``B-X``. Same-role spans
that overlap or touch are unioned before encoding, since BIO cannot keep
them apart; cross-role overlaps are an error (filter them first).
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .corpus import BIO_LABELS, Role, Sentence, Span, bio_label, label_role
from .errors import CodecError, ValidationError

# One label per token, drawn from BIO_LABELS.
TagSequence = Tuple[str, ...]


def validate_tags(labels: Sequence[str], n_tokens: Optional[int] = None) -> TagSequence:
    for i, label in enumerate(labels):
        if label not in BIO_LABELS:
            raise ValidationError(f"position {i}: unknown BIO label {label!r}")
    if n_tokens is not None and len(labels) != n_tokens:
        raise ValidationError(
            f"tag sequence length {len(labels)} does not match token count {n_tokens}"
        )
    return tuple(labels)


def union_same_role(spans: Iterable[Span]) -> Set[Span]:
    """Merge overlapping or adjacent spans of the same role."""
    by_role: Dict[Role, List[Span]] = {}
    for span in spans:
        by_role.setdefault(span.role, []).append(span)
    merged: Set[Span] = set()
    for role, group in by_role.items():
        group.sort(key=Span.sort_key)
        cur_start, cur_end = group[0].start, group[0].end
        for span in group[1:]:
            if span.start <= cur_end:
                cur_end = max(cur_end, span.end)
            else:
                merged.add(Span(role, cur_start, cur_end))
                cur_start, cur_end = span.start, span.end
        merged.add(Span(role, cur_start, cur_end))
    return merged


def encode(sentence: Sentence) -> TagSequence:
    """BIO labels for a sentence's spans (same-role spans pre-unioned).

    Raises CodecError on a cross-role token overlap, naming the token and
    the two roles involved.
    """
    merged = union_same_role(sentence.spans())
    owner: Dict[int, Span] = {}
    for span in sorted(merged, key=Span.sort_key):
        for i in range(span.start, span.end):
            if i in owner:
                raise CodecError(
                    f"sentence '{sentence.id}': cross-role overlap at token {i} "
                    f"({owner[i].role.value} vs {span.role.value})"
                )
            owner[i] = span
    labels = ["O"] * len(sentence.tokens)
    for span in merged:
        labels[span.start] = bio_label("B", span.role)
        for i in range(span.start + 1, span.end):
            labels[i] = bio_label("I", span.role)
    return tuple(labels)


def decode(labels: Sequence[str]) -> Set[Span]:
    """Spans for a label sequence; total over the 7-label alphabet.

    Maximal ``B-X (I-X)*`` runs become spans. An orphan ``I-X`` (no same-role
    predecessor) starts a new span, which preserves recall from imperfect
    taggers at the cost of inventing a boundary.
    """
    validate_tags(labels)
    spans: Set[Span] = set()
    open_role: Optional[Role] = None
    open_start = 0
    for i, label in enumerate(labels):
        role = label_role(label)
        starts = label.startswith("B-")
        if open_role is not None and (role is not open_role or starts or role is None):
            spans.add(Span(open_role, open_start, i))
            open_role = None
        if role is not None and open_role is None:
            open_role, open_start = role, i
    if open_role is not None:
        spans.add(Span(open_role, open_start, len(labels)))
    return spans
