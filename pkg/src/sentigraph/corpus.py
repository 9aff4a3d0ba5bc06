"""Data model and dataset I/O for opinion extraction.

Holds the token/span/opinion containers shared by every pipeline stage,
plus the dataset-level operations: JSON and CoNLL (de)serialization,
distribution statistics, cross-role overlap filtering, and group
up-sampling.

JSON dataset schema (one file per dataset)::

    {"name": str,
     "sentences": [
        {"id": str, "text": str,
         "tokens": [{"text": str, "start": int, "end": int, "pos": str|null}, ...],
         "opinions": [{"holders": [[s, e], ...],
                       "targets": [[s, e], ...],
                       "expressions": [[s, e], ...],
                       "polarity": str|null}, ...]}]}

Span pairs are half-open token-index ranges. Token ``start``/``end`` are
character offsets (Unicode code points) into the sentence text.

CoNLL format: one token per line, blank line between sentences, a
``# sent_id = <id>`` comment before each sentence, and four columns::

    index   token   pos   bio_label

POS is ``_`` when absent. The BIO label alphabet is fixed:
``O, B-HOLDER, I-HOLDER, B-TARG, I-TARG, B-EXP, I-EXP``. CoNLL is a lossy
projection: how spans group into opinion tuples is not representable, so
a CoNLL round trip preserves span sets but flattens each sentence's
opinions into a single tuple.
"""

from __future__ import annotations

import json
import random
import re
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import ParseError, ValidationError


class Role(Enum):
    HOLDER = "HOLDER"
    TARGET = "TARGET"
    EXPRESSION = "EXPRESSION"


class OverlapPolicy(Enum):
    DROP_SENTENCE = "DROP_SENTENCE"
    PRIORITY_KEEP = "PRIORITY_KEEP"


class FileFormat(Enum):
    JSON = "JSON"
    CONLL = "CONLL"


# Fixed BIO label alphabet, shared by the CoNLL format and every tagger.
ROLE_SUFFIX = {Role.HOLDER: "HOLDER", Role.TARGET: "TARG", Role.EXPRESSION: "EXP"}
SUFFIX_ROLE = {suffix: role for role, suffix in ROLE_SUFFIX.items()}
BIO_LABELS = ("O", "B-HOLDER", "I-HOLDER", "B-TARG", "I-TARG", "B-EXP", "I-EXP")

# Priority used by OverlapPolicy.PRIORITY_KEEP: higher-priority roles keep
# their tokens, lower-priority spans are truncated around them.
ROLE_PRIORITY = (Role.EXPRESSION, Role.TARGET, Role.HOLDER)


def bio_label(prefix: str, role: Role) -> str:
    return f"{prefix}-{ROLE_SUFFIX[role]}"


def label_role(label: str) -> Optional[Role]:
    """Role of a BIO label, or None for ``O``."""
    if label == "O":
        return None
    return SUFFIX_ROLE[label.split("-", 1)[1]]


@dataclass(frozen=True)
class Token:
    text: str
    char_start: int
    char_end: int
    pos: Optional[str] = None

    def __post_init__(self):
        if self.char_start < 0 or self.char_start >= self.char_end:
            raise ValidationError(
                f"token {self.text!r}: invalid character range "
                f"[{self.char_start}, {self.char_end})"
            )


@dataclass(frozen=True)
class Span:
    """Half-open token-index range with a role."""

    role: Role
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.start >= self.end:
            raise ValidationError(
                f"span: invalid token range [{self.start}, {self.end})"
            )

    @property
    def length(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def sort_key(self) -> Tuple[int, int, str]:
        return (self.start, self.end, self.role.value)


@dataclass(frozen=True)
class OpinionTuple:
    """One opinion: holder/target span sets anchored by expression spans.

    ``polarity`` is stored verbatim for round-trip fidelity and never
    consumed by any pipeline stage.
    """

    holders: frozenset = frozenset()
    targets: frozenset = frozenset()
    expressions: frozenset = frozenset()
    polarity: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "holders", frozenset(self.holders))
        object.__setattr__(self, "targets", frozenset(self.targets))
        object.__setattr__(self, "expressions", frozenset(self.expressions))
        if not self.expressions:
            raise ValidationError("opinion tuple has no expression span")
        for field_name, spans, role in (
            ("holders", self.holders, Role.HOLDER),
            ("targets", self.targets, Role.TARGET),
            ("expressions", self.expressions, Role.EXPRESSION),
        ):
            for span in spans:
                if span.role is not role:
                    raise ValidationError(
                        f"opinion tuple: {field_name} contains a span with role "
                        f"{span.role.value}"
                    )

    def spans(self) -> frozenset:
        return self.holders | self.targets | self.expressions


@dataclass(frozen=True)
class Sentence:
    id: str
    text: str
    tokens: Tuple[Token, ...] = ()
    opinions: Tuple[OpinionTuple, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "opinions", tuple(self.opinions))
        if not self.id:
            raise ValidationError("sentence id must be non-empty")
        prev_end = None
        for tok in self.tokens:
            if prev_end is not None and tok.char_start < prev_end:
                raise ValidationError(
                    f"sentence '{self.id}': tokens overlap or are out of order "
                    f"at character offset {tok.char_start}"
                )
            prev_end = tok.char_end
        n = len(self.tokens)
        for opinion in self.opinions:
            for span in opinion.spans():
                if span.end > n:
                    raise ValidationError(
                        f"sentence '{self.id}': span [{span.start}, {span.end}) "
                        f"exceeds token count {n}"
                    )

    def spans(self, role: Optional[Role] = None) -> set:
        """Distinct spans across all opinions, optionally filtered by role."""
        out = set()
        for opinion in self.opinions:
            out |= opinion.spans()
        if role is not None:
            out = {s for s in out if s.role is role}
        return out

    def distinct_role_count(self) -> int:
        return len({s.role for s in self.spans()})


@dataclass(frozen=True)
class Dataset:
    name: str
    sentences: Tuple[Sentence, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        seen = set()
        for s in self.sentences:
            if s.id in seen:
                raise ValidationError(f"duplicate sentence id '{s.id}' in dataset")
            seen.add(s.id)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def by_id(self) -> dict:
        return {s.id: s for s in self.sentences}


@dataclass(frozen=True)
class RoleStats:
    count: int
    max_count: int
    avg_count: float


@dataclass(frozen=True)
class DistributionStats:
    """Span-count distribution of a dataset.

    ``label_group_counts`` maps the number of distinct role categories
    present in a sentence (0-3) to the number of such sentences.
    """

    total_sentence: int
    source: RoleStats
    target: RoleStats
    expression: RoleStats
    label_group_counts: Mapping[int, int]

    def to_dict(self) -> dict:
        return {
            "total_sentence": self.total_sentence,
            "source_count": self.source.count,
            "source_max_count": self.source.max_count,
            "source_avg_count": self.source.avg_count,
            "target_count": self.target.count,
            "target_max_count": self.target.max_count,
            "target_avg_count": self.target.avg_count,
            "exp_count": self.expression.count,
            "exp_max_count": self.expression.max_count,
            "exp_avg_count": self.expression.avg_count,
            "label_group_counts": {str(k): v for k, v in sorted(self.label_group_counts.items())},
        }


# Table-style column order for the stats report.
STATS_COLUMNS = (
    "total_sentence",
    "source_count", "source_max_count", "source_avg_count",
    "target_count", "target_max_count", "target_avg_count",
    "exp_count", "exp_max_count", "exp_avg_count",
)


def compute_stats(ds: Dataset) -> DistributionStats:
    """Count spans per role and group sentences by distinct roles present.

    A span duplicated across several opinions of one sentence (same role,
    same range) is counted once.
    """
    total = len(ds.sentences)
    role_counts = {role: 0 for role in Role}
    role_max = {role: 0 for role in Role}
    groups = {k: 0 for k in range(4)}
    for sentence in ds.sentences:
        present = 0
        for role in Role:
            n = len(sentence.spans(role))
            role_counts[role] += n
            role_max[role] = max(role_max[role], n)
            if n:
                present += 1
        groups[present] += 1

    def role_stats(role: Role) -> RoleStats:
        count = role_counts[role]
        avg = round(count / total, 2) if total else 0.0
        return RoleStats(count=count, max_count=role_max[role], avg_count=avg)

    return DistributionStats(
        total_sentence=total,
        source=role_stats(Role.HOLDER),
        target=role_stats(Role.TARGET),
        expression=role_stats(Role.EXPRESSION),
        label_group_counts=groups,
    )


def merge_stats(stats: Sequence[DistributionStats]) -> DistributionStats:
    """Pool several per-dataset stats into one (averages recomputed)."""
    if not stats:
        raise ValidationError("merge_stats needs at least one stats object")
    total = sum(s.total_sentence for s in stats)

    def merge_role(parts: Sequence[RoleStats]) -> RoleStats:
        count = sum(p.count for p in parts)
        avg = round(count / total, 2) if total else 0.0
        return RoleStats(count=count, max_count=max(p.max_count for p in parts), avg_count=avg)

    groups = {k: 0 for k in range(4)}
    for s in stats:
        for k, v in s.label_group_counts.items():
            groups[k] = groups.get(k, 0) + v
    return DistributionStats(
        total_sentence=total,
        source=merge_role([s.source for s in stats]),
        target=merge_role([s.target for s in stats]),
        expression=merge_role([s.expression for s in stats]),
        label_group_counts=groups,
    )


# ---------------------------------------------------------------------------
# Overlap filtering and up-sampling
# ---------------------------------------------------------------------------


def _has_cross_role_overlap(sentence: Sentence) -> bool:
    indices = {role: set() for role in Role}
    for span in sentence.spans():
        indices[span.role] |= set(range(span.start, span.end))
    roles = list(Role)
    for i in range(len(roles)):
        for j in range(i + 1, len(roles)):
            if indices[roles[i]] & indices[roles[j]]:
                return True
    return False


def _longest_run(indices: Iterable[int]) -> Optional[Tuple[int, int]]:
    """Longest contiguous run as a half-open range; leftmost wins ties."""
    ordered = sorted(indices)
    if not ordered:
        return None
    best = (ordered[0], ordered[0] + 1)
    start = ordered[0]
    prev = ordered[0]
    for idx in ordered[1:]:
        if idx != prev + 1:
            if prev + 1 - start > best[1] - best[0]:
                best = (start, prev + 1)
            start = idx
        prev = idx
    if prev + 1 - start > best[1] - best[0]:
        best = (start, prev + 1)
    return best


def filter_overlapping(
    ds: Dataset, policy: OverlapPolicy = OverlapPolicy.DROP_SENTENCE
) -> Tuple[Dataset, List[str]]:
    """Resolve cross-role token overlaps.

    DROP_SENTENCE removes every sentence in which spans of two different
    roles share a token. PRIORITY_KEEP instead truncates the lower-priority
    span (priority EXPRESSION > TARGET > HOLDER); a span swallowed whole is
    dropped, and a span split in the middle keeps its longest remaining
    piece. Returns the filtered dataset and the ids of affected sentences.
    """
    kept: List[Sentence] = []
    report: List[str] = []
    for sentence in ds.sentences:
        if not _has_cross_role_overlap(sentence):
            kept.append(sentence)
            continue
        report.append(sentence.id)
        if policy is OverlapPolicy.DROP_SENTENCE:
            continue
        kept.append(_truncate_sentence(sentence))
    return Dataset(name=ds.name, sentences=tuple(kept)), report


def _truncate_sentence(sentence: Sentence) -> Sentence:
    exp_idx = set()
    for span in sentence.spans(Role.EXPRESSION):
        exp_idx |= set(range(span.start, span.end))

    def truncate(span: Span, blocked: set) -> Optional[Span]:
        run = _longest_run(set(range(span.start, span.end)) - blocked)
        if run is None:
            return None
        return Span(span.role, run[0], run[1])

    target_map = {t: truncate(t, exp_idx) for t in sentence.spans(Role.TARGET)}
    blocked = set(exp_idx)
    for new in target_map.values():
        if new is not None:
            blocked |= set(range(new.start, new.end))
    holder_map = {h: truncate(h, blocked) for h in sentence.spans(Role.HOLDER)}

    opinions = []
    for opinion in sentence.opinions:
        holders = {holder_map[h] for h in opinion.holders} - {None}
        targets = {target_map[t] for t in opinion.targets} - {None}
        opinions.append(
            OpinionTuple(
                holders=holders,
                targets=targets,
                expressions=opinion.expressions,
                polarity=opinion.polarity,
            )
        )
    return replace(sentence, opinions=tuple(opinions))


def upsample(ds: Dataset, seed: int) -> Dataset:
    """Balance distinct-role groups by duplicating sentences with replacement.

    Sentences are grouped by how many distinct role categories they contain
    (0-3); every smaller group is padded up to the largest group's size by
    seeded sampling with replacement. Originals are always retained and
    duplicates get derived ids (``origid#k``).
    """
    if not ds.sentences:
        raise ValidationError("cannot up-sample an empty dataset")
    groups: dict = {}
    for sentence in ds.sentences:
        groups.setdefault(sentence.distinct_role_count(), []).append(sentence)
    target_size = max(len(g) for g in groups.values())
    rng = random.Random(seed)
    used_ids = {s.id for s in ds.sentences}
    dup_counter: dict = {}
    duplicates: List[Sentence] = []
    for key in sorted(groups):
        group = groups[key]
        for _ in range(target_size - len(group)):
            original = rng.choice(group)
            k = dup_counter.get(original.id, 0) + 1
            while f"{original.id}#{k}" in used_ids:
                k += 1
            dup_counter[original.id] = k
            new_id = f"{original.id}#{k}"
            used_ids.add(new_id)
            duplicates.append(replace(original, id=new_id))
    return Dataset(name=ds.name, sentences=tuple(ds.sentences) + tuple(duplicates))


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _span_pairs(spans: Iterable[Span]) -> List[List[int]]:
    return [[s.start, s.end] for s in sorted(spans, key=Span.sort_key)]


def dataset_to_dict(ds: Dataset) -> dict:
    return {
        "name": ds.name,
        "sentences": [
            {
                "id": s.id,
                "text": s.text,
                "tokens": [
                    {"text": t.text, "start": t.char_start, "end": t.char_end, "pos": t.pos}
                    for t in s.tokens
                ],
                "opinions": [
                    {
                        "holders": _span_pairs(o.holders),
                        "targets": _span_pairs(o.targets),
                        "expressions": _span_pairs(o.expressions),
                        "polarity": o.polarity,
                    }
                    for o in s.opinions
                ],
            }
            for s in ds.sentences
        ],
    }


def _require(record: Mapping, key: str, where: str):
    if key not in record:
        raise ParseError(f"{where}: missing key '{key}'")
    return record[key]


def _parse_span_list(pairs, role: Role, where: str) -> List[Span]:
    if not isinstance(pairs, list):
        raise ParseError(f"{where}: expected a list of [start, end] pairs")
    spans = []
    for pair in pairs:
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in pair)
        ):
            raise ParseError(f"{where}: malformed span pair {pair!r}")
        spans.append(Span(role, pair[0], pair[1]))
    return spans


def dataset_from_dict(obj: Mapping, source: str = "<memory>") -> Dataset:
    if not isinstance(obj, Mapping):
        raise ParseError(f"{source}: top-level value must be an object")
    name = _require(obj, "name", source)
    records = _require(obj, "sentences", source)
    if not isinstance(name, str):
        raise ParseError(f"{source}: 'name' must be a string")
    if not isinstance(records, list):
        raise ParseError(f"{source}: 'sentences' must be a list")
    sentences = []
    for i, record in enumerate(records):
        where = f"{source}: sentence record {i}"
        if not isinstance(record, Mapping):
            raise ParseError(f"{where}: expected an object")
        sent_id = _require(record, "id", where)
        if isinstance(sent_id, str) and sent_id:
            where = f"{source}: sentence record {i} (id='{sent_id}')"
        text = _require(record, "text", where)
        token_records = _require(record, "tokens", where)
        opinion_records = record.get("opinions", [])
        if not isinstance(sent_id, str) or not isinstance(text, str):
            raise ParseError(f"{where}: 'id' and 'text' must be strings")
        if not isinstance(token_records, list) or not isinstance(opinion_records, list):
            raise ParseError(f"{where}: 'tokens' and 'opinions' must be lists")
        tokens = []
        for j, tok in enumerate(token_records):
            tok_where = f"{where}, token {j}"
            if not isinstance(tok, Mapping):
                raise ParseError(f"{tok_where}: expected an object")
            t_text = _require(tok, "text", tok_where)
            t_start = _require(tok, "start", tok_where)
            t_end = _require(tok, "end", tok_where)
            t_pos = tok.get("pos")
            if not isinstance(t_text, str):
                raise ParseError(f"{tok_where}: 'text' must be a string")
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in (t_start, t_end)):
                raise ParseError(f"{tok_where}: 'start'/'end' must be integers")
            if t_pos is not None and not isinstance(t_pos, str):
                raise ParseError(f"{tok_where}: 'pos' must be a string or null")
            tokens.append(Token(text=t_text, char_start=t_start, char_end=t_end, pos=t_pos))
        opinions = []
        for j, op in enumerate(opinion_records):
            op_where = f"{where}, opinion {j}"
            if not isinstance(op, Mapping):
                raise ParseError(f"{op_where}: expected an object")
            polarity = op.get("polarity")
            if polarity is not None and not isinstance(polarity, str):
                raise ParseError(f"{op_where}: 'polarity' must be a string or null")
            try:
                opinions.append(
                    OpinionTuple(
                        holders=_parse_span_list(op.get("holders", []), Role.HOLDER, op_where),
                        targets=_parse_span_list(op.get("targets", []), Role.TARGET, op_where),
                        expressions=_parse_span_list(
                            _require(op, "expressions", op_where), Role.EXPRESSION, op_where
                        ),
                        polarity=polarity,
                    )
                )
            except ValidationError as err:
                raise ValidationError(f"sentence '{sent_id}': {err}") from err
        sentences.append(Sentence(id=sent_id, text=text, tokens=tokens, opinions=opinions))
    return Dataset(name=name, sentences=tuple(sentences))


# ---------------------------------------------------------------------------
# CoNLL serialization
# ---------------------------------------------------------------------------

_SENT_ID_RE = re.compile(r"#\s*sent_id\s*=\s*(.+?)\s*$")

# (sent_id, [(token_text, pos_or_None, bio_label), ...])
ConllBlock = Tuple[str, List[Tuple[str, Optional[str], str]]]


def write_conll_blocks(path: str, blocks: Iterable[ConllBlock]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sent_id, rows in blocks:
            if "\n" in sent_id or "\t" in sent_id:
                raise ValidationError(
                    f"sentence id {sent_id!r} contains characters not representable in CoNLL"
                )
            fh.write(f"# sent_id = {sent_id}\n")
            for i, (text, pos, label) in enumerate(rows):
                for value in (text, pos or ""):
                    if "\t" in value or "\n" in value:
                        raise ValidationError(
                            f"sentence '{sent_id}', token {i}: text/pos contains a tab or "
                            f"newline and cannot be written to CoNLL"
                        )
                fh.write(f"{i + 1}\t{text}\t{pos if pos is not None else '_'}\t{label}\n")
            fh.write("\n")


def read_conll_blocks(path: str) -> List[ConllBlock]:
    blocks: List[ConllBlock] = []
    sent_id: Optional[str] = None
    rows: List[Tuple[str, Optional[str], str]] = []

    def flush():
        nonlocal sent_id, rows
        if sent_id is not None:
            blocks.append((sent_id, rows))
        sent_id, rows = None, []

    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip():
                    flush()
                    continue
                if line.startswith("#"):
                    match = _SENT_ID_RE.match(line)
                    if match:
                        if sent_id is not None:
                            raise ParseError(
                                f"{path}:{lineno}: new '# sent_id' header without a blank "
                                f"line after sentence '{sent_id}'"
                            )
                        sent_id = match.group(1)
                    continue
                if sent_id is None:
                    raise ParseError(
                        f"{path}:{lineno}: token row before a '# sent_id =' header"
                    )
                cols = line.split("\t") if "\t" in line else line.split()
                if len(cols) != 4:
                    raise ParseError(
                        f"{path}:{lineno}: expected 4 columns (index token pos label), "
                        f"got {len(cols)}"
                    )
                index_str, text, pos, label = cols
                try:
                    index = int(index_str)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: token index {index_str!r} is not an integer")
                if index != len(rows) + 1:
                    raise ParseError(
                        f"{path}:{lineno}: token index {index} out of sequence "
                        f"(expected {len(rows) + 1})"
                    )
                if label not in BIO_LABELS:
                    raise ParseError(f"{path}:{lineno}: unknown BIO label {label!r}")
                rows.append((text, None if pos == "_" else pos, label))
        flush()
    except OSError as err:
        raise ParseError(f"{path}: cannot read: {err}") from err
    return blocks


def _sentence_from_conll(sent_id: str, rows: Sequence[Tuple[str, Optional[str], str]]) -> Sentence:
    from .span_codec import decode

    tokens = []
    offset = 0
    for text, pos, _ in rows:
        tokens.append(Token(text=text, char_start=offset, char_end=offset + len(text), pos=pos))
        offset += len(text) + 1
    spans = decode([label for _, _, label in rows])
    by_role = {role: {s for s in spans if s.role is role} for role in Role}
    opinions: List[OpinionTuple] = []
    if by_role[Role.EXPRESSION]:
        opinions.append(
            OpinionTuple(
                holders=by_role[Role.HOLDER],
                targets=by_role[Role.TARGET],
                expressions=by_role[Role.EXPRESSION],
            )
        )
    elif by_role[Role.HOLDER] or by_role[Role.TARGET]:
        raise ValidationError(
            f"sentence '{sent_id}': CoNLL block has holder/target spans but no "
            f"expression span; opinion tuples require an expression"
        )
    return Sentence(
        id=sent_id,
        text=" ".join(text for text, _, _ in rows),
        tokens=tuple(tokens),
        opinions=tuple(opinions),
    )


# ---------------------------------------------------------------------------
# Load / save entry points
# ---------------------------------------------------------------------------


def _coerce_format(fmt: Union[FileFormat, str]) -> FileFormat:
    if isinstance(fmt, FileFormat):
        return fmt
    try:
        return FileFormat[str(fmt).upper()]
    except KeyError:
        raise ValidationError(f"unknown dataset format {fmt!r} (expected JSON or CONLL)")


def load_dataset(path: str, fmt: Union[FileFormat, str] = FileFormat.JSON) -> Dataset:
    """Load a dataset file; every invariant is validated on the way in."""
    fmt = _coerce_format(fmt)
    if fmt is FileFormat.JSON:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as err:
            raise ParseError(f"{path}: cannot read: {err}") from err
        except json.JSONDecodeError as err:
            raise ParseError(f"{path}: line {err.lineno}: {err.msg}") from err
        return dataset_from_dict(obj, source=path)
    blocks = read_conll_blocks(path)
    sentences = tuple(_sentence_from_conll(sent_id, rows) for sent_id, rows in blocks)
    name = re.sub(r"\.[^.]*$", "", path.replace("\\", "/").rsplit("/", 1)[-1]) or "dataset"
    return Dataset(name=name, sentences=sentences)


def save_dataset(
    ds: Dataset,
    path: str,
    fmt: Union[FileFormat, str] = FileFormat.JSON,
    overlap_policy: Optional[OverlapPolicy] = None,
) -> None:
    """Write a dataset file.

    JSON is lossless. CoNLL requires overlap-free sentences: with
    ``overlap_policy=None`` a cross-role overlap raises; with a policy the
    dataset is filtered first and a warning lists the affected sentences.
    """
    fmt = _coerce_format(fmt)
    if fmt is FileFormat.JSON:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(dataset_to_dict(ds), fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
        return
    from .span_codec import encode

    if overlap_policy is not None:
        ds, report = filter_overlapping(ds, overlap_policy)
        if report:
            warnings.warn(
                f"CoNLL save under {overlap_policy.value} modified or dropped "
                f"{len(report)} overlapping sentence(s): {', '.join(report)}",
                stacklevel=2,
            )
    blocks = []
    for sentence in ds.sentences:
        labels = encode(sentence)
        rows = [
            (tok.text, tok.pos, label) for tok, label in zip(sentence.tokens, labels)
        ]
        blocks.append((sentence.id, rows))
    write_conll_blocks(path, blocks)
