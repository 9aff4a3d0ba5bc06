"""Evaluation metrics for every pipeline stage.

Token-level F1 per role (with and without collapsing B-/I- prefixes),
exact-match sentiment-graph F1, per-class relation P/R/F1, stratified
reports over single- vs multi-target sentences, and macro averaging
across datasets. The zero-denominator convention throughout is
P = R = F1 = 0, never NaN, so macro averages stay total.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence

from .aggregator import SentimentGraph, gold_graph
from .corpus import BIO_LABELS, Dataset, Role, Sentence, label_role
from .errors import ValidationError
from .relation import RelationInstance, generate_instances
from .span_codec import TagSequence, encode


class Stratum(Enum):
    ALL = "ALL"
    SINGLE_TARGET = "SINGLE_TARGET"
    MULTI_TARGET = "MULTI_TARGET"


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(precision=precision, recall=recall, f1=f1, tp=tp, fp=fp, fn=fn)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "PRF":
        return cls(
            precision=obj["precision"],
            recall=obj["recall"],
            f1=obj["f1"],
            tp=obj["tp"],
            fp=obj["fp"],
            fn=obj["fn"],
        )


def token_f1(
    gold: Sequence[Sequence[str]],
    pred: Sequence[Sequence[str]],
    collapse_bio: bool = False,
) -> Dict[Role, PRF]:
    """Per-role token P/R/F1 over aligned tag sequences.

    A true positive requires the gold and predicted label to name the same
    role and, unless ``collapse_bio``, to agree on the B-/I- prefix too.
    """
    if len(gold) != len(pred):
        raise ValidationError(
            f"gold has {len(gold)} sequences but pred has {len(pred)}"
        )
    counts = {role: [0, 0, 0] for role in Role}  # tp, fp, fn
    for k, (g_seq, p_seq) in enumerate(zip(gold, pred)):
        if len(g_seq) != len(p_seq):
            raise ValidationError(
                f"sequence {k}: gold length {len(g_seq)} != pred length {len(p_seq)}"
            )
        for g_label, p_label in zip(g_seq, p_seq):
            for where, label in (("gold", g_label), ("pred", p_label)):
                if label not in BIO_LABELS:
                    raise ValidationError(
                        f"sequence {k}: unknown {where} label {label!r}"
                    )
            g_role = label_role(g_label)
            p_role = label_role(p_label)
            matched = (
                g_role is not None
                and g_role is p_role
                and (collapse_bio or g_label == p_label)
            )
            if matched:
                counts[g_role][0] += 1
            else:
                if p_role is not None:
                    counts[p_role][1] += 1
                if g_role is not None:
                    counts[g_role][2] += 1
    return {role: PRF.from_counts(*counts[role]) for role in Role}


def _graph_keys(graph: SentimentGraph) -> set:
    keys = set()
    for t in graph.tuples:
        (expression,) = t.expressions
        keys.add((t.holders, t.targets, expression))
    return keys


def graph_f1(
    gold: Sequence[SentimentGraph], pred: Sequence[SentimentGraph]
) -> PRF:
    """Exact-match F1 over whole opinion tuples, aligned by sentence id.

    A predicted tuple is a true positive iff a gold tuple of the same
    sentence has the identical holder-span set, target-span set, and
    expression span. Matching is one-to-one.
    """
    def index(graphs: Sequence[SentimentGraph], side: str) -> Dict[str, SentimentGraph]:
        out: Dict[str, SentimentGraph] = {}
        for g in graphs:
            if g.sentence_id in out:
                raise ValidationError(f"duplicate sentence id '{g.sentence_id}' in {side} graphs")
            out[g.sentence_id] = g
        return out

    gold_by_id = index(gold, "gold")
    pred_by_id = index(pred, "pred")
    if set(gold_by_id) != set(pred_by_id):
        missing = sorted(set(gold_by_id) - set(pred_by_id))
        extra = sorted(set(pred_by_id) - set(gold_by_id))
        parts = []
        if missing:
            parts.append(f"missing from pred: {', '.join(missing)}")
        if extra:
            parts.append(f"extra in pred: {', '.join(extra)}")
        raise ValidationError(f"graphs do not align by sentence id ({'; '.join(parts)})")
    tp = fp = fn = 0
    for sent_id, g in gold_by_id.items():
        g_keys = _graph_keys(g)
        p_keys = _graph_keys(pred_by_id[sent_id])
        tp += len(g_keys & p_keys)
        fp += len(p_keys - g_keys)
        fn += len(g_keys - p_keys)
    return PRF.from_counts(tp, fp, fn)


def relation_prf(
    gold: Sequence[RelationInstance], pred: Sequence[bool]
) -> Dict[str, PRF]:
    """P/R/F1 for the positive and negative relation classes."""
    if len(gold) != len(pred):
        raise ValidationError(
            f"{len(gold)} gold instances but {len(pred)} predictions"
        )
    counts = {"positive": [0, 0, 0], "negative": [0, 0, 0]}
    for i, (inst, decision) in enumerate(zip(gold, pred)):
        if inst.label is None:
            raise ValidationError(f"instance {i}: gold label missing")
        for cls, truth in (("positive", inst.label), ("negative", not inst.label)):
            guessed = decision if cls == "positive" else not decision
            if truth and guessed:
                counts[cls][0] += 1
            elif guessed:
                counts[cls][1] += 1
            elif truth:
                counts[cls][2] += 1
    return {cls: PRF.from_counts(*c) for cls, c in counts.items()}


@dataclass(frozen=True)
class EvalReport:
    """Bundle of metrics for one dataset and stratum.

    Sections are None when the corresponding predictions were not supplied
    (token metrics need tag sequences; graph and relation metrics need
    graphs).
    """

    dataset: str
    stratum: Stratum
    sentence_count: int
    token: Optional[Mapping[Role, PRF]] = None
    token_collapsed: Optional[Mapping[Role, PRF]] = None
    graph: Optional[PRF] = None
    relation: Optional[Mapping[str, PRF]] = None

    def to_dict(self) -> dict:
        def roles(section):
            if section is None:
                return None
            return {role.value.lower(): prf.to_dict() for role, prf in section.items()}

        return {
            "dataset": self.dataset,
            "stratum": self.stratum.value,
            "sentence_count": self.sentence_count,
            "token": roles(self.token),
            "token_collapsed": roles(self.token_collapsed),
            "graph": self.graph.to_dict() if self.graph is not None else None,
            "relation": (
                {cls: prf.to_dict() for cls, prf in self.relation.items()}
                if self.relation is not None
                else None
            ),
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "EvalReport":
        def roles(section):
            if section is None:
                return None
            return {Role(key.upper()): PRF.from_dict(val) for key, val in section.items()}

        return cls(
            dataset=obj["dataset"],
            stratum=Stratum(obj["stratum"]),
            sentence_count=obj["sentence_count"],
            token=roles(obj.get("token")),
            token_collapsed=roles(obj.get("token_collapsed")),
            graph=PRF.from_dict(obj["graph"]) if obj.get("graph") is not None else None,
            relation=(
                {cls_: PRF.from_dict(val) for cls_, val in obj["relation"].items()}
                if obj.get("relation") is not None
                else None
            ),
        )


def in_stratum(sentence: Sentence, stratum: Stratum) -> bool:
    if stratum is Stratum.ALL:
        return True
    n_targets = len(sentence.spans(Role.TARGET))
    if stratum is Stratum.SINGLE_TARGET:
        return n_targets == 1
    return n_targets >= 2


def stratified_report(
    gold_ds: Dataset,
    pred_tags: Optional[Mapping[str, TagSequence]] = None,
    pred_graphs: Optional[Mapping[str, SentimentGraph]] = None,
    stratum: Stratum = Stratum.ALL,
    dataset_name: Optional[str] = None,
) -> EvalReport:
    """Evaluate predictions on the sentences of one stratum.

    Strata partition by the number of distinct gold target spans: exactly
    one (SINGLE_TARGET) or two and more (MULTI_TARGET); ALL keeps every
    sentence. The relation section scores, for every gold entity/expression
    candidate pair, whether the predicted graph connects it.
    """
    if pred_tags is None and pred_graphs is None:
        raise ValidationError("stratified_report needs tag sequences and/or graphs")
    selected = [s for s in gold_ds.sentences if in_stratum(s, stratum)]

    token = token_collapsed = graph = rel = None
    if pred_tags is not None:
        gold_seqs, pred_seqs = [], []
        for sentence in selected:
            if sentence.id not in pred_tags:
                raise ValidationError(f"no predicted tags for sentence '{sentence.id}'")
            gold_seqs.append(encode(sentence))
            pred_seqs.append(pred_tags[sentence.id])
        token = token_f1(gold_seqs, pred_seqs, collapse_bio=False)
        token_collapsed = token_f1(gold_seqs, pred_seqs, collapse_bio=True)
    if pred_graphs is not None:
        gold_graphs, predicted = [], []
        gold_insts: List[RelationInstance] = []
        decisions: List[bool] = []
        for sentence in selected:
            if sentence.id not in pred_graphs:
                raise ValidationError(f"no predicted graph for sentence '{sentence.id}'")
            predicted_graph = pred_graphs[sentence.id]
            gold_graphs.append(gold_graph(sentence))
            predicted.append(predicted_graph)
            entities = sentence.spans(Role.HOLDER) | sentence.spans(Role.TARGET)
            expressions = sentence.spans(Role.EXPRESSION)
            for inst in generate_instances(sentence, entities, expressions, gold=sentence.opinions):
                gold_insts.append(inst)
                decisions.append(_graph_connects(predicted_graph, inst))
        graph = graph_f1(gold_graphs, predicted)
        rel = relation_prf(gold_insts, decisions)
    return EvalReport(
        dataset=dataset_name if dataset_name is not None else gold_ds.name,
        stratum=stratum,
        sentence_count=len(selected),
        token=token,
        token_collapsed=token_collapsed,
        graph=graph,
        relation=rel,
    )


def _graph_connects(graph: SentimentGraph, inst: RelationInstance) -> bool:
    for t in graph.tuples:
        if inst.expression in t.expressions and (
            inst.entity in t.holders or inst.entity in t.targets
        ):
            return True
    return False


def macro_average(reports: Sequence[EvalReport]) -> EvalReport:
    """Unweighted mean of every P/R/F1 field; tp/fp/fn counts are summed.

    A section is averaged only if present in every input report.
    """
    if not reports:
        raise ValidationError("macro_average needs at least one report")

    def mean(values: Sequence[float]) -> float:
        return sum(values) / len(values)

    def avg_prf(parts: Sequence[PRF]) -> PRF:
        return PRF(
            precision=mean([p.precision for p in parts]),
            recall=mean([p.recall for p in parts]),
            f1=mean([p.f1 for p in parts]),
            tp=sum(p.tp for p in parts),
            fp=sum(p.fp for p in parts),
            fn=sum(p.fn for p in parts),
        )

    def avg_section(sections, keys):
        if any(section is None for section in sections):
            return None
        return {key: avg_prf([section[key] for section in sections]) for key in keys}

    strata = {r.stratum for r in reports}
    return EvalReport(
        dataset="+".join(r.dataset for r in reports),
        stratum=strata.pop() if len(strata) == 1 else Stratum.ALL,
        sentence_count=sum(r.sentence_count for r in reports),
        token=avg_section([r.token for r in reports], list(Role)),
        token_collapsed=avg_section([r.token_collapsed for r in reports], list(Role)),
        graph=(
            None
            if any(r.graph is None for r in reports)
            else avg_prf([r.graph for r in reports])
        ),
        relation=avg_section([r.relation for r in reports], ["positive", "negative"]),
    )


def format_report_table(reports: Sequence[EvalReport]) -> str:
    """Fixed-width table with Holder/Target/Expression F1 column order."""
    header = (
        "dataset", "stratum", "n_sent",
        "holder_f1", "target_f1", "expression_f1",
        "graph_f1", "rel_pos_f1", "rel_neg_f1",
    )
    rows = [header]
    for r in reports:
        def tok(role: Role) -> str:
            if r.token is None:
                return "-"
            return f"{r.token[role].f1:.3f}"

        rows.append(
            (
                r.dataset,
                r.stratum.value,
                str(r.sentence_count),
                tok(Role.HOLDER),
                tok(Role.TARGET),
                tok(Role.EXPRESSION),
                f"{r.graph.f1:.3f}" if r.graph is not None else "-",
                f"{r.relation['positive'].f1:.3f}" if r.relation is not None else "-",
                f"{r.relation['negative'].f1:.3f}" if r.relation is not None else "-",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)
