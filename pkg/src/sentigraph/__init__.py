"""Structured sentiment extraction: spans, relations, and opinion graphs.

A three-stage pipeline over tokenized sentences: a sequence tagger marks
holder/target/expression spans, a binary classifier decides which entity
and expression spans belong together, and a deterministic aggregator
assembles the decisions into per-sentence sentiment graphs. Ships with
dataset tooling (stats, overlap filtering, up-sampling), exact-match
evaluation metrics, and a CLI.
"""

from .aggregator import (
    SentimentGraph,
    aggregate,
    end_to_end,
    gold_graph,
    graph_from_sentence,
    graphs_to_dataset,
    write_triples,
)
from .corpus import (
    BIO_LABELS,
    Dataset,
    DistributionStats,
    FileFormat,
    OpinionTuple,
    OverlapPolicy,
    Role,
    RoleStats,
    Sentence,
    Span,
    Token,
    compute_stats,
    filter_overlapping,
    load_dataset,
    merge_stats,
    save_dataset,
    upsample,
)
from .errors import (
    AggregationError,
    CodecError,
    ConfigError,
    InputError,
    ModelError,
    ParseError,
    SentigraphError,
    StageError,
    ValidationError,
)
from .metrics import (
    PRF,
    EvalReport,
    Stratum,
    format_report_table,
    graph_f1,
    macro_average,
    relation_prf,
    stratified_report,
    token_f1,
)
from .relation import (
    RelationInstance,
    RelationKind,
    RelationModel,
    always_true_model,
    classify,
    featurize,
    generate_instances,
    train_logistic,
)
from .span_codec import TagSequence, decode, encode, union_same_role
from .taggers import (
    DEFAULT_POS_MAP,
    TaggerKind,
    TaggerModel,
    load_external_predictions,
    most_common_tagger,
    pos_chunk_tagger,
    tag,
    train_perceptron,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationError", "BIO_LABELS", "CodecError", "ConfigError", "DEFAULT_POS_MAP",
    "Dataset", "DistributionStats", "EvalReport", "FileFormat", "InputError",
    "ModelError", "OpinionTuple", "OverlapPolicy", "PRF", "ParseError",
    "RelationInstance", "RelationKind", "RelationModel", "Role", "RoleStats",
    "Sentence", "SentigraphError", "SentimentGraph", "Span", "StageError",
    "Stratum", "TagSequence", "TaggerKind", "TaggerModel", "Token",
    "ValidationError", "aggregate", "always_true_model", "classify",
    "compute_stats", "decode", "encode", "end_to_end", "featurize",
    "filter_overlapping", "format_report_table", "generate_instances",
    "gold_graph", "graph_f1", "graph_from_sentence", "graphs_to_dataset",
    "load_dataset", "load_external_predictions", "macro_average", "merge_stats",
    "most_common_tagger", "pos_chunk_tagger", "relation_prf", "save_dataset",
    "stratified_report", "tag", "token_f1", "train_logistic", "train_perceptron",
    "union_same_role", "upsample", "write_triples",
]
