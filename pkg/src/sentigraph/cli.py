"""Command-line interface.

Subcommands: ``stats``, ``convert``, ``train``, ``predict``, ``evaluate``,
and ``pipeline`` (filter, optionally up-sample, train both stages, predict,
aggregate, evaluate, all driven by a JSON config). Exit codes: 0 success,
1 runtime stage failure, 2 input or configuration validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from . import aggregator, corpus, metrics, relation, taggers
from .corpus import Dataset, FileFormat, OverlapPolicy, Role, STATS_COLUMNS
from .errors import ConfigError, InputError, SentigraphError, StageError
from .metrics import Stratum
from .span_codec import decode


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _fmt_table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    )


# ---------------------------------------------------------------------------
# Pipeline configuration
# ---------------------------------------------------------------------------


@dataclass
class TaggerConfig:
    kind: str = "PERCEPTRON"
    epochs: int = 10
    seed: int = 1
    pos_map: Optional[Dict[str, str]] = None


@dataclass
class RelationConfig:
    kind: str = "LOGISTIC"
    epochs: int = 30
    learning_rate: float = 0.5
    threshold: float = 0.5
    seed: int = 2
    class_weight: Optional[str] = None


@dataclass
class PipelineConfig:
    train: str
    test: str
    output_dir: str
    dev: Optional[str] = None
    overlap_policy: str = "DROP_SENTENCE"
    upsample: bool = False
    upsample_seed: int = 0
    tagger: TaggerConfig = field(default_factory=TaggerConfig)
    relation: RelationConfig = field(default_factory=RelationConfig)


def _cfg_get(obj: Mapping, key: str, kind, where: str, required: bool = False, default=None):
    if key not in obj:
        if required:
            raise ConfigError(f"config field '{where}{key}': missing")
        return default
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ConfigError(
            f"config field '{where}{key}': expected {kind.__name__}, got {value!r}"
        )
    return value


def load_config(path: str) -> PipelineConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as err:
        raise ConfigError(f"config file '{path}': cannot read: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file '{path}': line {err.lineno}: {err.msg}") from err
    if not isinstance(obj, dict):
        raise ConfigError("config file: top-level value must be an object")

    cfg = PipelineConfig(
        train=_cfg_get(obj, "train", str, "", required=True),
        test=_cfg_get(obj, "test", str, "", required=True),
        output_dir=_cfg_get(obj, "output_dir", str, "", required=True),
        dev=_cfg_get(obj, "dev", str, ""),
        overlap_policy=_cfg_get(obj, "overlap_policy", str, "", default="DROP_SENTENCE"),
        upsample=_cfg_get(obj, "upsample", bool, "", default=False),
        upsample_seed=_cfg_get(obj, "upsample_seed", int, "", default=0),
    )
    if cfg.overlap_policy not in OverlapPolicy.__members__:
        raise ConfigError(
            f"config field 'overlap_policy': unknown policy {cfg.overlap_policy!r}"
        )
    tagger_obj = obj.get("tagger", {})
    if not isinstance(tagger_obj, dict):
        raise ConfigError("config field 'tagger': expected an object")
    cfg.tagger = TaggerConfig(
        kind=_cfg_get(tagger_obj, "kind", str, "tagger.", default="PERCEPTRON").upper(),
        epochs=_cfg_get(tagger_obj, "epochs", int, "tagger.", default=10),
        seed=_cfg_get(tagger_obj, "seed", int, "tagger.", default=1),
        pos_map=tagger_obj.get("pos_map"),
    )
    if cfg.tagger.kind not in ("PERCEPTRON", "POS_CHUNK", "MOST_COMMON"):
        raise ConfigError(f"config field 'tagger.kind': unknown kind {cfg.tagger.kind!r}")
    if cfg.tagger.epochs < 0:
        raise ConfigError("config field 'tagger.epochs': must be >= 0")
    rel_obj = obj.get("relation", {})
    if not isinstance(rel_obj, dict):
        raise ConfigError("config field 'relation': expected an object")
    cfg.relation = RelationConfig(
        kind=_cfg_get(rel_obj, "kind", str, "relation.", default="LOGISTIC").upper(),
        epochs=_cfg_get(rel_obj, "epochs", int, "relation.", default=30),
        learning_rate=_cfg_get(rel_obj, "learning_rate", float, "relation.", default=0.5),
        threshold=_cfg_get(rel_obj, "threshold", float, "relation.", default=0.5),
        seed=_cfg_get(rel_obj, "seed", int, "relation.", default=2),
        class_weight=rel_obj.get("class_weight"),
    )
    if cfg.relation.kind not in ("LOGISTIC", "ALWAYS_TRUE"):
        raise ConfigError(f"config field 'relation.kind': unknown kind {cfg.relation.kind!r}")
    if cfg.relation.epochs < 1:
        raise ConfigError("config field 'relation.epochs': must be >= 1")
    if not cfg.relation.learning_rate > 0:
        raise ConfigError("config field 'relation.learning_rate': must be > 0")
    if not (0.0 < cfg.relation.threshold < 1.0):
        raise ConfigError("config field 'relation.threshold': must be in (0, 1)")
    for key, value in (("train", cfg.train), ("test", cfg.test), ("dev", cfg.dev)):
        if value is not None and not os.path.isfile(value):
            raise ConfigError(f"config field '{key}': file not found: {value}")
    return cfg


# ---------------------------------------------------------------------------
# Shared stage helpers
# ---------------------------------------------------------------------------


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InputError:
        raise
    except SentigraphError as err:
        raise StageError(f"stage '{name}': {err}") from err


def _gold_relation_instances(ds: Dataset) -> List[relation.RelationInstance]:
    instances = []
    for sentence in ds.sentences:
        entities = sentence.spans(Role.HOLDER) | sentence.spans(Role.TARGET)
        expressions = sentence.spans(Role.EXPRESSION)
        instances.extend(
            relation.generate_instances(sentence, entities, expressions, gold=sentence.opinions)
        )
    return instances


def _train_tagger(cfg: TaggerConfig, train_ds: Dataset) -> taggers.TaggerModel:
    if cfg.kind == "PERCEPTRON":
        return taggers.train_perceptron(train_ds, epochs=cfg.epochs, seed=cfg.seed)
    if cfg.kind == "POS_CHUNK":
        return taggers.pos_chunk_tagger(cfg.pos_map)
    return taggers.most_common_tagger()


def _train_relation(cfg: RelationConfig, train_ds: Dataset) -> relation.RelationModel:
    if cfg.kind == "ALWAYS_TRUE":
        return relation.always_true_model(threshold=cfg.threshold)
    instances = _gold_relation_instances(train_ds)
    model = relation.train_logistic(
        instances,
        train_ds,
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        seed=cfg.seed,
        class_weight=cfg.class_weight,
    )
    from dataclasses import replace

    return replace(model, threshold=cfg.threshold)


def _predict(
    ds: Dataset,
    tagger_model: taggers.TaggerModel,
    relation_model: relation.RelationModel,
    external_tags: Optional[Mapping[str, Sequence[str]]] = None,
):
    """Run stages 1-3 over a dataset.

    Returns (tags by id, graphs by id, scored instance rows).
    """
    tags: Dict[str, tuple] = {}
    graphs: Dict[str, aggregator.SentimentGraph] = {}
    rows = []
    for sentence in ds.sentences:
        if external_tags is not None:
            labels = tuple(external_tags[sentence.id])
        else:
            labels = taggers.tag(tagger_model, sentence)
        tags[sentence.id] = labels
        spans = decode(labels)
        entities = {s for s in spans if s.role is not Role.EXPRESSION}
        expressions = {s for s in spans if s.role is Role.EXPRESSION}
        instances = relation.generate_instances(sentence, entities, expressions)
        decisions = {}
        for inst in instances:
            decision, score = relation.classify(
                relation_model, sentence, inst, expressions=expressions
            )
            decisions[(inst.entity, inst.expression)] = decision
            rows.append((inst, score))
        graphs[sentence.id] = aggregator.aggregate(sentence, entities, expressions, decisions)
    return tags, graphs, rows


def _reports(
    ds: Dataset,
    tags: Optional[Mapping[str, Sequence[str]]],
    graphs: Optional[Mapping[str, aggregator.SentimentGraph]],
    strata: bool,
) -> List[metrics.EvalReport]:
    wanted = [Stratum.ALL] + ([Stratum.SINGLE_TARGET, Stratum.MULTI_TARGET] if strata else [])
    return [
        metrics.stratified_report(ds, pred_tags=tags, pred_graphs=graphs, stratum=stratum)
        for stratum in wanted
    ]


def run_pipeline(cfg: PipelineConfig) -> Dict[str, str]:
    """Execute the full pipeline; returns the artifact paths that were written."""
    policy = OverlapPolicy[cfg.overlap_policy]
    train_ds = _stage("load-train", corpus.load_dataset, cfg.train, FileFormat.JSON)
    test_ds = _stage("load-test", corpus.load_dataset, cfg.test, FileFormat.JSON)
    train_f, dropped = corpus.filter_overlapping(train_ds, policy)
    if dropped:
        print(
            f"overlap filter ({policy.value}) affected {len(dropped)} training "
            f"sentence(s): {', '.join(dropped)}",
            file=sys.stderr,
        )
    test_f, dropped_test = corpus.filter_overlapping(test_ds, policy)
    if dropped_test:
        print(
            f"overlap filter ({policy.value}) affected {len(dropped_test)} test "
            f"sentence(s): {', '.join(dropped_test)}",
            file=sys.stderr,
        )
    if cfg.upsample:
        train_f = _stage("upsample", corpus.upsample, train_f, cfg.upsample_seed)

    tagger_model = _stage("train-tagger", _train_tagger, cfg.tagger, train_f)
    relation_model = _stage("train-relation", _train_relation, cfg.relation, train_f)

    os.makedirs(cfg.output_dir, exist_ok=True)
    paths = {
        "tagger_model": os.path.join(cfg.output_dir, "tagger_model.json"),
        "relation_model": os.path.join(cfg.output_dir, "relation_model.json"),
        "predictions_conll": os.path.join(cfg.output_dir, "predictions.conll"),
        "graphs": os.path.join(cfg.output_dir, "graphs.json"),
        "triples": os.path.join(cfg.output_dir, "triples.jsonl"),
        "instances": os.path.join(cfg.output_dir, "instances.jsonl"),
        "report": os.path.join(cfg.output_dir, "report.json"),
        "report_txt": os.path.join(cfg.output_dir, "report.txt"),
    }
    taggers.save_model(tagger_model, paths["tagger_model"])
    relation.save_model(relation_model, paths["relation_model"])

    tags, graphs, rows = _stage("predict", _predict, test_f, tagger_model, relation_model)
    taggers.save_predictions_conll(paths["predictions_conll"], test_f, tags)
    corpus.save_dataset(aggregator.graphs_to_dataset(test_f, graphs), paths["graphs"])
    aggregator.write_triples(paths["triples"], [graphs[s.id] for s in test_f.sentences])
    relation.dump_instances(paths["instances"], rows)

    reports = _stage("evaluate", _reports, test_f, tags, graphs, True)
    _write_json(paths["report"], {"reports": [r.to_dict() for r in reports]})
    table = metrics.format_report_table(reports)
    with open(paths["report_txt"], "w", encoding="utf-8") as fh:
        fh.write(table + "\n")
    print(table)

    if cfg.dev is not None:
        dev_ds = _stage("load-dev", corpus.load_dataset, cfg.dev, FileFormat.JSON)
        dev_f, _ = corpus.filter_overlapping(dev_ds, policy)
        paths["dev_predictions_conll"] = os.path.join(cfg.output_dir, "dev_predictions.conll")
        paths["dev_graphs"] = os.path.join(cfg.output_dir, "dev_graphs.json")
        paths["dev_report"] = os.path.join(cfg.output_dir, "dev_report.json")
        dev_tags, dev_graphs, _rows = _stage(
            "predict-dev", _predict, dev_f, tagger_model, relation_model
        )
        taggers.save_predictions_conll(paths["dev_predictions_conll"], dev_f, dev_tags)
        corpus.save_dataset(
            aggregator.graphs_to_dataset(dev_f, dev_graphs), paths["dev_graphs"]
        )
        dev_reports = _stage("evaluate-dev", _reports, dev_f, dev_tags, dev_graphs, True)
        _write_json(paths["dev_report"], {"reports": [r.to_dict() for r in dev_reports]})
    return paths


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_stats(args) -> int:
    rows = []
    for path in args.datasets:
        ds = corpus.load_dataset(path, FileFormat.JSON)
        rows.append((ds.name, corpus.compute_stats(ds)))
    if len(rows) > 1:
        rows.append(("pooled", corpus.merge_stats([stats for _, stats in rows])))
    payload = [{"dataset": name, **stats.to_dict()} for name, stats in rows]
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        table = [("dataset",) + STATS_COLUMNS]
        for name, stats in rows:
            d = stats.to_dict()
            table.append(
                (name,)
                + tuple(
                    f"{d[col]:.2f}" if col.endswith("avg_count") else str(d[col])
                    for col in STATS_COLUMNS
                )
            )
        print(_fmt_table(table))
        group_table = [("dataset", "labels_present", "sentences")]
        for name, stats in rows:
            for k, v in sorted(stats.label_group_counts.items()):
                group_table.append((name, str(k), str(v)))
        print()
        print(_fmt_table(group_table))
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        _write_json(os.path.join(args.output_dir, "stats.json"), payload)
    return 0


def _cmd_convert(args) -> int:
    in_fmt = FileFormat[args.from_format.upper()]
    out_fmt = FileFormat[args.to_format.upper()]
    ds = corpus.load_dataset(args.input, in_fmt)
    policy = None if args.overlap_policy == "none" else OverlapPolicy[args.overlap_policy.upper()]
    if policy is not None and out_fmt is FileFormat.CONLL:
        ds, report = corpus.filter_overlapping(ds, policy)
        if report:
            print(
                f"overlap filter ({policy.value}) affected {len(report)} "
                f"sentence(s): {', '.join(report)}",
                file=sys.stderr,
            )
    corpus.save_dataset(ds, args.output, out_fmt)
    return 0


def _cmd_train(args) -> int:
    ds = corpus.load_dataset(args.train, FileFormat.JSON)
    policy = None if args.overlap_policy == "none" else OverlapPolicy[args.overlap_policy.upper()]
    if policy is not None:
        ds, report = corpus.filter_overlapping(ds, policy)
        if report:
            print(
                f"overlap filter ({policy.value}) affected {len(report)} "
                f"sentence(s): {', '.join(report)}",
                file=sys.stderr,
            )
    seed = args.train_seed if args.train_seed is not None else (args.seed or 0)
    if args.stage == "tagger":
        cfg = TaggerConfig(kind=args.kind.upper(), epochs=args.epochs, seed=seed)
        if cfg.kind not in ("PERCEPTRON", "POS_CHUNK", "MOST_COMMON"):
            raise ConfigError(f"--kind: unknown tagger kind {args.kind!r}")
        if cfg.epochs < 0:
            raise ConfigError("--epochs: must be >= 0")
        model = _stage("train-tagger", _train_tagger, cfg, ds)
        taggers.save_model(model, args.out)
    else:
        cfg = RelationConfig(
            kind=args.kind.upper(),
            epochs=args.epochs,
            learning_rate=args.learning_rate,
            threshold=args.threshold,
            seed=seed,
        )
        if cfg.kind not in ("LOGISTIC", "ALWAYS_TRUE"):
            raise ConfigError(f"--kind: unknown relation kind {args.kind!r}")
        if cfg.epochs < 1:
            raise ConfigError("--epochs: must be >= 1")
        if not cfg.learning_rate > 0:
            raise ConfigError("--learning-rate: must be > 0")
        model = _stage("train-relation", _train_relation, cfg, ds)
        relation.save_model(model, args.out)
    return 0


def _cmd_predict(args) -> int:
    if not args.tagger_model and not args.external_conll:
        raise ConfigError("predict needs --tagger-model or --external-conll")
    ds = corpus.load_dataset(args.data, FileFormat.JSON)
    external = None
    if args.external_conll:
        tagger_model = taggers.external_tagger()
        external = taggers.load_external_predictions(args.external_conll, ds)
    else:
        tagger_model = taggers.load_model(args.tagger_model)
    relation_model = (
        relation.load_model(args.relation_model)
        if args.relation_model
        else relation.always_true_model()
    )
    out_dir = args.output_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    tags, graphs, rows = _stage(
        "predict", _predict, ds, tagger_model, relation_model, external
    )
    taggers.save_predictions_conll(os.path.join(out_dir, "predictions.conll"), ds, tags)
    corpus.save_dataset(
        aggregator.graphs_to_dataset(ds, graphs), os.path.join(out_dir, "graphs.json")
    )
    aggregator.write_triples(
        os.path.join(out_dir, "triples.jsonl"), [graphs[s.id] for s in ds.sentences]
    )
    relation.dump_instances(os.path.join(out_dir, "instances.jsonl"), rows)
    return 0


def _cmd_evaluate(args) -> int:
    ds = corpus.load_dataset(args.gold, FileFormat.JSON)
    policy = None if args.overlap_policy == "none" else OverlapPolicy[args.overlap_policy.upper()]
    if policy is not None:
        ds, report = corpus.filter_overlapping(ds, policy)
        if report:
            print(
                f"overlap filter ({policy.value}) affected {len(report)} gold "
                f"sentence(s): {', '.join(report)}",
                file=sys.stderr,
            )
    tags = graphs = None
    if args.pred_conll:
        tags = taggers.load_external_predictions(args.pred_conll, ds)
    if args.pred_graphs:
        pred_ds = corpus.load_dataset(args.pred_graphs, FileFormat.JSON)
        by_id = pred_ds.by_id()
        graphs = {}
        for sentence in ds.sentences:
            if sentence.id not in by_id:
                raise InputError(f"graphs file is missing sentence '{sentence.id}'")
            graphs[sentence.id] = aggregator.graph_from_sentence(by_id[sentence.id])
    if tags is None and graphs is None:
        raise ConfigError("evaluate needs --pred-conll and/or --pred-graphs")
    reports = _stage("evaluate", _reports, ds, tags, graphs, args.strata)
    if args.format == "json":
        print(json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2, sort_keys=True))
    else:
        print(metrics.format_report_table(reports))
    if args.output:
        _write_json(args.output, {"reports": [r.to_dict() for r in reports]})
    return 0


def _cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    run_pipeline(cfg)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentigraph",
        description="Opinion extraction pipeline: span tagging, relation "
        "classification, sentiment-graph aggregation, and evaluation.",
    )
    parser.add_argument("--seed", type=int, default=None, help="default seed for train steps")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--output-dir", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="dataset distribution statistics")
    p.add_argument("datasets", nargs="+", help="JSON dataset file(s)")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("convert", help="convert between JSON and CoNLL")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--from", dest="from_format", choices=("json", "conll"), required=True)
    p.add_argument("--to", dest="to_format", choices=("json", "conll"), required=True)
    p.add_argument(
        "--overlap-policy",
        choices=("none", "drop_sentence", "priority_keep"),
        default="none",
        help="how to resolve cross-role overlaps before a CoNLL write",
    )
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("train", help="train a tagger or relation model")
    p.add_argument("stage", choices=("tagger", "relation"))
    p.add_argument("--train", required=True, help="JSON training dataset")
    p.add_argument("--kind", default=None, help="model kind (default: perceptron / logistic)")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--train-seed", type=int, default=None, dest="train_seed")
    p.add_argument(
        "--overlap-policy",
        choices=("none", "drop_sentence", "priority_keep"),
        default="drop_sentence",
    )
    p.add_argument("--out", required=True, help="model JSON output path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="run the pipeline with trained models")
    p.add_argument("--data", required=True, help="JSON dataset to tag")
    p.add_argument("--tagger-model", default=None)
    p.add_argument("--external-conll", default=None, help="pre-tagged CoNLL predictions")
    p.add_argument("--relation-model", default=None, help="default: always-true baseline")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred-conll", default=None, help="stage-1 predictions (CoNLL)")
    p.add_argument("--pred-graphs", default=None, help="stage-3 predictions (dataset JSON)")
    p.add_argument("--strata", action="store_true", help="also report single/multi-target strata")
    p.add_argument(
        "--overlap-policy",
        choices=("none", "drop_sentence", "priority_keep"),
        default="drop_sentence",
    )
    p.add_argument("--output", default=None, help="write the report JSON here")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="run the full pipeline from a JSON config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "train":
        if args.kind is None:
            args.kind = "perceptron" if args.stage == "tagger" else "logistic"
        if args.epochs is None:
            args.epochs = 10 if args.stage == "tagger" else 30
    try:
        return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SentigraphError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
