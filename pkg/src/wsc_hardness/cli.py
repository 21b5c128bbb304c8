"""Command-line entry point: ``wsc-hardness <subcommand> ...``.

Settings resolve in the order defaults < config file < environment <
flags.  Machine-readable output goes to ``--out``; a short human summary
goes to stdout.  Exit codes:

    0  success
    2  usage error (bad flag, subcommand or option value)
    3  parse error in an input dataset
    4  dataset validation error
    5  degenerate split or empty eligible set
    6  no verb found / undetermined feature
    7  hit-count cache miss while offline
    8  network failure
    9  missing or malformed resource
   10  invalid numeric input or hyperparameter
   11  unreadable model file
   12  model format version mismatch
   13  evaluation or metric input error
   14  training failure
   15  file-system error
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, forest, lstm, pipeline
from .errors import HardnessError, ModelFormatError, ResourceError
from .features import (ExtractionConfig, FeatureSchema, extract_all,
                       read_features_csv, write_features_csv)
from .knowledge import NETWORK_ENV, build_corpus_index, load_resources
from .schema import load_dataset, load_id_list
from .tables import bundled_path

log = logging.getLogger("wsc_hardness")

RESOURCES_ENV = "WSC_HARDNESS_RESOURCES"
EXIT_USAGE = 2
EXIT_IO = 15

DEFAULTS = {
    "resources": None,
    "network": False,
    "seed": 0,
    "threshold": 0.20,
    "min_connective_count": 100,
    "neutral_band": 0.1,
    "n_trees": 100,
    "max_depth": None,
    "min_samples_leaf": 2,
    "epochs": 30,
    "batch_size": 32,
    "units": 87,
    "embed_dim": 50,
    "warmup": 5,
}
_INT_KEYS = {"seed", "min_connective_count", "n_trees", "max_depth",
             "min_samples_leaf", "epochs", "batch_size", "units",
             "embed_dim", "warmup"}
_FLOAT_KEYS = {"threshold", "neutral_band"}


class UsageError(Exception):
    pass


def _truthy(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            return None if str(value).lower() == "none" else int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None
    if key == "network":
        return _truthy(value)
    return value


def read_config_file(path):
    """``key = value`` lines; '#' starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8")
                             .splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown setting {key!r}")
        out[key] = _coerce(key, value.strip())
    return out


def resolve_config(args, environ=os.environ):
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config_file(args.config))
    if environ.get(RESOURCES_ENV):
        cfg["resources"] = environ[RESOURCES_ENV]
    if environ.get(NETWORK_ENV):
        cfg["network"] = _truthy(environ[NETWORK_ENV])
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = _coerce(key, v)
    if cfg["resources"] is None:
        cfg["resources"] = str(bundled_path("resources"))
    try:
        cfg["extraction"] = ExtractionConfig(cfg["threshold"],
                                             cfg["min_connective_count"],
                                             cfg["neutral_band"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _resources(cfg):
    return load_resources(cfg["resources"], network_enabled=cfg["network"])


def _forest_hp(cfg):
    return forest.ForestHyperparams(n_trees=cfg["n_trees"],
                                    max_depth=cfg["max_depth"],
                                    min_samples_leaf=cfg["min_samples_leaf"],
                                    seed=cfg["seed"])


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


def _labelled_rows(features_path, labels_path, exclude=None):
    ids, vectors = read_features_csv(features_path)
    labels = load_dataset(labels_path)
    drop = set(load_id_list(exclude)) if exclude else set()
    labelled = {h.id for h in labels.halves if h.hardness is not None}
    keep = [(i, v) for i, v in zip(ids, vectors)
            if i in labelled and i not in drop]
    if not keep:
        raise UsageError("no feature row has a label")
    ids = [i for i, _ in keep]
    vs, y = pipeline.join_labels(ids, [v for _, v in keep], labels)
    return ids, vs, y


def load_any_model(path):
    head = Path(path).read_bytes()[:len(forest.MAGIC)]
    if head.startswith(lstm.MAGIC):
        return "lstm", lstm.load_model(path)
    if head == forest.MAGIC.encode():
        return "forest", forest.load_model(path)
    raise ModelFormatError(f"{path} is not a model file")


def _predictor(kind, model, cfg):
    if kind == "lstm":
        return pipeline.LstmPredictor(model)
    return pipeline.ForestPredictor(model, _resources(cfg), cfg["extraction"])


# -- subcommands ------------------------------------------------------------

def cmd_ingest_corpus(args, cfg):
    idx = build_corpus_index(args.corpus)
    idx.save(args.out)
    print(f"indexed {idx.doc_count} sentences: {len(idx.role_counts)} role "
          f"entries, {len(idx.connective_triple_counts)} connective triples")


def cmd_extract(args, cfg):
    data = load_dataset(args.data)
    vectors = pipeline.featurize(data, _resources(cfg), cfg["extraction"])
    write_features_csv(args.out, data.ids, vectors)
    covered = np.mean([np.mean(list(v.coverage.values())) for v in vectors]) \
        if vectors else 0.0
    print(f"extracted {len(vectors)} halves, mean component coverage "
          f"{covered:.2f}")


def cmd_train_rf(args, cfg):
    _, vectors, y = _labelled_rows(args.features, args.labels, args.exclude)
    model = pipeline.train_forest(vectors, y, _forest_hp(cfg))
    forest.save_model(model, args.out)
    print(f"trained {len(model.trees)} trees on {len(y)} halves")


def cmd_train_lstm(args, cfg):
    data = load_dataset(args.data)
    if args.exclude:
        drop = set(load_id_list(args.exclude))
        data = data.subset([i for i in data.ids if i not in drop])
    tc = lstm.TrainConfig(epochs=cfg["epochs"], batch_size=cfg["batch_size"],
                          seed=cfg["seed"])
    model, hist = pipeline.train_lstm(data, tc, units=cfg["units"],
                                      embed_dim=cfg["embed_dim"])
    lstm.save_model(model, args.out)
    if args.history:
        hist.write_csv(args.history)
    last = hist.rows[-1] if hist.rows else (0, float("nan"), float("nan"))
    print(f"trained on {len(data)} halves, vocabulary {len(model.vocab)}; "
          f"epoch {last[0]}: train MAE {last[1]:.4f}, val MAE {last[2]:.4f}")


def cmd_predict(args, cfg):
    kind, model = load_any_model(args.model)
    pred = _predictor(kind, model, cfg)
    data = load_dataset(args.data)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "hardness"])
        for h in data.halves:
            w.writerow([h.id, repr(float(pred.predict(h)))])
    print(f"wrote {len(data)} predictions to {args.out}")


def cmd_evaluate(args, cfg):
    kind, model = load_any_model(args.model)
    pred = _predictor(kind, model, cfg)
    data = load_dataset(args.data)
    name = "Forest" if kind == "forest" else "LSTM"
    rows = {name: evaluation.evaluate(pred, data, tag="full")}
    if args.subset:
        rows[f"{name} (subset)"] = evaluation.evaluate(
            pred, data, load_id_list(args.subset), tag="subset")
    if args.baseline is not None:
        rows["Fixed baseline"] = evaluation.evaluate(
            pipeline.ConstantPredictor(args.baseline), data, tag="baseline")
    if args.out:
        _write(args.out, evaluation.reports_to_json(rows))
    print(evaluation.render_table(rows))


def cmd_importance(args, cfg):
    ids, vectors, y = _labelled_rows(args.features, args.labels)
    test_ids = set(load_id_list(args.test_ids))
    is_test = np.array([i in test_ids for i in ids])
    if not is_test.any() or is_test.all():
        raise UsageError("test ids must split the labelled rows in two")
    schema = FeatureSchema.fit([v for v, t in zip(vectors, is_test) if not t])
    X = schema.encode_matrix(vectors)
    names = list(schema.names)
    if args.inject_dummy:
        X = np.hstack([X, np.full((len(X), 1), 0.5)])
        names.append("DUMMY")
    hp = _forest_hp(cfg)
    Xtr, ytr, Xte, yte = X[~is_test], y[~is_test], X[is_test], y[is_test]
    ref_model = forest.fit_forest(Xtr, ytr, hp)
    reference = evaluation.report_from_predictions(ref_model.predict(Xte),
                                                   yte, "all features")
    rows = forest.importance_by_ablation(Xtr, ytr, Xte, yte, names,
                                         pipeline.component_groups(schema),
                                         hp)
    out = {"reference": reference.to_dict(),
           "rows": [{"component": g, **r.to_dict()} for g, r in rows.items()]}
    table = {"All features": reference}
    table.update({f"without {g}": r for g, r in rows.items()})
    if args.inject_dummy:
        ctl = forest.importance_by_ablation(Xtr, ytr, Xte, yte, names,
                                            {"dummy": ["DUMMY"]}, hp)["dummy"]
        out["control"] = {"component": "dummy", **ctl.to_dict()}
        table["without dummy (control)"] = ctl
    if args.out:
        _write(args.out, json.dumps(out, indent=2) + "\n")
    print(evaluation.render_table(table))


def cmd_bench(args, cfg):
    kind, model = load_any_model(args.model)
    pred = _predictor(kind, model, cfg)
    data = load_dataset(args.data)
    report = evaluation.benchmark_latency(pred, data, warmup=cfg["warmup"])
    summary = {"model": kind, **report.summary()}
    if kind == "lstm" and args.resources_extract:
        ext = evaluation.benchmark_latency(
            _ExtractOnly(_resources(cfg), cfg["extraction"]), data,
            warmup=cfg["warmup"])
        summary["feature_extraction"] = ext.summary()["extract"]
    if args.out:
        _write(args.out, json.dumps(summary, indent=2) + "\n")
    ms = {k: v for k, v in summary.items() if isinstance(v, dict)}
    for k, v in ms.items():
        if v.get("mean") is not None:
            print(f"{k:>20}: mean {1000 * v['mean']:.3f} ms, "
                  f"p95 {1000 * v['p95']:.3f} ms")
    print(f"timed {report.n} halves after {cfg['warmup']} warm-up")


class _ExtractOnly:
    def __init__(self, resources, cfg):
        self.resources, self.cfg = resources, cfg

    def prepare(self, half):
        return extract_all(half, self.resources, self.cfg)

    def predict_prepared(self, x):
        return 0.0


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("shared settings")
    g.add_argument("--config", help="key = value settings file")
    g.add_argument("--resources", help="resource directory")
    g.add_argument("--network", default=None, choices=["on", "off"],
                   help="allow live hit-count lookups")
    g.add_argument("--seed", type=int)
    g.add_argument("--threshold", type=float)
    g.add_argument("--min-connective-count", dest="min_connective_count",
                   type=int)
    g.add_argument("--neutral-band", dest="neutral_band", type=float)
    g.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="wsc-hardness",
                description="Predict human hardness of Winograd schema "
                            "halves.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("ingest-corpus", parents=[common],
                       help="count roles and connective triples in a corpus")
    s.add_argument("--corpus", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_ingest_corpus)

    s = sub.add_parser("extract", parents=[common],
                       help="write feature vectors as CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_extract)

    s = sub.add_parser("train-rf", parents=[common],
                       help="train the forest regressor")
    s.add_argument("--features", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--exclude", help="id list left out of training")
    s.add_argument("--n-trees", dest="n_trees", type=int)
    s.add_argument("--max-depth", dest="max_depth", type=int)
    s.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_train_rf)

    s = sub.add_parser("train-lstm", parents=[common],
                       help="train the sequence regressor")
    s.add_argument("--data", required=True)
    s.add_argument("--exclude", help="id list left out of training")
    s.add_argument("--epochs", type=int)
    s.add_argument("--batch-size", dest="batch_size", type=int)
    s.add_argument("--units", type=int)
    s.add_argument("--embed-dim", dest="embed_dim", type=int)
    s.add_argument("--history", help="per-epoch CSV")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_train_lstm)

    s = sub.add_parser("predict", parents=[common],
                       help="predict hardness for each half")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_predict)

    s = sub.add_parser("evaluate", parents=[common],
                       help="score a model against labelled halves")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--subset", help="id list for an extra report row")
    s.add_argument("--baseline", type=float,
                   help="also score a constant predictor")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_evaluate)

    s = sub.add_parser("importance", parents=[common],
                       help="leave-one-component-out ablation")
    s.add_argument("--features", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--test-ids", dest="test_ids", required=True)
    s.add_argument("--n-trees", dest="n_trees", type=int)
    s.add_argument("--inject-dummy", action="store_true",
                   help="add a constant dummy component as a control")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_importance)

    s = sub.add_parser("bench", parents=[common],
                       help="per-half latency")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--warmup", type=int)
    s.add_argument("--with-extraction", dest="resources_extract",
                   action="store_true",
                   help="also time feature extraction (LSTM models)")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_bench)
    return p


def run_cli(argv=None, environ=os.environ):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.network is not None:
            args.network = args.network == "on"
        cfg = resolve_config(args, environ)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.DEBUG if args.verbose else
                        logging.WARNING, format="%(levelname)s %(message)s")
    if not Path(cfg["resources"]).is_dir() and args.command != "ingest-corpus":
        exc = ResourceError(f"resource directory {cfg['resources']} not found")
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    try:
        args.fn(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HardnessError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 10
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
