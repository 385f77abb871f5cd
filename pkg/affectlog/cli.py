"""
Command-line front end.

Every subcommand reads its inputs, calls the library and writes its
outputs atomically. Exit status: 0 on success, 1 on data or I/O errors,
2 on usage errors.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

from .affect import induce_object_polarity, write_affect_report
from .bootstrap import run_bootstrap
from .cascade import STAGE_KINDS, CascadeSpec, cascade_classify, load_manifest, load_stage
from .config import SECTIONS, AppConfig, ConfigManager
from .corpus import GOLD_LABELS, Document, Polarity, is_first_person, labeled_sentences, read_corpus, write_corpus
from .errors import AffectlogError, ConfigError, EvalError
from .evaluation import (
    TuneGrid, align, evaluate, format_results_table, read_predictions, tune_thresholds, write_predictions,
    write_report,
)
from .patterns import dump_patterns
from .stats import ThresholdParams, UnitKind, collect_stats, load_stats, save_stats, top_patterns
from .utils import atomic_write, parallel_map

logger = logging.getLogger("affectlog")

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
DEFAULT_CONFIG = "config.json"


# -----------------------------
# HELPERS
# -----------------------------

def setup_logging(debug: bool = False):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.handlers[:] = [handler]
    logger.setLevel(logging.DEBUG if debug else logging.INFO)


def bootstrap_params(args: argparse.Namespace, app: AppConfig) -> Tuple[ThresholdParams, ThresholdParams]:
    """Threshold flags override the configured bootstrap thresholds one field at a time."""
    params = []
    for side, default in (("pos", app.bootstrap.pos), ("neg", app.bootstrap.neg)):
        values = default.to_dict()
        for field_name in ("theta_f", "theta_p", "theta_n"):
            flag = getattr(args, f"{side}_{field_name}", None)
            if flag is not None:
                values[field_name] = flag
        try:
            params.append(ThresholdParams.from_dict(values))
        except ValueError as e:
            raise ConfigError(f"bad {side} thresholds: {e}") from e
    return params[0], params[1]


def _read_params(path: str) -> Tuple[ThresholdParams, ThresholdParams]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return ThresholdParams.from_dict(data["pos"]), ThresholdParams.from_dict(data["neg"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{path}: bad threshold parameters ({e})") from e


def _sentence_units(docs: Sequence[Document], first_person_only: bool):
    for doc in docs:
        for s in doc.sentences:
            if first_person_only and not is_first_person(s):
                continue
            yield s


def _gold_rows(path: str, first_person_only: bool):
    if path.endswith(".conllu"):
        return [(s.doc_id, s.sent_id, label) for s, label in labeled_sentences(read_corpus(path), first_person_only)]
    return read_predictions(path)


# -----------------------------
# SUBCOMMANDS
# -----------------------------

def cmd_extract(args, app: AppConfig, threads: int) -> int:
    docs = read_corpus(args.corpus)
    dump_patterns(docs, args.output, app.extraction, args.first_person_only)
    return 0


def cmd_learn(args, app: AppConfig, threads: int) -> int:
    docs = read_corpus(args.corpus)
    if args.unit == UnitKind.STORY.value:
        units = []
        for doc in docs:
            if doc.label not in GOLD_LABELS:
                continue
            if args.first_person_only:
                doc = replace(doc, sentences=tuple(s for s in doc.sentences if is_first_person(s)))
            units.append((doc, doc.label))
        kind = UnitKind.STORY
    else:
        units = labeled_sentences(docs, args.first_person_only)
        kind = UnitKind.SENTENCE
    table = collect_stats(units, kind, app.extraction, threads)
    save_stats(table, args.output)
    return 0


def cmd_bootstrap(args, app: AppConfig, threads: int) -> int:
    pos, neg = bootstrap_params(args, app)
    max_rounds = args.max_rounds if args.max_rounds is not None else app.bootstrap.max_rounds
    seed = read_corpus(args.seed_corpus)
    unlabeled = read_corpus(args.unlabeled)
    logger.info("Bootstrapping with pos %s, neg %s", pos, neg)
    corpus = run_bootstrap(seed, unlabeled, pos, neg, max_rounds, app.extraction, threads)
    write_corpus(args.output, corpus)
    if args.log:
        new = corpus[len(seed):]
        atomic_write(args.log, "".join(f"{d.doc_id}\t{d.label.value}\n" for d in new))
    return 0


def _classify_corpus(args, classify, threads: int) -> int:
    docs = read_corpus(args.corpus)
    sentences = list(_sentence_units(docs, args.first_person_only))
    labels = parallel_map(classify, sentences, threads)
    write_predictions([(s.doc_id, s.sent_id, label) for s, label in zip(sentences, labels)], args.output)
    logger.info("Classified %d sentences", len(sentences))
    return 0


def cmd_classify(args, app: AppConfig, threads: int) -> int:
    stage = load_stage(args.kind, args.stage_config, app=app, seed=args.seed)
    return _classify_corpus(args, lambda s: cascade_classify(s, CascadeSpec((stage,))), threads)


def cmd_cascade(args, app: AppConfig, threads: int) -> int:
    spec = load_manifest(args.manifest, app, args.seed)
    return _classify_corpus(args, lambda s: cascade_classify(s, spec), threads)


def cmd_tune(args, app: AppConfig, threads: int) -> int:
    dev = labeled_sentences(read_corpus(args.dev), args.first_person_only)
    table = load_stats(args.stats)
    grid = TuneGrid.load(args.grid)
    pos, neg, report = tune_thresholds(dev, table, grid, app.extraction)
    body = {"pos": pos.to_dict(), "neg": neg.to_dict(), "dev_macro_f": report.macro_f}
    atomic_write(args.output, json.dumps(body, indent=2, sort_keys=True) + "\n")
    if args.report:
        write_report([("pattern (tuned)", report)], args.report)
    print(format_results_table([("pattern (tuned)", report)]), end="")
    return 0


def _prediction_sources(items: Sequence[str], default_name: str) -> List[Tuple[str, str]]:
    """`name=path` pairs; a bare path is named by --name, or by its file stem when several are given."""
    sources = []
    for item in items:
        name, sep, path = item.partition("=")
        if not sep:
            path = item
            name = default_name if len(items) == 1 else os.path.splitext(os.path.basename(item))[0]
        if not name or not path:
            raise EvalError(f"bad predictions argument '{item}' (expected name=path)")
        sources.append((name, path))
    names = [name for name, _ in sources]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise EvalError(f"duplicate classifier names: {', '.join(duplicates)}")
    return sources


def cmd_eval(args, app: AppConfig, threads: int) -> int:
    gold_rows = _gold_rows(args.gold, args.first_person_only)
    rows = []
    for name, path in _prediction_sources(args.predictions, args.name):
        pred, gold = align(read_predictions(path), gold_rows)
        rows.append((name, evaluate(pred, gold)))
    if args.output:
        write_report(rows, args.output)
    print(format_results_table(rows), end="")
    if len(rows) == 1:
        print(f"macro {rows[0][1].macro_f}")
    return 0


def cmd_induce_affect(args, app: AppConfig, threads: int) -> int:
    affect = app.affect
    if args.threshold is not None:
        affect = replace(affect, threshold=args.threshold)
    rows = induce_object_polarity(load_stats(args.stats), affect)
    write_affect_report(rows, args.output)
    return 0


def cmd_report(args, app: AppConfig, threads: int) -> int:
    table = load_stats(args.stats)
    if args.params:
        pos, neg = _read_params(args.params)
    else:
        pos, neg = app.bootstrap.pos, app.bootstrap.neg
    lines = []
    for polarity, params in ((Polarity.POS, pos), (Polarity.NEG, neg)):
        lines.append(f"{polarity.value} ({params.theta_f}/{params.theta_p}/{params.theta_n})")
        for st in top_patterns(table, polarity, params, args.limit):
            lines.append(f"  {st.key}\tfreq={st.freq}\tp={st.p(polarity):.3f}")
    text = "\n".join(lines) + "\n"
    if args.output:
        atomic_write(args.output, text)
    print(text, end="")
    return 0


def _parse_setting(item: str) -> Tuple[str, str, object]:
    """`section.key=value`; the value is read as JSON, falling back to a plain string."""
    target, sep, raw = item.partition("=")
    section, dot, key = target.partition(".")
    if not sep or not dot or not section or not key:
        raise ConfigError(f"bad setting '{item}' (expected section.key=value)")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return section, key, value


def cmd_config(args, app: AppConfig, threads: int) -> int:
    manager = ConfigManager(args.config)
    if args.reset:
        manager.reset_to_defaults()
    for item in args.set or []:
        section, key, value = _parse_setting(item)
        if section in SECTIONS and not hasattr(getattr(manager.config, section), key):
            raise ConfigError(f"unknown config key {section}.{key}")
        manager.update_config(section, {key: value})
    if args.reset or args.set:
        manager.save_config()
    print(json.dumps(manager.get_config_dict(), indent=2))
    return 0


# -----------------------------
# PARSER
# -----------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affectlog",
        description="Weakly supervised first-person sentiment pattern learning",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Pipeline:
  extract -> learn -> bootstrap -> learn -> tune -> classify/cascade -> eval

Examples:
  python app.py learn fixtures/stories.conllu -o stats.jsonl
  python app.py bootstrap fixtures/stories.conllu fixtures/unlabeled.conllu -o expanded.conllu
  python app.py eval Lexicon=lex.tsv SVM=svm.tsv fixtures/dev.conllu
  python app.py config --set lexicon.tau=0.5
        """,
    )
    parser.add_argument("--config", default=DEFAULT_CONFIG,
                        help=f"Run configuration JSON (default: {DEFAULT_CONFIG})")
    parser.add_argument("--seed", type=int, default=0, help="Random seed for the linear trainer (default: 0)")
    parser.add_argument("--debug", action="store_true", help="Enable debug mode with verbose logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="Dump pattern instances as JSON Lines")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--first-person-only", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("learn", help="Collect class-conditional pattern statistics")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--unit", choices=[k.value for k in UnitKind], default=UnitKind.SENTENCE.value)
    p.add_argument("--first-person-only", action="store_true")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("bootstrap", help="Label unlabeled stories from a seed corpus")
    p.add_argument("seed_corpus")
    p.add_argument("unlabeled")
    p.add_argument("-o", "--output", required=True, help="Expanded corpus (seed + newly labeled)")
    p.add_argument("--log", help="TSV of newly labeled doc_ids")
    p.add_argument("--max-rounds", type=int)
    for side in ("pos", "neg"):
        p.add_argument(f"--{side}-theta-f", dest=f"{side}_theta_f", type=int)
        p.add_argument(f"--{side}-theta-p", dest=f"{side}_theta_p", type=float)
        p.add_argument(f"--{side}-theta-n", dest=f"{side}_theta_n", type=int)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("classify", help="Label every sentence with one classifier")
    p.add_argument("corpus")
    p.add_argument("--kind", choices=STAGE_KINDS, required=True)
    p.add_argument("--stage-config", required=True, help="Classifier config JSON")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--first-person-only", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cascade", help="Label every sentence with a classifier cascade")
    p.add_argument("corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--first-person-only", action="store_true")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("tune", help="Grid-search pattern thresholds on a dev corpus")
    p.add_argument("dev")
    p.add_argument("--stats", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("-o", "--output", required=True, help="Best parameters JSON")
    p.add_argument("--report")
    p.add_argument("--first-person-only", action="store_true")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("eval", help="Score one or more prediction files against gold labels")
    p.add_argument("predictions", nargs="+", metavar="[NAME=]PREDICTIONS",
                   help="One or more predictions TSVs; several give one comparison table")
    p.add_argument("gold", help="Gold predictions-format TSV or labeled .conllu corpus")
    p.add_argument("-o", "--output", help="Report file (.json for JSON)")
    p.add_argument("--name", default="classifier", help="Row name for a single unnamed predictions file")
    p.add_argument("--first-person-only", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("induce-affect", help="Induce possessed-object polarity from statistics")
    p.add_argument("stats")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_induce_affect)

    p = sub.add_parser("report", help="List the top qualifying patterns per class")
    p.add_argument("stats")
    p.add_argument("--params", help="Threshold parameters JSON (as written by tune)")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("config", help="Show, change or reset the run configuration file")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="Set one value (JSON, or a plain string); repeatable")
    p.add_argument("--reset", action="store_true", help="Start from the defaults before applying --set")
    p.set_defaults(func=cmd_config)

    return parser


def run_command(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    setup_logging(args.debug)
    try:
        manager = ConfigManager(args.config)
        threads = manager.thread_count()
        logger.debug("Running %s with %d threads", args.command, threads)
        return args.func(args, manager.config, threads)
    except (AffectlogError, OSError) as e:
        print(f"affectlog {args.command}: error: {e}", file=sys.stderr)
        return 1
