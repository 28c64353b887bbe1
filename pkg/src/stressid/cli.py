"""Command line interface: ``stressid {stats,train,eval,predict,experiment,synth}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
"""

import argparse
import json
import os
import sys

from stressid.corpus import corpus_stats, generate_synthetic, load_corpus, render_stats, write_corpus, SynthSpec
from stressid.errors import DataError, ExperimentError, ModelError
from stressid.features import AnalyzerConfig, FeatureConfig, Weighting, fit_vocabulary, to_csr, transform_corpus
from stressid.forest import ForestParams, load_model, save_model, train_forest
from stressid.metrics import compute_metrics, confusion, render_metrics, render_table
from stressid.runner import format_predictions, load_config, predict_file, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _split_name(path):
    stem = os.path.splitext(os.path.basename(path))[0].lower()
    for name, aliases in (("train", ("train",)), ("validation", ("validation", "valid", "dev", "val")), ("test", ("test",))):
        if any(a in stem for a in aliases):
            return name
    return stem


def _features_per_split(value):
    if value in ("sqrt", "all"):
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'sqrt', 'all' or an integer") from None


def cmd_stats(args):
    dists = []
    for path in args.data:
        corpus = load_corpus(path, _split_name(path), args.text_col, args.label_col)
        dists.append(corpus_stats(corpus))
    sys.stdout.write(render_stats(dists, args.format))


def cmd_train(args):
    corpus = load_corpus(args.train, "train", args.text_col, args.label_col)
    analyzer = AnalyzerConfig(args.analyzer, args.ngram_min, args.ngram_max, not args.no_lowercase)
    weighting = Weighting(args.weighting)
    vocab = fit_vocabulary(corpus, analyzer)
    X = to_csr(transform_corpus(corpus, vocab, weighting), vocab.dim)
    params = ForestParams(
        n_trees=args.trees,
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        features_per_split=args.features_per_split,
        bootstrap=not args.no_bootstrap,
        seed=args.seed,
    )
    forest = train_forest(X, corpus.labels, params, n_jobs=args.n_jobs, fingerprint=vocab.fingerprint())
    save_model(forest, vocab, weighting, args.model_out)
    print(f"trained {params.n_trees} trees on {len(corpus)} docs, {vocab.dim} features -> {args.model_out}", file=sys.stderr)


def cmd_eval(args):
    forest, vocab, weighting = load_model(args.model)
    corpus = load_corpus(args.data, _split_name(args.data), args.text_col, args.label_col)
    X = to_csr(transform_corpus(corpus, vocab, weighting), vocab.dim)
    predicted, _ = forest.predict(X)
    report = compute_metrics(confusion(corpus.labels, predicted))
    if args.format == "json":
        sys.stdout.write(render_metrics(report, "json") + "\n")
        return
    name = FeatureConfig(vocab.analyzer, weighting).display_name
    language = args.language if args.language is not None else os.path.splitext(os.path.basename(args.data))[0]
    sys.stdout.write(render_table([(language, name, report)], "table3"))


def cmd_predict(args):
    records = predict_file(args.model, input_path=args.input, text=args.text, out=args.out, fmt=args.format, text_col=args.text_col)
    if args.out is None:
        labels = list(records[0]["votes"]) if records else []
        sys.stdout.write(format_predictions(records, args.format or "jsonl", labels))


def cmd_experiment(args):
    config = load_config(args.config)
    if args.n_jobs is not None:
        config.n_jobs = args.n_jobs
    if args.seed is not None:
        config.seed = args.seed
        config.forest_params = ForestParams.from_dict({**config.forest_params.to_dict(), "seed": args.seed})
    report = run_experiment(config, args.out)
    out = args.out or config.output_dir
    with open(os.path.join(out, "table3.txt"), encoding="utf-8") as fh:
        sys.stdout.write(fh.read())
    best = report.to_dict()["best"]
    for language, slug in best.items():
        print(f"best[{language}] = {slug}", file=sys.stderr)


def cmd_synth(args):
    with open(args.spec, encoding="utf-8") as fh:
        spec = SynthSpec.from_dict(json.load(fh))
    write_corpus(generate_synthetic(spec), args.out)


def build_parser():
    p = _Parser(prog="stressid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def columns(sp):
        sp.add_argument("--text-col", default="text")
        sp.add_argument("--label-col", default="label")

    s = sub.add_parser("stats", help="class distribution of labeled CSVs")
    s.add_argument("--data", required=True, action="append", help="CSV file; repeat for several splits")
    s.add_argument("--format", choices=("table", "json"), default="table")
    columns(s)
    s.set_defaults(func=cmd_stats)

    t = sub.add_parser("train", help="fit a vectorizer and forest on one CSV")
    t.add_argument("--train", required=True)
    t.add_argument("--analyzer", choices=("word", "char"), default="word")
    t.add_argument("--ngram-min", type=int, default=1)
    t.add_argument("--ngram-max", type=int, default=1)
    t.add_argument("--weighting", choices=("count", "tfidf"), default="tfidf")
    t.add_argument("--no-lowercase", action="store_true")
    t.add_argument("--trees", type=int, default=100)
    t.add_argument("--max-depth", type=int, default=None)
    t.add_argument("--min-samples-split", type=int, default=2)
    t.add_argument("--features-per-split", type=_features_per_split, default="sqrt")
    t.add_argument("--no-bootstrap", action="store_true")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--n-jobs", type=int, default=1)
    t.add_argument("--model-out", required=True)
    columns(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score a model on a labeled CSV")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--format", choices=("table3", "json"), default="table3")
    e.add_argument("--language", default=None, help="data set name in the table (default: file stem)")
    columns(e)
    e.set_defaults(func=cmd_eval)

    pr = sub.add_parser("predict", help="label texts with a model")
    pr.add_argument("--model", required=True)
    src = pr.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--text")
    pr.add_argument("--out")
    pr.add_argument("--format", choices=("csv", "jsonl"), default=None)
    pr.add_argument("--text-col", default="text")
    pr.set_defaults(func=cmd_predict)

    x = sub.add_parser("experiment", help="run a JSON-configured experiment matrix")
    x.add_argument("--config", required=True)
    x.add_argument("--out", default=None)
    x.add_argument("--seed", type=int, default=None)
    x.add_argument("--n-jobs", type=int, default=None)
    x.set_defaults(func=cmd_experiment)

    y = sub.add_parser("synth", help="write a synthetic labeled CSV")
    y.add_argument("--spec", required=True)
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)
    return p


def _exit_code(exc):
    if isinstance(exc, ExperimentError):
        exc = exc.cause
    if isinstance(exc, ModelError):
        return EXIT_MODEL
    if isinstance(exc, (DataError, OSError, json.JSONDecodeError, KeyError, UnicodeDecodeError)):
        return EXIT_DATA
    if isinstance(exc, ValueError):
        return EXIT_USAGE
    return None


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"stressid {args.command}: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
