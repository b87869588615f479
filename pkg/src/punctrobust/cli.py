"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .conll import ConllError, Document, read_conll, write_conll
from .evaluate import EvalAlignmentError, attachment_scores
from .experiment import ConfigError, StageError, load_config, run_experiment, write_report
from .parser import Mode, OracleError, ParserModel, TrainingDataError, parse_all, train
from .perturb import AlignmentError, PerturbConfig, PerturbError, inject_punct, strip_punct
from .synthetic import generate
from .tree import DOT, InvalidTreeError, PunctClass, Sentence, is_punct, validate

log = logging.getLogger("punctrobust")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {value}")
    return value


# -- sentence filters for out-of-domain evaluation ---------------------------

def no_punct_min5(sentence: Sentence, punct_class: PunctClass) -> bool:
    """At least five words and no punctuation at all."""
    return len(sentence) >= 5 and not any(is_punct(t, punct_class) for t in sentence.tokens)


def multi_dot(sentence: Sentence, punct_class: PunctClass) -> bool:
    """More than one dot token."""
    return sum(t.form == DOT for t in sentence.tokens) > 1


FILTERS: dict[str, Callable[[Sentence, PunctClass], bool]] = {
    "no-punct-min5": no_punct_min5,
    "multi-dot": multi_dot,
}


def _read(path: str) -> Document:
    try:
        return read_conll(path)
    except OSError as err:
        raise DataError(f"cannot read {path}: {err.strerror or err}") from None
    except ConllError as err:
        raise DataError(f"{path}: {err}") from None


def _write(document, path: str) -> None:
    try:
        write_conll(document, path)
    except OSError as err:
        raise DataError(f"cannot write {path}: {err.strerror or err}") from None


def _filtered(sentences: Sequence[Sentence], name: str | None, punct_class: PunctClass) -> list[Sentence]:
    if not name:
        return list(sentences)
    keep = FILTERS[name]
    return [s for s in sentences if keep(s, punct_class)]


def _check_output(sentences: Sequence[Sentence]) -> None:
    for i, s in enumerate(sentences):
        report = validate(s)
        if not report.ok:
            raise InvalidTreeError(f"sentence {i}: produced an invalid tree: {report}")


# -- commands -----------------------------------------------------------------

def cmd_strip(args) -> int:
    punct_class = PunctClass.parse(args.punct_class)
    doc = _read(args.input)
    sentences = _filtered(doc.sentences, args.filter, punct_class)
    out, removed, lifted = [], 0, 0
    for i, s in enumerate(sentences):
        try:
            stripped, strip_log = strip_punct(s, punct_class)
        except PerturbError as err:
            raise DataError(f"sentence {i}: {err}") from None
        out.append(stripped)
        removed += len(strip_log.removed)
        lifted += strip_log.lifted_dependents
    _check_output(out)
    _write(out, args.out)
    print(f"sentences: {len(out)}\nremoved tokens: {removed}\nlifted dependents: {lifted}")
    return EXIT_OK


def cmd_inject(args) -> int:
    doc = _read(args.input)
    sentences = _filtered(doc.sentences, args.filter, PunctClass.parse(args.punct_class))
    config = PerturbConfig(args.chi, args.delta, master_seed=args.seed)
    out, commas, dots, nonproj = [], 0, 0, 0
    for i, s in enumerate(sentences):
        injected, inject_log = inject_punct(s, config, ordinal=i)
        out.append(injected)
        commas += inject_log.commas
        dots += inject_log.dots
        nonproj += inject_log.made_nonprojective
    _check_output(out)
    _write(out, args.out)
    print(
        f"sentences: {len(out)}\ninjected commas: {commas}\ninjected dots: {dots}\n"
        f"injected total: {commas + dots}\nmade non-projective: {nonproj}"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    punct_class = PunctClass.parse(args.punct_class)
    gold = _read(args.gold).sentences
    system = _read(args.system).sentences
    if args.filter:
        if len(gold) != len(system):
            raise DataError(f"gold has {len(gold)} sentences, system has {len(system)}")
        keep = FILTERS[args.filter]
        pairs = [(g, s) for g, s in zip(gold, system) if keep(g, punct_class)]
        gold, system = [g for g, _ in pairs], [s for _, s in pairs]
    try:
        report = attachment_scores(gold, system, punct_class)
    except EvalAlignmentError as err:
        raise DataError(str(err)) from None
    print(f"scored tokens: {report.scored_tokens}\nUAS: {report.uas:.4f}\nLAS: {report.las:.4f}")
    if args.out:
        body = dict(report.to_dict(), punct_class=punct_class.value, sentences=len(gold))
        Path(args.out).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_train(args) -> int:
    doc = _read(args.input)
    try:
        model = train(doc.sentences, args.epochs, Mode.parse(args.mode), args.seed)
    except TrainingDataError as err:
        raise DataError(str(err)) from None
    model.save(args.out)
    meta = model.training_meta
    print(
        f"mode: {model.mode.value}\ntraining sentences: {meta['sentences']}\n"
        f"skipped non-projective: {meta['skipped_nonprojective']}\n"
        f"features: {len(model.features)}\nlabels: {len(model.labels)}"
    )
    return EXIT_OK


def cmd_parse(args) -> int:
    try:
        model = ParserModel.load(args.model)
    except (OSError, ValueError, KeyError) as err:
        raise DataError(f"cannot load model {args.model}: {err}") from None
    doc = _read(args.input)
    out = parse_all(model, doc.sentences)
    _check_output(out)
    _write(out, args.out)
    print(f"parsed sentences: {len(out)}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        config = load_config(args.config)
    except OSError as err:
        raise DataError(f"cannot read {args.config}: {err.strerror or err}") from None
    except ConfigError as err:
        raise UsageError(str(err)) from None
    try:
        report = run_experiment(config)
    except StageError as err:
        if isinstance(err.cause, (InvalidTreeError, AlignmentError)):
            raise
        raise DataError(str(err)) from None
    out_dir = args.out or Path(args.config).with_suffix("").name + "-report"
    json_path, text_path = write_report(report, out_dir)
    sys.stdout.write(report["table"])
    print(f"wrote {json_path} and {text_path}")
    return EXIT_OK


def cmd_synth(args) -> int:
    sentences = generate(args.sentences, seed=args.seed, max_length=args.max_length)
    _write(sentences, args.out)
    print(f"generated sentences: {len(sentences)}")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="punctrobust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def punct_flag(p, default):
        p.add_argument("--punct-class", choices=[c.value for c in PunctClass], default=default,
                       help=f"punctuation predicate (default: {default})")

    def filter_flag(p):
        p.add_argument("--filter", choices=sorted(FILTERS), help="keep only sentences matching this predicate")

    p = sub.add_parser("strip", help="remove punctuation from a treebank")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    punct_flag(p, "all")
    filter_flag(p)
    p.set_defaults(func=cmd_strip)

    p = sub.add_parser("inject", help="inject commas and dots at random")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--chi", type=_probability, default=0.0, help="comma injection probability")
    p.add_argument("--delta", type=_probability, default=0.0, help="dot injection probability")
    p.add_argument("--seed", type=int, default=0)
    punct_flag(p, "all")
    filter_flag(p)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("eval", help="punctuation-excluded UAS/LAS")
    p.add_argument("gold")
    p.add_argument("system")
    p.add_argument("--out", help="write a JSON report here")
    punct_flag(p, "all")
    filter_flag(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("train", help="train the reference parser")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="model file (JSON)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="standard")
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse with a trained model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("experiment", help="run a robustness experiment from a TOML config")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default: <config>-report)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", help="generate a synthetic English-like treebank")
    p.add_argument("--out", required=True)
    p.add_argument("--sentences", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-length", type=int, default=40)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "epochs", 1) < 1:
        parser.exit(EXIT_USAGE, "punctrobust: error: --epochs must be >= 1\n")
    try:
        return args.func(args)
    except UsageError as err:
        print(f"punctrobust: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"punctrobust: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidTreeError, AlignmentError, OracleError, StageError) as err:
        print(f"punctrobust: internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
