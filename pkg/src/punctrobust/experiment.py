"""Experiment orchestration: train, perturb, parse, score, report.

Config files are TOML::

    train = "train.conllu"          # paths are relative to the config file
    test = "test.conllu"
    seed = 1
    epochs = 8
    modes = ["standard", "nopunct"]
    strip_class = "all"             # what the no_punct condition removes
    score_class = "all"             # what scoring ignores
    no_punct = true                 # include the no_punct condition
    repeats = 5                     # injection seeds per condition, pooled
    conditions = [
        ["d0.01_c0.01", 0.01, 0.01],  # name, chi (commas), delta (dots)
        ["d0.1_c0.1", 0.1, 0.1],
    ]
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import tomli

from . import __version__
from .conll import Document, read_conll
from .evaluate import EvalReport, attachment_scores, format_table, robustness_report
from .parser import Mode, ParserModel, parse_all, train
from .perturb import PerturbConfig, PerturbError, inject_punct, strip_punct
from .tree import PunctClass, Sentence

log = logging.getLogger(__name__)

NO_PUNCT = "no_punct"


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class Condition:
    name: str
    chi: float
    delta: float


@dataclass
class ExperimentConfig:
    train_path: Path
    test_path: Path
    conditions: list[Condition] = field(default_factory=list)
    no_punct: bool = True
    strip_class: PunctClass = PunctClass.ALL_PUNCT
    score_class: PunctClass = PunctClass.ALL_PUNCT
    seed: int = 0
    epochs: int = 8
    modes: tuple[Mode, ...] = (Mode.STANDARD, Mode.NOPUNCT)
    repeats: int = 1
    config_hash: str = ""

    def __post_init__(self):
        names = [c.name for c in self.conditions] + ([NO_PUNCT] if self.no_punct else [])
        if not names:
            raise ConfigError("at least one condition is required")
        if len(set(names)) != len(names):
            raise ConfigError(f"condition names must be unique: {names}")
        for c in self.conditions:
            if not (0.0 <= c.chi <= 1.0 and 0.0 <= c.delta <= 1.0):
                raise ConfigError(f"condition {c.name!r}: chi and delta must lie in [0, 1]")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not self.modes:
            raise ConfigError("at least one mode is required")

    @property
    def condition_names(self) -> list[str]:
        return ([NO_PUNCT] if self.no_punct else []) + [c.name for c in self.conditions]

    def to_dict(self) -> dict:
        return {
            "train": self.train_path.name,
            "test": self.test_path.name,
            "seed": self.seed,
            "epochs": self.epochs,
            "modes": [m.value for m in self.modes],
            "strip_class": self.strip_class.value,
            "score_class": self.score_class.value,
            "no_punct": self.no_punct,
            "repeats": self.repeats,
            "conditions": [[c.name, c.chi, c.delta] for c in self.conditions],
        }


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    raw = path.read_bytes()
    try:
        data = tomli.loads(raw.decode("utf-8"))
    except tomli.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}") from None
    base = path.parent
    known = {"train", "test", "seed", "epochs", "modes", "strip_class", "score_class",
             "no_punct", "repeats", "conditions"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("train", "test"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")
    try:
        conditions = [Condition(str(name), float(chi), float(delta)) for name, chi, delta in data.get("conditions", [])]
        return ExperimentConfig(
            train_path=(base / data["train"]),
            test_path=(base / data["test"]),
            conditions=conditions,
            no_punct=bool(data.get("no_punct", True)),
            strip_class=PunctClass.parse(data.get("strip_class", "all")),
            score_class=PunctClass.parse(data.get("score_class", "all")),
            seed=int(data.get("seed", 0)),
            epochs=int(data.get("epochs", 8)),
            modes=tuple(Mode.parse(m) for m in data.get("modes", ["standard", "nopunct"])),
            repeats=int(data.get("repeats", 1)),
            config_hash=hashlib.sha256(raw).hexdigest(),
        )
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from None


def repeat_seed(seed: int, repeat: int) -> int:
    """Master seed for one injection repeat; shared across conditions."""
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1, np.uint64)[0])


def strip_document(sentences: Sequence[Sentence], punct_class: PunctClass) -> tuple[list[Sentence], dict]:
    """Strip every sentence; unstrippable ones are kept as they are and counted."""
    out, removed, lifted, unstrippable = [], 0, 0, 0
    for s in sentences:
        try:
            stripped, strip_log = strip_punct(s, punct_class)
        except PerturbError:
            unstrippable += 1
            out.append(s)
            continue
        out.append(stripped)
        removed += len(strip_log.removed)
        lifted += strip_log.lifted_dependents
    return out, {"removed": removed, "lifted_dependents": lifted, "unstrippable": unstrippable}


def inject_document(sentences: Sequence[Sentence], config: PerturbConfig) -> tuple[list[Sentence], dict]:
    out, commas, dots, nonproj = [], 0, 0, 0
    for i, s in enumerate(sentences):
        injected, inject_log = inject_punct(s, config, ordinal=i)
        out.append(injected)
        commas += inject_log.commas
        dots += inject_log.dots
        nonproj += inject_log.made_nonprojective
    return out, {"commas": commas, "dots": dots, "made_nonprojective": nonproj}


def _stage(name: str):
    def wrap(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as err:  # noqa: BLE001 - reraised with the stage name
            raise StageError(name, err) from err
    return wrap


def build_conditions(config: ExperimentConfig, test: Sequence[Sentence]) -> tuple[dict[str, list[list[Sentence]]], dict]:
    """Perturbed test sets per condition (one per repeat) plus their counts."""
    sets: dict[str, list[list[Sentence]]] = {}
    counts: dict[str, dict] = {}
    if config.no_punct:
        stripped, c = strip_document(test, config.strip_class)
        sets[NO_PUNCT] = [stripped]
        counts[NO_PUNCT] = c
    for cond in config.conditions:
        sets[cond.name] = []
        total = {"commas": 0, "dots": 0, "made_nonprojective": 0}
        for r in range(config.repeats):
            pc = PerturbConfig(cond.chi, cond.delta, master_seed=repeat_seed(config.seed, r))
            injected, c = inject_document(test, pc)
            sets[cond.name].append(injected)
            for k in total:
                total[k] += c[k]
        counts[cond.name] = total
    return sets, counts


def evaluate_model(model: ParserModel, gold: Sequence[Sentence], condition_sets: dict[str, list[list[Sentence]]],
                   score_class: PunctClass) -> tuple[EvalReport, dict[str, EvalReport]]:
    baseline = attachment_scores(gold, parse_all(model, gold), score_class)
    conditions = {}
    for name, variants in condition_sets.items():
        pooled = EvalReport()
        for variant in variants:
            pooled = pooled.merged(attachment_scores(gold, parse_all(model, variant), score_class))
        conditions[name] = pooled
    return baseline, conditions


def run_experiment(config: ExperimentConfig) -> dict:
    """Run the full grid and return the report as a JSON-ready dict."""
    train_doc: Document = _stage("read-train")(read_conll, config.train_path)
    test_doc: Document = _stage("read-test")(read_conll, config.test_path)
    gold = test_doc.sentences
    condition_sets, perturb_counts = _stage("perturb")(build_conditions, config, gold)

    modes = {}
    tables = {}
    for mode in config.modes:
        model = _stage(f"train-{mode.value}")(train, train_doc.sentences, config.epochs, mode, config.seed)
        baseline, conditions = _stage(f"evaluate-{mode.value}")(
            evaluate_model, model, gold, condition_sets, config.score_class
        )
        report = _stage(f"report-{mode.value}")(robustness_report, baseline, conditions)
        entry = report.to_dict()
        entry["training"] = dict(model.training_meta)
        modes[mode.value] = entry
        tables[mode.value] = report
    return {
        "toolkit_version": __version__,
        "config_hash": config.config_hash,
        "config": config.to_dict(),
        "test_sentences": len(gold),
        "perturbation": perturb_counts,
        "modes": modes,
        "table": format_table(tables, config.condition_names),
    }


def write_report(report: dict, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    text_path = out_dir / "report.txt"
    body = {k: v for k, v in report.items() if k != "table"}
    json_path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    text_path.write_text(report["table"], encoding="utf-8")
    return json_path, text_path
