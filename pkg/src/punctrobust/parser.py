"""Greedy arc-eager dependency parser with an averaged perceptron.

Two training regimes: ``standard`` sees punctuation like any other token;
``nopunct`` strips dots and commas before training and before decoding,
then reattaches them deterministically.
"""

from __future__ import annotations

import enum
import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .perturb import PerturbError, attach_stripped, strip_for_parsing, strip_punct
from .tree import PunctClass, Sentence, check_valid, is_projective

log = logging.getLogger(__name__)

FEATURE_VERSION = 1
MODEL_FORMAT = "punctrobust-arc-eager"
ROOT_FORM = "<ROOT>"
NONE = "<NONE>"


class Mode(enum.Enum):
    STANDARD = "standard"
    NOPUNCT = "nopunct"

    @classmethod
    def parse(cls, value: str | Mode) -> Mode:
        return value if isinstance(value, Mode) else cls(value.lower())


class OracleError(ValueError):
    """Sentence cannot be derived by the arc-eager system (non-projective)."""


class TrainingDataError(ValueError):
    pass


SHIFT, RIGHT, LEFT, REDUCE = "SHIFT", "RIGHT", "LEFT", "REDUCE"


class Transition(NamedTuple):
    kind: str
    label: str | None = None

    def __str__(self) -> str:
        return self.kind if self.label is None else f"{self.kind}:{self.label}"

    @classmethod
    def from_str(cls, text: str) -> Transition:
        kind, _, label = text.partition(":")
        return cls(kind, label or None)


@dataclass
class ParserState:
    """Stack, buffer front and partial arcs; positions are 1-based, 0 is the root."""

    n: int
    stack: list[int] = field(default_factory=lambda: [0])
    buffer_front: int = 1
    heads: list[int] = field(init=False)
    labels: list[str | None] = field(init=False)
    leftmost: list[int] = field(init=False)
    rightmost: list[int] = field(init=False)

    def __post_init__(self):
        self.heads = [-1] * (self.n + 1)
        self.labels = [None] * (self.n + 1)
        self.leftmost = [0] * (self.n + 1)
        self.rightmost = [0] * (self.n + 1)

    @property
    def buffer(self) -> range:
        return range(self.buffer_front, self.n + 1)

    @property
    def terminal(self) -> bool:
        return self.buffer_front > self.n

    def arcs(self) -> set[tuple[int, int, str]]:
        return {(self.heads[d], d, self.labels[d]) for d in range(1, self.n + 1) if self.heads[d] >= 0}

    def root_taken(self) -> bool:
        return self.rightmost[0] != 0

    def can(self, kind: str) -> bool:
        if self.terminal:
            return False
        s0 = self.stack[-1] if self.stack else None
        if kind == SHIFT:
            return True
        if kind == RIGHT:
            return s0 is not None and not (s0 == 0 and self.root_taken())
        if kind == LEFT:
            return s0 is not None and s0 != 0 and self.heads[s0] < 0
        if kind == REDUCE:
            return s0 is not None and s0 != 0 and self.heads[s0] >= 0
        raise ValueError(kind)

    def _attach(self, head: int, dep: int, label: str) -> None:
        self.heads[dep] = head
        self.labels[dep] = label
        if dep < head and (self.leftmost[head] == 0 or dep < self.leftmost[head]):
            self.leftmost[head] = dep
        if dep > head and dep > self.rightmost[head]:
            self.rightmost[head] = dep

    def apply(self, t: Transition) -> None:
        if not self.can(t.kind):
            raise ValueError(f"transition {t} not permitted")
        if t.kind == SHIFT:
            self.stack.append(self.buffer_front)
            self.buffer_front += 1
        elif t.kind == RIGHT:
            self._attach(self.stack[-1], self.buffer_front, t.label)
            self.stack.append(self.buffer_front)
            self.buffer_front += 1
        elif t.kind == LEFT:
            self._attach(self.buffer_front, self.stack.pop(), t.label)
        else:
            self.stack.pop()


def next_oracle_transition(state: ParserState, gold_heads: Sequence[int], gold_labels: Sequence[str]) -> Transition:
    """Static arc-eager oracle; gold arrays are indexed by position (index 0 unused)."""
    s0 = state.stack[-1]
    b0 = state.buffer_front
    if s0 != 0 and gold_heads[s0] == b0:
        return Transition(LEFT, gold_labels[s0])
    if gold_heads[b0] == s0:
        return Transition(RIGHT, gold_labels[b0])
    if s0 != 0 and state.heads[s0] >= 0:
        for k in state.stack[:-1]:
            if gold_heads[b0] == k or (k != 0 and gold_heads[k] == b0):
                return Transition(REDUCE)
    return Transition(SHIFT)


def oracle_transitions(sentence: Sentence) -> list[Transition]:
    """Transition sequence whose replay rebuilds the sentence's arcs exactly."""
    check_valid(sentence)
    if not is_projective(sentence):
        raise OracleError("sentence is non-projective; no arc-eager derivation exists")
    gold_heads = [0] + sentence.heads
    gold_labels = [""] + [t.deprel for t in sentence.tokens]
    state = ParserState(len(sentence))
    sequence = []
    while not state.terminal:
        t = next_oracle_transition(state, gold_heads, gold_labels)
        state.apply(t)
        sequence.append(t)
    if any(state.heads[d] != gold_heads[d] for d in range(1, len(sentence) + 1)):
        raise OracleError("oracle failed to reconstruct the gold tree")
    return sequence


def replay(n: int, transitions: Iterable[Transition]) -> set[tuple[int, int, str]]:
    state = ParserState(n)
    for t in transitions:
        state.apply(t)
    return state.arcs()


def _distance_bucket(d: int) -> str:
    if d <= 4:
        return str(d)
    return "5-9" if d < 10 else "10+"


def extract_features(state: ParserState, forms: Sequence[str], tags: Sequence[str]) -> list[str]:
    """Feature strings for a state; ``forms``/``tags`` are indexed by position, 0 = root."""
    n = state.n
    s0 = state.stack[-1] if state.stack else -1
    s1 = state.stack[-2] if len(state.stack) > 1 else -1
    b0 = state.buffer_front if state.buffer_front <= n else -1
    b1 = state.buffer_front + 1 if state.buffer_front + 1 <= n else -1

    def w(i):
        return forms[i] if i >= 0 else NONE

    def p(i):
        return tags[i] if i >= 0 else NONE

    def lab(i):
        return (state.labels[i] or NONE) if i > 0 else NONE

    s0w, s0p, b0w, b0p, b1w, b1p = w(s0), p(s0), w(b0), p(b0), w(b1), p(b1)
    s0l = lab(state.leftmost[s0]) if s0 >= 0 else NONE
    s0r = lab(state.rightmost[s0]) if s0 >= 0 else NONE
    b0l = lab(state.leftmost[b0]) if b0 > 0 else NONE
    dist = _distance_bucket(b0 - s0) if s0 > 0 and b0 > 0 else NONE
    s0h = "y" if s0 > 0 and state.heads[s0] >= 0 else "n"
    return [
        "bias",
        "s0w=" + s0w,
        "s0p=" + s0p,
        "b0w=" + b0w,
        "b0p=" + b0p,
        "b1w=" + b1w,
        "b1p=" + b1p,
        "s1p=" + p(s1),
        "s0l=" + s0l,
        "s0r=" + s0r,
        "b0l=" + b0l,
        "dist=" + dist,
        "s0h=" + s0h,
        f"s0wp={s0w}/{s0p}",
        f"b0wp={b0w}/{b0p}",
        f"s0p,b0p={s0p},{b0p}",
        f"s0w,b0p={s0w},{b0p}",
        f"s0p,b0w={s0p},{b0w}",
        f"s0w,b0w={s0w},{b0w}",
        f"s0p,b0p,b1p={s0p},{b0p},{b1p}",
        f"s1p,s0p,b0p={p(s1)},{s0p},{b0p}",
        f"s0p,s0l,s0r={s0p},{s0l},{s0r}",
        f"b0p,b0l={b0p},{b0l}",
        f"s0p,b0p,dist={s0p},{b0p},{dist}",
        f"s0h,s0p,b0p={s0h},{s0p},{b0p}",
    ]


class ParserModel:
    """Averaged linear model over (feature, transition) pairs."""

    def __init__(self, labels: Sequence[str], mode: Mode = Mode.STANDARD, training_meta: dict | None = None):
        if not labels:
            raise ValueError("label set must not be empty")
        self.labels = sorted(set(labels))
        self.mode = Mode.parse(mode)
        self.feature_version = FEATURE_VERSION
        self.training_meta = dict(training_meta or {})
        # priority order doubles as the tie-break order: argmax keeps the first maximum
        self.transitions = (
            [Transition(SHIFT)]
            + [Transition(RIGHT, l) for l in self.labels]
            + [Transition(LEFT, l) for l in self.labels]
            + [Transition(REDUCE)]
        )
        self.index = {t: i for i, t in enumerate(self.transitions)}
        kinds = np.array([t.kind for t in self.transitions])
        self._kind_masks = {k: kinds == k for k in (SHIFT, RIGHT, LEFT, REDUCE)}
        self.features: dict[str, int] = {}
        self.weights = np.zeros((0, len(self.transitions)))
        self.finalized = False

    # -- scoring ------------------------------------------------------------

    def feature_ids(self, feats: Iterable[str], grow: bool = False) -> list[int]:
        ids = []
        for f in feats:
            i = self.features.get(f)
            if i is None and grow:
                i = self.features[f] = len(self.features)
            if i is not None:
                ids.append(i)
        if grow and len(self.features) > self.weights.shape[0]:
            self._grow(len(self.features))
        return ids

    def _grow(self, rows: int) -> None:
        new_rows = max(rows, 2 * self.weights.shape[0], 1024)
        extra = new_rows - self.weights.shape[0]
        self.weights = np.vstack([self.weights, np.zeros((extra, len(self.transitions)))])

    def scores(self, ids: list[int]) -> np.ndarray:
        if not ids:
            return np.zeros(len(self.transitions))
        return self.weights[ids].sum(axis=0)

    def valid_mask(self, state: ParserState) -> np.ndarray:
        mask = np.zeros(len(self.transitions), dtype=bool)
        for kind, km in self._kind_masks.items():
            if state.can(kind):
                mask |= km
        return mask

    def best(self, scores: np.ndarray, mask: np.ndarray) -> int:
        masked = np.where(mask, scores, -np.inf)
        return int(np.argmax(masked))

    # -- decoding -----------------------------------------------------------

    def parse(self, sentence: Sentence) -> Sentence:
        return parse(self, sentence)

    # -- persistence --------------------------------------------------------

    def to_dict(self) -> dict:
        names = [None] * len(self.features)
        for f, i in self.features.items():
            names[i] = f
        weights = {}
        for i, f in enumerate(names):
            row = self.weights[i]
            nz = np.flatnonzero(row)
            if len(nz):
                weights[f] = {str(self.transitions[j]): float(row[j]) for j in nz}
        return {
            "format": MODEL_FORMAT,
            "feature_version": self.feature_version,
            "mode": self.mode.value,
            "labels": self.labels,
            "training_meta": self.training_meta,
            "weights": weights,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ParserModel:
        if data.get("format") != MODEL_FORMAT:
            raise ValueError("not a punctrobust parser model")
        if data.get("feature_version") != FEATURE_VERSION:
            raise ValueError(f"unsupported feature version {data.get('feature_version')}")
        model = cls(data["labels"], Mode.parse(data["mode"]), data.get("training_meta"))
        model.weights = np.zeros((len(data["weights"]), len(model.transitions)))
        for i, (f, row) in enumerate(data["weights"].items()):
            model.features[f] = i
            for name, value in row.items():
                model.weights[i, model.index[Transition.from_str(name)]] = value
        model.finalized = True
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> ParserModel:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _columns(sentence: Sentence) -> tuple[list[str], list[str]]:
    return [ROOT_FORM] + sentence.forms, [ROOT_FORM] + [t.upos for t in sentence.tokens]


def _decode(model: ParserModel, sentence: Sentence) -> Sentence:
    n = len(sentence)
    if n == 0:
        return sentence
    forms, tags = _columns(sentence)
    state = ParserState(n)
    while not state.terminal:
        ids = model.feature_ids(extract_features(state, forms, tags))
        t = model.transitions[model.best(model.scores(ids), model.valid_mask(state))]
        state.apply(t)

    heads, labels = state.heads, state.labels
    root = state.rightmost[0]
    unattached = [d for d in range(1, n + 1) if heads[d] < 0]
    if not root:
        root = unattached.pop(0)
        heads[root], labels[root] = 0, "root"
    for d in unattached:
        heads[d], labels[d] = root, "dep"
    out = Sentence(
        [replace(t, head=heads[t.id], deprel=labels[t.id]) for t in sentence.tokens],
        sentence.comments,
    )
    return out


def parse(model: ParserModel, sentence: Sentence) -> Sentence:
    """Parse one sentence; forms and all non-tree columns are kept.

    Input heads and labels are ignored. A NoPunct model decodes the
    sentence without dots and commas and reattaches them afterwards.
    """
    if model.mode is Mode.NOPUNCT:
        core, strip_log = strip_for_parsing(sentence, PunctClass.DOTS_AND_COMMAS)
        return attach_stripped(_decode(model, core), strip_log)
    return _decode(model, sentence)


def parse_all(model: ParserModel, sentences: Iterable[Sentence]) -> list[Sentence]:
    return [parse(model, s) for s in sentences]


def training_instances(sentences: Iterable[Sentence], mode: Mode) -> tuple[list[Sentence], dict]:
    """Sentences the learner actually sees, plus skip counts."""
    mode = Mode.parse(mode)
    kept, skipped_nonprojective, skipped_strip = [], 0, 0
    for s in sentences:
        if mode is Mode.NOPUNCT:
            try:
                s, _ = strip_punct(s, PunctClass.DOTS_AND_COMMAS)
            except PerturbError:
                skipped_strip += 1
                continue
        if not is_projective(s):
            skipped_nonprojective += 1
            continue
        kept.append(s)
    return kept, {"skipped_nonprojective": skipped_nonprojective, "skipped_unstrippable": skipped_strip}


def train(sentences: Iterable[Sentence], epochs: int, mode: Mode | str = Mode.STANDARD, seed: int = 0) -> ParserModel:
    """Averaged-perceptron training with a static oracle; deterministic given its inputs."""
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    mode = Mode.parse(mode)
    instances, counts = training_instances(sentences, mode)
    if not instances:
        raise TrainingDataError("no projective training sentence available")
    labels = sorted({t.deprel for s in instances for t in s.tokens})
    model = ParserModel(
        labels,
        mode,
        {"epochs": epochs, "seed": seed, "sentences": len(instances), **counts},
    )
    if counts["skipped_nonprojective"]:
        log.info("skipped %d non-projective training sentences", counts["skipped_nonprojective"])

    # averaged perceptron via the running-sum trick: avg = w - u / c
    totals = np.zeros_like(model.weights)
    c = 1
    rng = random.Random(seed)
    order = list(range(len(instances)))
    for epoch in range(epochs):
        rng.shuffle(order)
        mistakes = steps = 0
        for idx in order:
            s = instances[idx]
            forms, tags = _columns(s)
            gold_heads = [0] + s.heads
            gold_labels = [""] + [t.deprel for t in s.tokens]
            state = ParserState(len(s))
            while not state.terminal:
                ids = model.feature_ids(extract_features(state, forms, tags), grow=True)
                if totals.shape != model.weights.shape:
                    totals = np.vstack([totals, np.zeros((model.weights.shape[0] - totals.shape[0], totals.shape[1]))])
                gold = model.index[next_oracle_transition(state, gold_heads, gold_labels)]
                guess = model.best(model.scores(ids), model.valid_mask(state))
                if guess != gold:
                    mistakes += 1
                    for i in ids:
                        model.weights[i, gold] += 1.0
                        model.weights[i, guess] -= 1.0
                        totals[i, gold] += c
                        totals[i, guess] -= c
                state.apply(model.transitions[gold])
                steps += 1
                c += 1
        log.info("epoch %d: %d/%d transitions mispredicted", epoch + 1, mistakes, steps)
    model.weights = model.weights - totals / c
    rows = len(model.features)
    model.weights = model.weights[:rows].copy()
    model.finalized = True
    return model
