"""Punctuation removal and injection over dependency trees.

Both maps keep the rest of the tree intact: removal compacts positions
to the left, injection shifts positions to the right, and every
surviving token keeps its (remapped) head and label.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .tree import (
    COMMA,
    DOT,
    PunctClass,
    Sentence,
    Token,
    check_valid,
    is_projective,
    is_punct,
)

log = logging.getLogger(__name__)


class PerturbError(ValueError):
    pass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class PerturbConfig:
    chi: float = 0.0
    delta: float = 0.0
    punct_class: PunctClass = PunctClass.DOTS_AND_COMMAS
    master_seed: int = 0

    def __post_init__(self):
        for name in ("chi", "delta"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1], got {value}")


class RemovedToken(NamedTuple):
    original_position: int
    form: str
    original_head_position: int
    deprel: str
    token: Token


@dataclass
class StripLog:
    removed: list[RemovedToken] = field(default_factory=list)
    lifted_dependents: int = 0
    kept_forms: tuple[str, ...] = ()

    @property
    def original_length(self) -> int:
        return len(self.kept_forms) + len(self.removed)


class InjectedToken(NamedTuple):
    new_position: int
    form: str
    head_new_position: int


@dataclass
class InjectLog:
    injected: list[InjectedToken] = field(default_factory=list)
    made_nonprojective: bool = False

    @property
    def commas(self) -> int:
        return sum(1 for t in self.injected if t.form == COMMA)

    @property
    def dots(self) -> int:
        return sum(1 for t in self.injected if t.form == DOT)


def _filter_positions(sentence: Sentence, keep: list[bool]) -> tuple[Sentence, StripLog]:
    """Drop tokens where keep is False, lifting dependents of dropped tokens."""
    n = len(sentence)
    heads = [0] + sentence.heads
    new_position = [0] * (n + 1)
    m = 0
    for i in range(1, n + 1):
        if keep[i - 1]:
            m += 1
            new_position[i] = m

    log_ = StripLog(kept_forms=tuple(t.form for t, k in zip(sentence.tokens, keep) if k))
    tokens = []
    for tok in sentence.tokens:
        if not keep[tok.id - 1]:
            log_.removed.append(RemovedToken(tok.id, tok.form, tok.head, tok.deprel, tok))
            continue
        head = tok.head
        if head and not keep[head - 1]:
            log_.lifted_dependents += 1
            while head and not keep[head - 1]:
                head = heads[head]
        tokens.append(tok.moved(new_position[tok.id], new_position[head]))
    return Sentence(tokens, sentence.comments), log_


def strip_punct(sentence: Sentence, punct_class: PunctClass = PunctClass.DOTS_AND_COMMAS) -> tuple[Sentence, StripLog]:
    """Remove punctuation tokens and compact positions.

    Dependents of a removed token are lifted to its nearest surviving
    ancestor. Refuses sentences that are all punctuation or whose root
    token is punctuation.
    """
    check_valid(sentence)
    keep = [not is_punct(t, punct_class) for t in sentence.tokens]
    if not any(keep):
        raise PerturbError("sentence consists entirely of punctuation")
    root = sentence.root()
    if not keep[root - 1]:
        log.info("refusing to strip: root token %d %r is punctuation", root, sentence[root].form)
        raise PerturbError(f"root token {root} ({sentence[root].form!r}) is punctuation")
    return _filter_positions(sentence, keep)


def strip_for_parsing(sentence: Sentence, punct_class: PunctClass = PunctClass.DOTS_AND_COMMAS) -> tuple[Sentence, StripLog]:
    """Like strip_punct but ignores the input heads; the core gets flat heads.

    Used before decoding, where the input tree (if any) must not matter.
    """
    keep = [not is_punct(t, punct_class) for t in sentence.tokens]
    flat = Sentence([replace(t, head=0) for t in sentence.tokens], sentence.comments)
    core, strip_log = _filter_positions(flat, keep)
    core = Sentence([replace(t, head=0 if t.id == 1 else 1) for t in core.tokens], core.comments)
    return core, strip_log


def _punct_token(position: int, form: str, head: int) -> Token:
    return Token(id=position, form=form, upos="PUNCT", head=head, deprel="punct", xpos=form)


def sentence_rng(master_seed: int, ordinal: int) -> np.random.Generator:
    """Per-sentence generator, independent of processing order."""
    return np.random.default_rng(np.random.SeedSequence([master_seed & (2**64 - 1), ordinal]))


def inject_punct(sentence: Sentence, config: PerturbConfig, ordinal: int = 0, rng: np.random.Generator | None = None) -> tuple[Sentence, InjectLog]:
    """Inject commas and dots at random.

    For each original word i, in order: with probability ``chi`` a comma
    goes immediately before it, then with probability ``delta`` a dot
    goes immediately after it. Commas attach to their left neighbour
    (the root token when sentence-initial), dots to the root token.
    """
    check_valid(sentence)
    n = len(sentence)
    if rng is None:
        rng = sentence_rng(config.master_seed, ordinal)
    draws = rng.random((n, 2))
    comma_before = draws[:, 0] < config.chi
    dot_after = draws[:, 1] < config.delta
    if not (comma_before.any() or dot_after.any()):
        return sentence, InjectLog()

    # new position of every original token
    new_position = [0] * (n + 1)
    layout: list[tuple[str, int]] = []  # ("word", original id) or (form, 0)
    for i in range(1, n + 1):
        if comma_before[i - 1]:
            layout.append((COMMA, 0))
        layout.append(("word", i))
        new_position[i] = len(layout)
        if dot_after[i - 1]:
            layout.append((DOT, 0))

    root = new_position[sentence.root()]
    tokens = []
    inject_log = InjectLog()
    for position, (kind, original) in enumerate(layout, start=1):
        if kind == "word":
            tok = sentence[original]
            tokens.append(tok.moved(position, new_position[tok.head]))
            continue
        if kind == COMMA:
            head = position - 1 if position > 1 else root
        else:
            head = root
        tokens.append(_punct_token(position, kind, head))
        inject_log.injected.append(InjectedToken(position, kind, head))

    out = Sentence(tokens, sentence.comments)
    inject_log.made_nonprojective = is_projective(sentence) and not is_projective(out)
    return out, inject_log


def attach_stripped(parsed_core: Sentence, strip_log: StripLog) -> Sentence:
    """Reinsert removed punctuation into a (parsed) core sentence.

    Dots (and any punctuation other than commas) attach to the core's
    root token; commas attach to their left neighbour, or to the root
    token when sentence-initial.
    """
    if not strip_log.removed:
        return parsed_core
    if len(parsed_core) != len(strip_log.kept_forms):
        raise AlignmentError(
            f"core has {len(parsed_core)} tokens, strip log expects {len(strip_log.kept_forms)}"
        )
    for i, (got, expected) in enumerate(zip(parsed_core.forms, strip_log.kept_forms), start=1):
        if got != expected:
            raise AlignmentError(f"core token {i} is {got!r}, strip log expects {expected!r}")
    total = strip_log.original_length
    removed_at = {}
    previous = 0
    for entry in strip_log.removed:
        if not previous < entry.original_position <= total:
            raise AlignmentError(f"removed position {entry.original_position} out of order or range")
        previous = entry.original_position
        removed_at[entry.original_position] = entry

    new_position = [0] * (len(parsed_core) + 1)
    k = 0
    for position in range(1, total + 1):
        if position not in removed_at:
            k += 1
            new_position[k] = position
    core_root = parsed_core.root()
    root = new_position[core_root] if core_root else 0

    tokens = []
    k = 0
    for position in range(1, total + 1):
        entry = removed_at.get(position)
        if entry is None:
            k += 1
            tok = parsed_core[k]
            tokens.append(tok.moved(position, new_position[tok.head]))
            continue
        if entry.form == COMMA and position > 1:
            head = position - 1
        else:
            head = root
        if head == 0:
            # no core root to attach to: first reinserted token becomes root
            root = position
            tokens.append(replace(entry.token, id=position, head=0, deprel="root"))
            continue
        tokens.append(replace(entry.token, id=position, head=head, deprel="punct"))
    out = Sentence(tokens, parsed_core.comments)
    check_valid(out)
    return out
