"""Punctuation-excluded attachment scores and the relative error metric."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .tree import PunctClass, Sentence, is_punct, looks_like_punct


class EvalAlignmentError(ValueError):
    def __init__(self, message: str, sentence_index: int | None = None):
        if sentence_index is not None:
            message = f"sentence {sentence_index}: {message}"
        super().__init__(message)
        self.sentence_index = sentence_index


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class Alignment:
    """Aligned non-punctuation tokens.

    ``pairs`` holds (gold position, system position) for every scored
    token; ``gold_index``/``system_index`` map positions to the ordinal of
    the aligned pair, covering aligned tokens only.
    """

    pairs: tuple[tuple[int, int], ...]
    gold_index: Mapping[int, int]
    system_index: Mapping[int, int]
    identical: bool

    def __len__(self) -> int:
        return len(self.pairs)


def align_nonpunct(gold: Sentence, system: Sentence, punct_class: PunctClass) -> Alignment:
    """Match gold non-punctuation tokens to system tokens in order by form.

    Gold punctuation is decided by ``punct_class``. System tokens that are
    not matched must look like punctuation; system labels may be predicted,
    so an unmatched word form is an alignment error.
    """
    identical = gold.forms == system.forms
    if identical:
        pairs = tuple((t.id, t.id) for t in gold.tokens if not is_punct(t, punct_class))
    else:
        wanted = [t for t in gold.tokens if not is_punct(t, punct_class)]
        matched = []
        k = 0
        for tok in system.tokens:
            if k < len(wanted) and tok.form == wanted[k].form:
                matched.append((wanted[k].id, tok.id))
                k += 1
            elif not looks_like_punct(tok):
                expected = wanted[k].form if k < len(wanted) else "<end of sentence>"
                raise EvalAlignmentError(
                    f"system token {tok.id} {tok.form!r} does not match gold non-punctuation token "
                    f"{expected!r} (position {k + 1} among non-punctuation tokens)"
                )
        if k < len(wanted):
            raise EvalAlignmentError(
                f"system output ends before gold non-punctuation token {wanted[k].id} {wanted[k].form!r}"
            )
        pairs = tuple(matched)
    return Alignment(
        pairs=pairs,
        gold_index={g: i for i, (g, _) in enumerate(pairs)},
        system_index={s: i for i, (_, s) in enumerate(pairs)},
        identical=identical,
    )


def _head_key(sentence: Sentence, head: int, index: Mapping[int, int]) -> int:
    """Aligned ordinal of the nearest aligned ancestor-or-self of ``head``; -1 is the root."""
    seen = 0
    while head and head not in index:
        head = sentence[head].head
        seen += 1
        if seen > len(sentence):
            raise ValueError("cyclic head chain")
    return index[head] if head else -1


class SentenceScore(NamedTuple):
    scored: int
    head_correct: int
    both_correct: int


@dataclass
class EvalReport:
    scored_tokens: int = 0
    head_correct: int = 0
    both_correct: int = 0
    per_sentence: list[SentenceScore] = field(default_factory=list)

    @property
    def uas(self) -> float:
        return self.head_correct / self.scored_tokens if self.scored_tokens else 0.0

    @property
    def las(self) -> float:
        return self.both_correct / self.scored_tokens if self.scored_tokens else 0.0

    def add(self, score: SentenceScore) -> None:
        self.per_sentence.append(score)
        self.scored_tokens += score.scored
        self.head_correct += score.head_correct
        self.both_correct += score.both_correct

    def merged(self, other: EvalReport) -> EvalReport:
        out = EvalReport()
        for s in self.per_sentence + other.per_sentence:
            out.add(s)
        return out

    def to_dict(self) -> dict:
        return {"uas": self.uas, "las": self.las, "scored_tokens": self.scored_tokens}


def score_sentence(gold: Sentence, system: Sentence, punct_class: PunctClass) -> SentenceScore:
    alignment = align_nonpunct(gold, system, punct_class)
    head_ok = both_ok = 0
    for g, s in alignment.pairs:
        gold_tok, sys_tok = gold[g], system[s]
        # heads are compared through their nearest scored ancestor, so an arc
        # into a punctuation token scores the same whether or not it was kept
        correct_head = _head_key(gold, gold_tok.head, alignment.gold_index) == _head_key(
            system, sys_tok.head, alignment.system_index
        )
        if correct_head:
            head_ok += 1
            if gold_tok.deprel == sys_tok.deprel:
                both_ok += 1
    return SentenceScore(len(alignment), head_ok, both_ok)


def attachment_scores(
    gold_doc: Iterable[Sentence], system_doc: Iterable[Sentence], punct_class: PunctClass
) -> EvalReport:
    """Micro-averaged UAS/LAS over non-punctuation tokens."""
    gold_list, system_list = list(gold_doc), list(system_doc)
    if len(gold_list) != len(system_list):
        raise EvalAlignmentError(
            f"gold has {len(gold_list)} sentences, system has {len(system_list)}"
        )
    report = EvalReport()
    for i, (gold, system) in enumerate(zip(gold_list, system_list)):
        try:
            report.add(score_sentence(gold, system, punct_class))
        except EvalAlignmentError as err:
            raise EvalAlignmentError(str(err), i) from None
    return report


def relative_error_increase(bl: float, sys: float) -> float:
    """Proportional growth of error going from baseline score ``bl`` to ``sys``.

    (1 - sys) / (1 - bl) - 1; zero when the scores are equal.
    """
    if bl >= 1.0:
        raise UndefinedMetricError(f"relative error increase is undefined for a perfect baseline (bl={bl})")
    return (1.0 - sys) / (1.0 - bl) - 1.0


@dataclass
class RobustnessReport:
    baseline_las: float
    condition_las: dict[str, float] = field(default_factory=dict)
    rel_err_increase: dict[str, float] = field(default_factory=dict)
    baseline: EvalReport | None = None
    conditions: dict[str, EvalReport] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {}
        if self.baseline is not None:
            out.update(self.baseline.to_dict())
        else:
            out["las"] = self.baseline_las
        out["conditions"] = {
            name: (self.conditions[name].to_dict() if name in self.conditions else {"las": las})
            for name, las in self.condition_las.items()
        }
        out["rel_err_increase"] = dict(self.rel_err_increase)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def robustness_report(baseline: EvalReport | float, conditions: Mapping[str, EvalReport | float]) -> RobustnessReport:
    """LAS per condition and its relative error increase over the baseline."""
    base_las = baseline.las if isinstance(baseline, EvalReport) else float(baseline)
    if base_las >= 1.0:
        raise UndefinedMetricError(f"baseline LAS is {base_las}; relative error increase is undefined")
    report = RobustnessReport(
        baseline_las=base_las, baseline=baseline if isinstance(baseline, EvalReport) else None
    )
    for name, cond in conditions.items():
        las = cond.las if isinstance(cond, EvalReport) else float(cond)
        report.condition_las[name] = las
        report.rel_err_increase[name] = relative_error_increase(base_las, las)
        if isinstance(cond, EvalReport):
            report.conditions[name] = cond
    return report


def format_table(rows: Mapping[str, RobustnessReport], condition_order: Sequence[str] | None = None) -> str:
    """Aligned text table: one row per system, LAS per condition and Rel.err.incr."""
    if not rows:
        return ""
    if condition_order is None:
        condition_order = list(next(iter(rows.values())).condition_las)
    header = ["system", "baseline"]
    for name in condition_order:
        header += [name, "Rel.err.incr."]
    body = []
    for system, report in rows.items():
        line = [system, f"{report.baseline_las:.3f}"]
        for name in condition_order:
            line.append(f"{report.condition_las[name]:.3f}")
            line.append(f"{report.rel_err_increase[name]:.3f}")
        body.append(line)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]

    def fmt(row):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return " | ".join(cells).rstrip()

    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([fmt(header), rule] + [fmt(r) for r in body]) + "\n"
