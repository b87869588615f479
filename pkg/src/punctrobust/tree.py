"""Dependency tree model: tokens, sentences, validation, punctuation
classes and projectivity."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple


class PunctClass(enum.Enum):
    """Which tokens count as punctuation.

    ``DOTS_AND_COMMAS`` matches exactly the forms ``.`` and ``,``;
    ``ALL_PUNCT`` matches any token labelled ``punct`` or tagged ``PUNCT``.
    """

    DOTS_AND_COMMAS = "dots-commas"
    ALL_PUNCT = "all"

    @classmethod
    def parse(cls, value: str | PunctClass) -> PunctClass:
        if isinstance(value, PunctClass):
            return value
        for member in cls:
            if member.value == value or member.name.lower() == value.lower():
                return member
        raise ValueError(f"unknown punctuation class: {value!r}")


DOT = "."
COMMA = ","
UNDERSCORE = "_"


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    upos: str
    head: int
    deprel: str
    lemma: str = UNDERSCORE
    xpos: str = UNDERSCORE
    feats: str = UNDERSCORE
    deps: str = UNDERSCORE
    misc: str = UNDERSCORE

    def moved(self, id: int, head: int) -> Token:
        return replace(self, id=id, head=head)


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = field(default=())

    def __post_init__(self):
        # accept lists for convenience, store tuples so sentences hash and compare
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "comments", tuple(self.comments))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, position: int) -> Token:
        """1-based access, matching token ids."""
        if position < 1:
            raise IndexError(position)
        return self.tokens[position - 1]

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def heads(self) -> list[int]:
        return [t.head for t in self.tokens]

    def root(self) -> int:
        """Position of the (first) token attached to the artificial root, 0 if none."""
        for t in self.tokens:
            if t.head == 0:
                return t.id
        return 0

    def arcs(self) -> list[tuple[int, int]]:
        """(head, dependent) pairs, root arcs included with head 0."""
        return [(t.head, t.id) for t in self.tokens]


def is_punct(token: Token, punct_class: PunctClass) -> bool:
    if punct_class is PunctClass.DOTS_AND_COMMAS:
        return token.form in (DOT, COMMA)
    return token.deprel == "punct" or token.upos == "PUNCT"


def looks_like_punct(token: Token) -> bool:
    """Permissive test used for tokens whose labels may be predicted."""
    return (
        token.form in (DOT, COMMA)
        or token.upos == "PUNCT"
        or token.deprel == "punct"
        or (bool(token.form) and all(not ch.isalnum() for ch in token.form))
    )


class Violation(NamedTuple):
    kind: str
    token_ids: tuple[int, ...]
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(v.message for v in self.violations)


class InvalidTreeError(ValueError):
    pass


def validate(sentence: Sentence) -> ValidationReport:
    """Check ids, head range, self-loops, single-rootedness and acyclicity."""
    violations: list[Violation] = []
    n = len(sentence.tokens)
    for position, tok in enumerate(sentence.tokens, start=1):
        if tok.id != position:
            violations.append(
                Violation("id", (tok.id,), f"token at position {position} has id {tok.id}")
            )
    for tok in sentence.tokens:
        if not 0 <= tok.head <= n:
            violations.append(
                Violation("head-range", (tok.id,), f"token {tok.id} has head {tok.head} outside 0..{n}")
            )
        elif tok.head == tok.id:
            violations.append(Violation("self-loop", (tok.id,), f"token {tok.id} heads itself"))
    roots = tuple(t.id for t in sentence.tokens if t.head == 0)
    if n and len(roots) != 1:
        violations.append(
            Violation("single-root", roots, f"expected exactly one root, found {len(roots)}: {list(roots)}")
        )
    if any(v.kind in ("id", "head-range") for v in violations):
        return ValidationReport(violations)

    heads = [0] + [t.head for t in sentence.tokens]
    # 0 = unvisited, 1 = on current path, 2 = known to reach the root
    state = [0] * (n + 1)
    state[0] = 2
    reported: set[int] = set()
    for start in range(1, n + 1):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node]
        if state[node] == 1:
            cycle = tuple(sorted(path[path.index(node):]))
            if not reported.intersection(cycle):
                reported.update(cycle)
                violations.append(Violation("cycle", cycle, f"cycle through tokens {list(cycle)}"))
        for p in path:
            state[p] = 2
    return ValidationReport(violations)


def check_valid(sentence: Sentence) -> None:
    report = validate(sentence)
    if not report.ok:
        raise InvalidTreeError(str(report))


def _arc_span(arc: tuple[int, int]) -> tuple[int, int]:
    h, d = arc
    return (h, d) if h < d else (d, h)


def arcs_cross(a: tuple[int, int], b: tuple[int, int]) -> bool:
    (i, j), (k, l) = _arc_span(a), _arc_span(b)
    return i < k < j < l or k < i < l < j


def crossing_arc_pairs(sentence: Sentence) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All pairs of crossing arcs as ((head, dep), (head, dep)), ordered by dependent.

    Arcs from the artificial root take part with head 0, so a token arc
    spanning the root token counts as crossing the root arc.
    """
    check_valid(sentence)
    arcs = sorted(sentence.arcs(), key=lambda arc: arc[1])
    pairs = []
    for x in range(len(arcs)):
        for y in range(x + 1, len(arcs)):
            if arcs_cross(arcs[x], arcs[y]):
                pairs.append((arcs[x], arcs[y]))
    return pairs


def is_projective(sentence: Sentence) -> bool:
    check_valid(sentence)
    # left end ascending, right end descending, so spans sharing a left end nest
    spans = sorted((_arc_span(arc) for arc in sentence.arcs()), key=lambda s: (s[0], -s[1]))
    stack: list[int] = []
    for left, right in spans:
        while stack and stack[-1] <= left:
            stack.pop()
        if stack and right > stack[-1]:
            return False
        stack.append(right)
    return True
