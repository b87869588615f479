"""Reading and writing CoNLL-X / CoNLL-U treebanks.

Both formats are handled at the shared 10-column level; only ID, FORM,
UPOS, HEAD and DEPREL are interpreted, every other column is carried
through verbatim.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, NamedTuple

from .tree import Sentence, Token, validate

log = logging.getLogger(__name__)

N_COLUMNS = 10


class ConllError(ValueError):
    """Base class for treebank input errors."""


class ConllParseError(ConllError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnsupportedConstructError(ConllError):
    pass


class TreeValidationError(ConllError):
    def __init__(self, message: str, sentence_index: int):
        super().__init__(f"sentence {sentence_index}: {message}")
        self.sentence_index = sentence_index


class RawRecord(NamedTuple):
    line_number: int
    columns: tuple[str, ...]


@dataclass
class Document:
    sentences: list[Sentence] = field(default_factory=list)
    source_name: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __eq__(self, other: object) -> bool:
        # the source name is provenance, not content
        if not isinstance(other, Document):
            return NotImplemented
        return self.sentences == other.sentences


def _token_from_record(record: RawRecord) -> Token:
    c = record.columns
    try:
        head = int(c[6])
    except ValueError:
        raise ConllParseError(f"HEAD column is not an integer: {c[6]!r}", record.line_number) from None
    return Token(
        id=int(c[0]),
        form=c[1],
        lemma=c[2],
        upos=c[3],
        xpos=c[4],
        feats=c[5],
        head=head,
        deprel=c[7],
        deps=c[8],
        misc=c[9],
    )


def _build_sentence(comments: list[str], records: list[RawRecord], index: int, source: str) -> Sentence:
    tokens = []
    for record in records:
        ident = record.columns[0]
        if "-" in ident:
            log.warning("%s: dropping multiword token line %d (%s)", source or "<stream>", record.line_number, ident)
            continue
        if "." in ident:
            raise UnsupportedConstructError(
                f"sentence {index} (line {record.line_number}): empty node {ident} is not supported"
            )
        if not ident.isdigit() or int(ident) < 1:
            raise ConllParseError(f"invalid token ID {ident!r}", record.line_number)
        tokens.append(_token_from_record(record))
    sentence = Sentence(tokens, comments)
    report = validate(sentence)
    if not report.ok:
        raise TreeValidationError(str(report), index)
    return sentence


def iter_blocks(lines: Iterable[str]):
    """Yield (comments, records) per blank-line separated block."""
    comments: list[str] = []
    records: list[RawRecord] = []
    for line_number, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            if comments or records:
                yield comments, records
                comments, records = [], []
            continue
        if line.startswith("#") and not records:
            comments.append(line)
            continue
        columns = tuple(line.split("\t"))
        if len(columns) != N_COLUMNS:
            raise ConllParseError(f"expected {N_COLUMNS} tab-separated columns, found {len(columns)}", line_number)
        records.append(RawRecord(line_number, columns))
    if comments or records:
        yield comments, records


def read_conll(stream: IO[bytes] | IO[str] | str | Path, source_name: str = "") -> Document:
    """Read a treebank from a byte/text stream or a path.

    Multiword-token range lines are dropped with a warning; empty nodes are
    rejected. Every sentence is validated as a tree.
    """
    if isinstance(stream, (str, Path)):
        with open(stream, "rb") as fh:
            return read_conll(fh, source_name or str(stream))
    data = stream.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    doc = Document(source_name=source_name)
    for comments, records in iter_blocks(io.StringIO(text)):
        if not records:
            raise ConllParseError("comment block without tokens", 0)
        doc.sentences.append(_build_sentence(comments, records, len(doc.sentences), source_name))
    return doc


def format_token(token: Token) -> str:
    return "\t".join(
        [
            str(token.id),
            token.form,
            token.lemma,
            token.upos,
            token.xpos,
            token.feats,
            str(token.head),
            token.deprel,
            token.deps,
            token.misc,
        ]
    )


def format_sentence(sentence: Sentence) -> str:
    lines = list(sentence.comments)
    lines.extend(format_token(t) for t in sentence.tokens)
    return "\n".join(lines) + "\n\n"


def dumps(document: Document | Iterable[Sentence]) -> str:
    return "".join(format_sentence(s) for s in document)


def write_conll(document: Document | Iterable[Sentence], stream: IO[bytes] | str | Path) -> None:
    if isinstance(stream, (str, Path)):
        with open(stream, "wb") as fh:
            write_conll(document, fh)
        return
    stream.write(dumps(document).encode("utf-8"))
