import io
import logging

import pytest
from hypothesis import given, strategies as st

from punctrobust.conll import (
    ConllParseError,
    TreeValidationError,
    UnsupportedConstructError,
    dumps,
    read_conll,
    write_conll,
)
from punctrobust.perturb import strip_punct
from punctrobust.tree import PunctClass

from conftest import APPOSITIVE_CONLL, sentences


def read(text):
    return read_conll(io.BytesIO(text.encode("utf-8")))


def test_reads_seven_token_block():
    doc = read(APPOSITIVE_CONLL)
    assert len(doc) == 1
    s = doc.sentences[0]
    assert len(s) == 7
    assert s[5].form == "likes" and s[5].head == 0
    assert s.forms == ["John", ",", "27", ",", "likes", "jazz", "."]


def test_empty_input_gives_empty_document():
    assert read("").sentences == []
    out = io.BytesIO()
    write_conll([], out)
    assert out.getvalue() == b""


def test_wrong_column_count_cites_line_number():
    lines = APPOSITIVE_CONLL.splitlines()
    lines[2] = "\t".join(lines[2].split("\t")[:9])
    with pytest.raises(ConllParseError) as info:
        read("\n".join(lines) + "\n")
    assert info.value.line_number == 3
    assert "line 3" in str(info.value)


def test_empty_node_is_rejected():
    text = APPOSITIVE_CONLL.replace("5\tlikes", "4.1\tx\tx\tX\tX\t_\t_\t_\t_\t_\n5\tlikes", 1)
    text = text.replace("4.1\tx\tx\tX\tX\t_\t_\t_\t_\t_", "4.1\tx\tx\tX\tX\t_\t_\t_\t5:dep\t_")
    with pytest.raises(UnsupportedConstructError, match="sentence 0"):
        read(text)


def test_multiword_range_is_dropped_with_warning(caplog):
    text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n" + APPOSITIVE_CONLL
    with caplog.at_level(logging.WARNING):
        doc = read(text)
    assert len(doc.sentences[0]) == 7
    assert any("multiword" in r.message for r in caplog.records)


def test_head_out_of_range_is_a_validation_error():
    text = APPOSITIVE_CONLL.replace("6\tjazz\tjazz\tNOUN\tNN\t_\t5", "6\tjazz\tjazz\tNOUN\tNN\t_\t9")
    with pytest.raises(TreeValidationError) as info:
        read(text)
    assert info.value.sentence_index == 0


def test_comments_attach_to_following_sentence():
    doc = read("# sent_id = a\n" + APPOSITIVE_CONLL + "# sent_id = b\n" + APPOSITIVE_CONLL)
    assert [s.comments for s in doc.sentences] == [("# sent_id = a",), ("# sent_id = b",)]


def test_round_trip_is_byte_identical(tmp_path):
    original = ("# text = John, 27, likes jazz.\n" + APPOSITIVE_CONLL) * 3
    path = tmp_path / "in.conllu"
    path.write_bytes(original.encode())
    out = tmp_path / "out.conllu"
    write_conll(read_conll(path), out)
    assert out.read_bytes() == original.encode()


def test_stripped_appositive_has_four_token_lines():
    s = read(APPOSITIVE_CONLL).sentences[0]
    stripped, _ = strip_punct(s, PunctClass.DOTS_AND_COMMAS)
    lines = dumps([stripped]).splitlines()
    assert lines[-1] == ""
    token_lines = [l for l in lines if l]
    assert [l.split("\t")[0] for l in token_lines] == ["1", "2", "3", "4"]


@given(st.lists(sentences(), max_size=4))
def test_write_then_read_is_identity(doc):
    text = dumps(doc)
    assert read(text).sentences == doc
    assert dumps(read(text).sentences) == text
