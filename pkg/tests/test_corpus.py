import io
import json
import logging

import pytest

from agtd.dataflows.corpus import (
    Document,
    Label,
    dump_corpus,
    load_corpus,
    pair_documents,
    parse_corpus,
    split_by_label,
    split_sentences,
    tokenize,
)
from agtd.errors import CorpusFormatError, PairingError


def _line(**fields) -> str:
    record = {"id": "d1", "source": "bbc", "label": "human", "headline": "H", "text": "t"}
    record.update(fields)
    return json.dumps(record, ensure_ascii=False)


def test_tokenize_lowercases_ascii_and_drops_punctuation():
    assert tokenize("Hello, World!") == ["hello", "world"]


def test_tokenize_keeps_devanagari_marks_inside_words():
    assert tokenize("दिल्ली में तेज़ बारिश।") == ["दिल्ली", "में", "तेज़", "बारिश"]


def test_tokenize_does_not_lowercase_non_ascii():
    assert tokenize("ÄBC") == ["Äbc"]


def test_split_sentences_on_danda_and_period():
    assert split_sentences("a b. c d.") == ["a b", "c d"]
    assert split_sentences("दिल्ली में बारिश। कल धूप॥ ठीक?") == ["दिल्ली में बारिश", "कल धूप", "ठीक"]


def test_split_sentences_keeps_decimal_numbers():
    assert split_sentences("Price rose 3.5 percent. Done.") == ["Price rose 3.5 percent", "Done"]


def test_document_derives_sentences():
    doc = Document(id="x", source="s", label="human", headline="h", text="a b. a c.")
    assert doc.sentences == [["a", "b"], ["a", "c"]]
    assert doc.vocabulary == frozenset({"a", "b", "c"})


def test_ai_document_requires_model():
    with pytest.raises(ValueError):
        Document(id="x", source="s", label="ai", headline="h", text="t")


def test_parse_fixture(fixtures_dir):
    docs = load_corpus(fixtures_dir / "pairs.jsonl")
    assert [d.id for d in docs] == ["h1", "h2", "a1", "a2", "a3"]
    humans, ais = split_by_label(docs)
    assert len(humans) == 2 and len(ais) == 3
    assert {d.model for d in ais} == {"m1", "m2"}


def test_parse_skips_blank_lines():
    docs = parse_corpus(_line() + "\n\n" + _line(id="d2") + "\n")
    assert [d.id for d in docs] == ["d1", "d2"]


def test_malformed_json_reports_line_number():
    with pytest.raises(CorpusFormatError) as err:
        parse_corpus(_line() + "\n{not json\n")
    assert err.value.line_number == 2
    assert "line 2" in str(err.value)


def test_missing_key_is_named():
    record = json.loads(_line())
    del record["headline"]
    with pytest.raises(CorpusFormatError) as err:
        parse_corpus(json.dumps(record) + "\n")
    assert err.value.key == "headline"


def test_ai_line_without_model():
    with pytest.raises(CorpusFormatError) as err:
        parse_corpus(_line(label="ai") + "\n")
    assert err.value.key == "model"


def test_duplicate_id_rejected():
    with pytest.raises(CorpusFormatError) as err:
        parse_corpus(_line() + "\n" + _line() + "\n")
    assert err.value.line_number == 2


def test_non_object_line_rejected():
    with pytest.raises(CorpusFormatError):
        parse_corpus("[1, 2]\n")


def test_parse_accepts_bytes():
    docs = parse_corpus((_line(text="दिल्ली") + "\n").encode("utf-8"))
    assert docs[0].text == "दिल्ली"


def test_dump_corpus_writes_parseable_lines(fixtures_dir):
    docs = load_corpus(fixtures_dir / "pairs.jsonl")
    buf = io.StringIO()
    dump_corpus(docs, buf)
    again = parse_corpus(buf.getvalue())
    assert [d.to_record() for d in again] == [d.to_record() for d in docs]


def test_pair_fixture(fixtures_dir):
    humans, ais = split_by_label(load_corpus(fixtures_dir / "pairs.jsonl"))
    result = pair_documents(humans, ais)
    assert [(p.human.id, p.ai.id) for p in result.pairs] == [("h1", "a1"), ("h2", "a2"), ("h1", "a3")]
    assert result.n_unmatched == 0
    assert result.pairs[0].model == "m1"
    assert result.pairs[0].source == "bbc"


def test_pairing_reports_unmatched(caplog):
    human = Document(id="h", source="s", label=Label.HUMAN, headline="A", text="x")
    ai = Document(id="a", source="s", label=Label.AI, model="m", headline="B", text="y")
    with caplog.at_level(logging.WARNING):
        result = pair_documents([human], [ai])
    assert result.pairs == []
    assert result.n_unmatched == 2
    assert "unmatched" in caplog.text


def test_duplicate_human_headline_is_ambiguous():
    h1 = Document(id="h1", source="s", label="human", headline="A", text="x")
    h2 = Document(id="h2", source="s", label="human", headline="A", text="y")
    with pytest.raises(PairingError):
        pair_documents([h1, h2], [])


@pytest.mark.parametrize(
    "text",
    ["Hello, World!", "क्षेत्र में 12 लोग। नया-पुराना?", "MiXeD ÄÖ text, 3.5 and x_y"],
)
def test_tokenize_is_idempotent_on_joined_output(text):
    tokens = tokenize(text)
    assert tokenize(" ".join(tokens)) == tokens


def test_invalid_utf8_reports_line_number():
    data = (_line(id="d1") + "\n").encode("utf-8") + b'{"id": "\xff\xfe"}\n'
    with pytest.raises(CorpusFormatError) as err:
        parse_corpus(data)
    assert err.value.line_number == 2
    assert "UTF-8" in str(err.value)
