"""Format detection and crosswalk normalization."""

from pathlib import Path

import pytest

from geoscope.dates import PartialDate
from geoscope.ingest import (
    MalformedInput,
    MissingRequiredField,
    SourceFile,
    detect_format,
    normalize,
)
from geoscope.model import Language, Source

FIXTURES = Path(__file__).parent / "fixtures" / "sources"


def load(name):
    return SourceFile.read(FIXTURES / name)


class TestDetectFormat:
    def test_mods_root(self):
        assert detect_format(load("istex-001.xml")) == "mods"

    def test_dc_children(self):
        assert detect_format(load("agritrop-002.xml")) == "dc_xml"

    def test_rdf_root(self):
        assert detect_format(load("anrt-003.rdf")) == "rdf"

    def test_plain_text_is_malformed(self):
        with pytest.raises(MalformedInput):
            detect_format(load("notes.txt"))

    def test_unknown_xml(self):
        f = SourceFile(b"<inventory><item>3</item></inventory>")
        assert detect_format(f) == "unknown"


class TestNormalize:
    def test_mods_french(self):
        rec = normalize(load("istex-001.xml"))
        assert rec.doc_id == "istex-001"
        assert rec.source is Source.ISTEX
        assert rec.language is Language.FR
        assert rec.abstract.startswith("Cette étude porte")
        assert rec.creation_date == PartialDate(2005, 6, 15)

    def test_dc_bilingual_abstracts_mean_mixed(self):
        rec = normalize(load("agritrop-002.xml"))
        assert rec.source is Source.AGRITROP
        assert rec.language is Language.MIXED
        assert "sécheresse" in rec.abstract and "drought" in rec.abstract
        assert rec.creation_date == PartialDate(1998)

    def test_rdf_thesis_without_abstract(self):
        rec = normalize(load("anrt-003.rdf"))
        assert rec.source is Source.ANRT
        assert rec.abstract == ""
        assert rec.creation_date == PartialDate(1994, 1, 1)
        assert rec.language is Language.FR

    def test_no_title_is_required_field_error(self):
        f = SourceFile(
            b'<record xmlns:dc="http://purl.org/dc/elements/1.1/">'
            b"<dc:identifier>x</dc:identifier>"
            b"<dc:description>abc</dc:description></record>")
        with pytest.raises(MissingRequiredField):
            normalize(f)

    def test_bad_date_keeps_record(self, caplog):
        f = SourceFile(
            b'<record xmlns:dc="http://purl.org/dc/elements/1.1/">'
            b"<dc:title>T</dc:title><dc:date>circa MCMXC</dc:date></record>",
            path=Path("x.xml"))
        with caplog.at_level("WARNING"):
            rec = normalize(f)
        assert rec.creation_date is None
        assert ("dc:date", "circa MCMXC") in rec.extra_metadata
        assert any("unparseable date" in m for m in caplog.messages)

    def test_deterministic(self):
        f = load("agritrop-002.xml")
        assert normalize(f) == normalize(f)

    def test_no_information_loss(self):
        """Every non-empty leaf text node lands in a field or extra_metadata."""
        import xml.etree.ElementTree as ET
        for name in ("istex-001.xml", "agritrop-002.xml", "anrt-003.rdf"):
            f = load(name)
            rec = normalize(f)
            mapped = {rec.doc_id, rec.title}
            mapped.update(rec.abstract.split("\n\n"))
            if rec.creation_date:
                mapped.add(rec.creation_date.isoformat())
            mapped.update(v for _, v in rec.extra_metadata)
            root = ET.fromstring(f.data)
            leaf_texts = [el.text.strip() for el in root.iter()
                          if len(el) == 0 and el.text and el.text.strip()]
            for text in leaf_texts:
                assert any(text == m or text in m for m in mapped), \
                    f"{name}: leaf {text!r} lost"

    def test_declared_format_override(self):
        f = SourceFile(load("istex-001.xml").data, declared_format="mods")
        # without a path, the MODS identifier still supplies the doc id
        assert normalize(f).doc_id == "istex-001"
