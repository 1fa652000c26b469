"""Model invariants and MODS-TI XML round-trip behavior."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from xml.etree import ElementTree as ET

from geoscope.dates import PartialDate
from geoscope.model import (
    AnnotatedDocument,
    DocumentRecord,
    FeatureClass,
    GazetteerResolution,
    InvariantViolation,
    Language,
    Source,
    SpatialAnnotation,
    SpatialIndicator,
    SpatialKind,
    TemporalAnnotation,
    ThematicAnnotation,
    TimexClass,
)
from geoscope.modsxml import (
    DtdViolation,
    MalformedXml,
    block_dtd,
    parse_mods_ti,
    serialize_mods_ti,
)


def record(abstract="Étude du golfe de Guinée au sud du Bénin.", **kw):
    defaults = dict(doc_id="doc-1", source=Source.ISTEX, language=Language.FR,
                    title="Un titre", abstract=abstract)
    defaults.update(kw)
    return DocumentRecord(**defaults)


class TestInvariants:
    def test_esr_requires_indicator_and_anchor(self):
        with pytest.raises(InvariantViolation):
            SpatialAnnotation(0, 5, "au su", SpatialKind.ESR)

    def test_esa_rejects_indicator(self):
        with pytest.raises(InvariantViolation):
            SpatialAnnotation(0, 5, "Bénin", SpatialKind.ESA,
                              indicator=SpatialIndicator.ORIENTATION)

    def test_esr_anchor_strictly_inside(self):
        anchor = SpatialAnnotation(0, 5, "Bénin", SpatialKind.ESA)
        with pytest.raises(InvariantViolation):
            SpatialAnnotation(0, 5, "Bénin", SpatialKind.ESR,
                              indicator=SpatialIndicator.ORIENTATION,
                              anchor_esa=anchor)

    def test_empty_span_rejected(self):
        with pytest.raises(InvariantViolation):
            SpatialAnnotation(3, 3, "", SpatialKind.ESA)

    def test_period_ordering(self):
        with pytest.raises(InvariantViolation):
            TemporalAnnotation(0, 4, "abcd", TimexClass.PERIOD,
                               PartialDate(2000), PartialDate(1990))
        # equal at the coarsest common granularity is allowed
        TemporalAnnotation(0, 4, "abcd", TimexClass.PERIOD,
                           PartialDate(1990), PartialDate(1990, 6))

    def test_date_rejects_value_end(self):
        with pytest.raises(InvariantViolation):
            TemporalAnnotation(0, 4, "abcd", TimexClass.DATE,
                               PartialDate(1990), PartialDate(1991))

    def test_thematic_surface_must_match_a_label(self):
        with pytest.raises(InvariantViolation):
            ThematicAnnotation(0, 4, "abcd", "urn:c1", "climat")
        # plural-insensitive match against a used-for label is fine
        ThematicAnnotation(0, 4, "abcd", "urn:c1", "climat", used_for=("abcds",))

    def test_broader_chain_acyclic(self):
        with pytest.raises(InvariantViolation):
            ThematicAnnotation(0, 4, "abcd", "urn:c1", "abcd",
                               broader=(("urn:p", "x"), ("urn:p", "y")))

    def test_resolution_ranges(self):
        with pytest.raises(InvariantViolation):
            GazetteerResolution("g", "x", 91.0, 0.0, FeatureClass.OTHER)
        with pytest.raises(InvariantViolation):
            GazetteerResolution("g", "x", 0.0, 0.0, FeatureClass.OTHER, score=1.5)

    def test_duplicate_spans_rejected(self):
        rec = record()
        a = SpatialAnnotation(0, 5, rec.abstract[0:5], SpatialKind.ESA)
        b = SpatialAnnotation(0, 5, rec.abstract[0:5], SpatialKind.ESA,
                              feature_noun="x")
        with pytest.raises(InvariantViolation):
            AnnotatedDocument(rec, spatial=(a, b))

    def test_annotations_sorted_on_construction(self):
        rec = record()
        a = SpatialAnnotation(9, 24, rec.abstract[9:24], SpatialKind.ESA)
        b = SpatialAnnotation(0, 5, rec.abstract[0:5], SpatialKind.ESA)
        doc = AnnotatedDocument(rec, spatial=(a, b))
        assert [s.span for s in doc.spatial] == [(0, 5), (9, 24)]

    def test_span_outside_abstract(self):
        rec = record(abstract="court")
        ann = SpatialAnnotation(0, 99, "x" * 99, SpatialKind.ESA)
        with pytest.raises(InvariantViolation):
            AnnotatedDocument(rec, spatial=(ann,))

    def test_surface_must_equal_substring(self):
        rec = record()
        ann = SpatialAnnotation(0, 5, "wrong", SpatialKind.ESA)
        with pytest.raises(InvariantViolation):
            AnnotatedDocument(rec, spatial=(ann,))


class TestSerialization:
    def test_empty_document_has_three_empty_blocks(self):
        xml = serialize_mods_ti(AnnotatedDocument(record()))
        root = ET.fromstring(xml)
        for block in ("spatialAnnotations", "temporalAnnotations",
                      "thematicAnnotations"):
            el = root.find(block)
            assert el is not None and len(el) == 0

    def test_gulf_of_guinea_es_text(self):
        rec = record()
        ann = SpatialAnnotation(
            9, 24, "golfe de Guinée", SpatialKind.ESA, feature_noun="golfe",
            resolution=GazetteerResolution(
                "GN-GULF", "Gulf of Guinea", 2.0, 2.5,
                FeatureClass.HYDROGRAPHIC, "", 0.8))
        xml = serialize_mods_ti(AnnotatedDocument(rec, spatial=(ann,)))
        root = ET.fromstring(xml)
        es = root.find("spatialAnnotations/es")
        assert es.find("text").text == "golfe de Guinée"
        assert es.find("footprint").attrib["featureClass"] == "hydrographic"

    def test_three_annotation_round_trip(self):
        rec = record("Au sud du Bénin, le climat a changé entre 1990 et 2000.")
        anchor = SpatialAnnotation(10, 15, "Bénin", SpatialKind.ESA)
        esr = SpatialAnnotation(0, 15, "Au sud du Bénin", SpatialKind.ESR,
                                indicator=SpatialIndicator.ORIENTATION,
                                anchor_esa=anchor)
        per = TemporalAnnotation(36, 54, "entre 1990 et 2000",
                                 TimexClass.PERIOD,
                                 PartialDate(1990), PartialDate(2000))
        topic = ThematicAnnotation(20, 26, "climat", "urn:agrovoc:climat",
                                   "climat", used_for=("conditions climatiques",),
                                   broader=(("urn:agrovoc:env", "environnement"),))
        doc = AnnotatedDocument(rec, spatial=(esr,), temporal=(per,),
                                thematic=(topic,))
        assert parse_mods_ti(serialize_mods_ti(doc)) == doc

    def test_serialized_blocks_validate_against_dtds(self):
        rec = record()
        ann = SpatialAnnotation(9, 24, "golfe de Guinée", SpatialKind.ESA)
        xml = serialize_mods_ti(AnnotatedDocument(rec, spatial=(ann,)))
        root = ET.fromstring(xml)
        for block in ("spatialAnnotations", "temporalAnnotations",
                      "thematicAnnotations"):
            block_dtd(block).validate(root.find(block))


class TestParsing:
    def test_zero_annotation_round_trip(self):
        doc = AnnotatedDocument(record(abstract=""))
        assert parse_mods_ti(serialize_mods_ti(doc)) == doc

    def test_not_xml(self):
        with pytest.raises(MalformedXml):
            parse_mods_ti("this is not xml")

    def test_wrong_root(self):
        with pytest.raises(MalformedXml):
            parse_mods_ti("<record><title>t</title></record>")

    def test_missing_block_is_dtd_violation(self):
        doc = AnnotatedDocument(record())
        xml = serialize_mods_ti(doc).replace(
            "<temporalAnnotations />", "")
        with pytest.raises(DtdViolation):
            parse_mods_ti(xml)

    def test_es_without_text_is_dtd_violation(self):
        xml = """<?xml version='1.0'?>
        <mods>
          <identifier type="local">d</identifier>
          <titleInfo><title>t</title></titleInfo>
          <abstract>Bénin</abstract>
          <spatialAnnotations>
            <es kind="ESA" start="0" end="5"/>
          </spatialAnnotations>
          <temporalAnnotations/>
          <thematicAnnotations/>
        </mods>"""
        with pytest.raises(DtdViolation) as err:
            parse_mods_ti(xml)
        assert "es" in str(err.value)

    def test_hand_written_period_fixture(self):
        xml = """<?xml version='1.0'?>
        <mods>
          <identifier type="local">d</identifier>
          <titleInfo><title>t</title></titleInfo>
          <abstract>de 1990 a 2000</abstract>
          <spatialAnnotations/>
          <temporalAnnotations>
            <timex3 type="PERIOD" value="1990/2000" start="0" end="14">
              <text>de 1990 a 2000</text>
            </timex3>
          </temporalAnnotations>
          <thematicAnnotations/>
        </mods>"""
        doc = parse_mods_ti(xml)
        (ann,) = doc.temporal
        assert ann.timex_class is TimexClass.PERIOD
        assert ann.value_begin == PartialDate(1990)
        assert ann.value_end == PartialDate(2000)

    def test_unknown_elements_preserved(self):
        xml = """<?xml version='1.0'?>
        <mods>
          <identifier type="local">d</identifier>
          <titleInfo><title>t</title></titleInfo>
          <abstract></abstract>
          <name><namePart>Jean Dupont</namePart></name>
          <spatialAnnotations/>
          <temporalAnnotations/>
          <thematicAnnotations/>
        </mods>"""
        doc = parse_mods_ti(xml)
        assert ("name/namePart", "Jean Dupont") in doc.record.extra_metadata

    def test_span_outside_abstract_is_invariant_violation(self):
        xml = """<?xml version='1.0'?>
        <mods>
          <identifier type="local">d</identifier>
          <titleInfo><title>t</title></titleInfo>
          <abstract>ab</abstract>
          <spatialAnnotations>
            <es kind="ESA" start="0" end="10"><text>aaaaaaaaaa</text></es>
          </spatialAnnotations>
          <temporalAnnotations/>
          <thematicAnnotations/>
        </mods>"""
        with pytest.raises(InvariantViolation):
            parse_mods_ti(xml)


# --- randomized round-trip property ---

_text_alpha = "abc déèx ACBÉ.,;«»'-\n"
_attr_alpha = "abc dé-ACB.:/_"

abstracts = st.text(alphabet=_text_alpha, min_size=12, max_size=120)
attr_text = st.text(alphabet=_attr_alpha, min_size=1, max_size=20)


@st.composite
def partial_dates(draw):
    year = draw(st.integers(1000, 2099))
    gran = draw(st.sampled_from(["year", "month", "day"]))
    if gran == "year":
        return PartialDate(year)
    month = draw(st.integers(1, 12))
    if gran == "month":
        return PartialDate(year, month)
    return PartialDate(year, month, draw(st.integers(1, 28)))


@st.composite
def resolutions(draw):
    return GazetteerResolution(
        gazetteer_id=draw(attr_text),
        canonical_name=draw(attr_text),
        latitude=draw(st.floats(-90, 90, allow_nan=False)),
        longitude=draw(st.floats(-180, 180, allow_nan=False)),
        feature_class=draw(st.sampled_from(list(FeatureClass))),
        country_code=draw(st.sampled_from(["", "SN", "FR", "US", "MG"])),
        score=draw(st.floats(0, 1, allow_nan=False)),
    )


@st.composite
def spans_in(draw, abstract, count):
    pairs = set()
    for _ in range(count):
        start = draw(st.integers(0, len(abstract) - 1))
        end = draw(st.integers(start + 1, len(abstract)))
        pairs.add((start, end))
    return sorted(pairs)


@st.composite
def documents(draw):
    abstract = draw(abstracts)
    rec = DocumentRecord(
        doc_id=draw(attr_text),
        source=draw(st.sampled_from(list(Source))),
        language=draw(st.sampled_from(list(Language))),
        title=draw(st.text(alphabet=_text_alpha, max_size=30)),
        abstract=abstract,
        creation_date=draw(st.one_of(st.none(), partial_dates())),
        extra_metadata=tuple(
            draw(st.lists(st.tuples(attr_text,
                                    st.text(alphabet=_text_alpha, max_size=20)),
                          max_size=3))),
    )
    spatial = []
    for start, end in draw(spans_in(abstract, draw(st.integers(0, 3)))):
        if end - start >= 3 and draw(st.booleans()):
            a_start = draw(st.integers(start + 1, end - 1))
            a_end = draw(st.integers(a_start + 1, end))
            anchor = SpatialAnnotation(a_start, a_end, abstract[a_start:a_end],
                                       SpatialKind.ESA)
            spatial.append(SpatialAnnotation(
                start, end, abstract[start:end], SpatialKind.ESR,
                indicator=draw(st.sampled_from(list(SpatialIndicator))),
                anchor_esa=anchor,
                resolution=draw(st.one_of(st.none(), resolutions()))))
        else:
            spatial.append(SpatialAnnotation(
                start, end, abstract[start:end], SpatialKind.ESA,
                feature_noun=draw(st.one_of(st.none(), attr_text)),
                resolution=draw(st.one_of(st.none(), resolutions()))))
    temporal = []
    for start, end in draw(spans_in(abstract, draw(st.integers(0, 3)))):
        d1, d2 = draw(partial_dates()), draw(partial_dates())
        if draw(st.booleans()):
            if d1.compare_coarse(d2) > 0:
                d1, d2 = d2, d1
            temporal.append(TemporalAnnotation(
                start, end, abstract[start:end], TimexClass.PERIOD, d1, d2))
        else:
            temporal.append(TemporalAnnotation(
                start, end, abstract[start:end], TimexClass.DATE, d1))
    thematic = []
    for start, end in draw(spans_in(abstract, draw(st.integers(0, 3)))):
        surface = abstract[start:end]
        thematic.append(ThematicAnnotation(
            start, end, surface, concept_uri=draw(attr_text),
            pref_label=surface.replace("\n", " "),
            used_for=tuple(draw(st.lists(
                st.text(alphabet=_text_alpha, min_size=1, max_size=15),
                max_size=2))),
            broader=tuple((f"urn:b{i}", draw(attr_text))
                          for i in range(draw(st.integers(0, 2))))))
    return AnnotatedDocument(rec, tuple(spatial), tuple(temporal),
                             tuple(thematic))


@settings(max_examples=150, deadline=None)
@given(documents())
def test_round_trip_property(doc):
    assert parse_mods_ti(serialize_mods_ti(doc)) == doc
