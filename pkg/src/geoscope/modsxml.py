"""MODS-TI XML serialization: MODS subset plus the three annotation blocks.

The annotation blocks (<spatialAnnotations>, <temporalAnnotations>,
<thematicAnnotations>) are validated against the DTDs shipped under
schemas/; serialize/parse round-trip field-equal documents.
"""

from __future__ import annotations

from importlib import resources as importlib_resources
from xml.etree import ElementTree as ET

from . import dtd
from .dates import InvalidDate, PartialDate, parse_iso
from .model import (
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

DtdViolation = dtd.DtdViolation


class MalformedXml(ValueError):
    """Input is not well-formed XML or not a MODS-TI document at all."""


_KNOWN_MODS_CHILDREN = {
    "identifier", "recordInfo", "language", "titleInfo", "abstract",
    "originInfo", "extension", "spatialAnnotations", "temporalAnnotations",
    "thematicAnnotations",
}

_DTD_FILES = {
    "spatialAnnotations": "spatial-annotations.dtd",
    "temporalAnnotations": "temporal-annotations.dtd",
    "thematicAnnotations": "thematic-annotations.dtd",
}

_dtd_cache: dict[str, dtd.Dtd] = {}


def block_dtd(block: str) -> dtd.Dtd:
    """Parsed DTD for one annotation block element name."""
    if block not in _dtd_cache:
        ref = importlib_resources.files("geoscope.schemas").joinpath(_DTD_FILES[block])
        _dtd_cache[block] = dtd.Dtd(ref.read_text(encoding="utf-8"))
    return _dtd_cache[block]


def _fnum(value: float) -> str:
    return repr(float(value))


def _footprint_element(res: GazetteerResolution) -> ET.Element:
    el = ET.Element("footprint", {
        "gazetteerId": res.gazetteer_id,
        "name": res.canonical_name,
        "lat": _fnum(res.latitude),
        "lon": _fnum(res.longitude),
        "featureClass": res.feature_class.value,
        "country": res.country_code,
        "score": _fnum(res.score),
    })
    return el


def _es_element(ann: SpatialAnnotation) -> ET.Element:
    attrs = {"kind": ann.kind.value, "start": str(ann.start), "end": str(ann.end)}
    if ann.indicator is not None:
        attrs["indicator"] = ann.indicator.value
    if ann.feature_noun is not None:
        attrs["featureNoun"] = ann.feature_noun
    el = ET.Element("es", attrs)
    ET.SubElement(el, "text").text = ann.surface_text
    if ann.resolution is not None:
        el.append(_footprint_element(ann.resolution))
    if ann.anchor_esa is not None:
        el.append(_es_element(ann.anchor_esa))
    return el


def _timex_value(ann: TemporalAnnotation) -> str:
    if ann.timex_class is TimexClass.PERIOD:
        return f"{ann.value_begin.isoformat()}/{ann.value_end.isoformat()}"
    return ann.value_begin.isoformat()


def build_mods_element(doc: AnnotatedDocument) -> ET.Element:
    """The <mods> element for one document, blocks DTD-validated."""
    rec = doc.record
    root = ET.Element("mods")
    ET.SubElement(root, "identifier", {"type": "local"}).text = rec.doc_id
    info = ET.SubElement(root, "recordInfo")
    ET.SubElement(info, "recordContentSource").text = rec.source.value
    lang = ET.SubElement(root, "language")
    ET.SubElement(lang, "languageTerm", {"type": "code"}).text = rec.language.value
    title_info = ET.SubElement(root, "titleInfo")
    ET.SubElement(title_info, "title").text = rec.title
    ET.SubElement(root, "abstract").text = rec.abstract
    if rec.creation_date is not None:
        origin = ET.SubElement(root, "originInfo")
        ET.SubElement(origin, "dateCreated").text = rec.creation_date.isoformat()
    if rec.extra_metadata:
        ext = ET.SubElement(root, "extension")
        for key, value in rec.extra_metadata:
            ET.SubElement(ext, "meta", {"key": key}).text = value

    spatial = ET.SubElement(root, "spatialAnnotations")
    for ann in doc.spatial:
        spatial.append(_es_element(ann))
    temporal = ET.SubElement(root, "temporalAnnotations")
    for ann in doc.temporal:
        timex = ET.SubElement(temporal, "timex3", {
            "type": ann.timex_class.value.upper(),
            "value": _timex_value(ann),
            "start": str(ann.start),
            "end": str(ann.end),
        })
        ET.SubElement(timex, "text").text = ann.surface_text
    thematic = ET.SubElement(root, "thematicAnnotations")
    for ann in doc.thematic:
        topic = ET.SubElement(thematic, "topic", {
            "uri": ann.concept_uri,
            "prefLabel": ann.pref_label,
            "start": str(ann.start),
            "end": str(ann.end),
        })
        ET.SubElement(topic, "text").text = ann.surface_text
        for alt in ann.used_for:
            ET.SubElement(topic, "usedFor").text = alt
        for uri, label in ann.broader:
            ET.SubElement(topic, "broader", {"uri": uri}).text = label

    for block in _DTD_FILES:
        block_dtd(block).validate(root.find(block))
    return root


def serialize_mods_ti(doc: AnnotatedDocument) -> str:
    """Serialize to MODS-TI XML (UTF-8 text, one document)."""
    root = build_mods_element(doc)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True)


def serialize_mods_collection(docs) -> str:
    """A <modsCollection> bundle of MODS-TI documents."""
    collection = ET.Element("modsCollection")
    for doc in docs:
        collection.append(build_mods_element(doc))
    ET.indent(collection)
    return ET.tostring(collection, encoding="unicode", xml_declaration=True)


def _text(el: ET.Element | None) -> str:
    return el.text or "" if el is not None else ""


def _int_attr(el: ET.Element, name: str) -> int:
    try:
        return int(el.attrib[name])
    except ValueError as exc:
        raise InvariantViolation(
            f"<{el.tag}> attribute {name}={el.attrib[name]!r} is not an integer"
        ) from exc


def _float_attr(el: ET.Element, name: str) -> float:
    try:
        return float(el.attrib[name])
    except ValueError as exc:
        raise InvariantViolation(
            f"<{el.tag}> attribute {name}={el.attrib[name]!r} is not a number"
        ) from exc


def _parse_footprint(el: ET.Element) -> GazetteerResolution:
    return GazetteerResolution(
        gazetteer_id=el.attrib["gazetteerId"],
        canonical_name=el.attrib["name"],
        latitude=_float_attr(el, "lat"),
        longitude=_float_attr(el, "lon"),
        feature_class=FeatureClass(el.attrib["featureClass"]),
        country_code=el.attrib.get("country", ""),
        score=_float_attr(el, "score"),
    )


def _parse_es(el: ET.Element) -> SpatialAnnotation:
    footprint = el.find("footprint")
    anchor = el.find("es")
    indicator = el.attrib.get("indicator")
    return SpatialAnnotation(
        start=_int_attr(el, "start"),
        end=_int_attr(el, "end"),
        surface_text=_text(el.find("text")),
        kind=SpatialKind(el.attrib["kind"]),
        indicator=SpatialIndicator(indicator) if indicator else None,
        feature_noun=el.attrib.get("featureNoun"),
        anchor_esa=_parse_es(anchor) if anchor is not None else None,
        resolution=_parse_footprint(footprint) if footprint is not None else None,
    )


def _parse_partial(value: str, context: str) -> PartialDate:
    try:
        return parse_iso(value)
    except InvalidDate as exc:
        raise InvariantViolation(f"{context}: {exc}") from exc


def _parse_timex(el: ET.Element) -> TemporalAnnotation:
    timex_class = TimexClass(el.attrib["type"].lower())
    value = el.attrib["value"]
    if timex_class is TimexClass.PERIOD:
        parts = value.split("/")
        if len(parts) != 2:
            raise InvariantViolation(f"period value {value!r} is not begin/end")
        begin, end = (_parse_partial(p, "timex3 value") for p in parts)
    else:
        begin, end = _parse_partial(value, "timex3 value"), None
    return TemporalAnnotation(
        start=_int_attr(el, "start"),
        end=_int_attr(el, "end"),
        surface_text=_text(el.find("text")),
        timex_class=timex_class,
        value_begin=begin,
        value_end=end,
    )


def _parse_topic(el: ET.Element) -> ThematicAnnotation:
    return ThematicAnnotation(
        start=_int_attr(el, "start"),
        end=_int_attr(el, "end"),
        surface_text=_text(el.find("text")),
        concept_uri=el.attrib["uri"],
        pref_label=el.attrib["prefLabel"],
        used_for=tuple(_text(alt) for alt in el.findall("usedFor")),
        broader=tuple((b.attrib["uri"], _text(b)) for b in el.findall("broader")),
    )


def _collect_leaves(el: ET.Element, path: str, out: list[tuple[str, str]]) -> None:
    children = list(el)
    if not children:
        out.append((path, el.text or ""))
        return
    for child in children:
        tag = child.tag.split("}")[-1]
        _collect_leaves(child, f"{path}/{tag}", out)


def parse_mods_ti(xml: str) -> AnnotatedDocument:
    """Parse MODS-TI XML back into an AnnotatedDocument.

    Raises MalformedXml, DtdViolation, or InvariantViolation.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise MalformedXml(f"not well-formed XML: {exc}") from exc
    if root.tag != "mods":
        raise MalformedXml(f"expected <mods> root, found <{root.tag}>")

    blocks = {}
    for block in _DTD_FILES:
        el = root.find(block)
        if el is None:
            raise DtdViolation("mods", f"missing <{block}> block")
        block_dtd(block).validate(el)
        blocks[block] = el

    extra: list[tuple[str, str]] = []
    for child in root:
        tag = child.tag.split("}")[-1]
        if tag == "extension":
            for meta in child:
                if meta.tag == "meta" and "key" in meta.attrib:
                    extra.append((meta.attrib["key"], meta.text or ""))
                else:
                    _collect_leaves(meta, f"extension/{meta.tag}", extra)
        elif tag not in _KNOWN_MODS_CHILDREN:
            _collect_leaves(child, tag, extra)

    doc_id = _text(root.find("identifier"))
    source_text = _text(root.find("recordInfo/recordContentSource"))
    language_text = _text(root.find("language/languageTerm"))
    creation = None
    created_el = root.find("originInfo/dateCreated")
    if created_el is not None and (created_el.text or "").strip():
        creation = _parse_partial(created_el.text.strip(), "dateCreated")

    try:
        source = Source(source_text) if source_text else Source.OTHER
        language = Language(language_text) if language_text else Language.UNKNOWN
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from exc

    record = DocumentRecord(
        doc_id=doc_id,
        source=source,
        language=language,
        title=_text(root.find("titleInfo/title")),
        abstract=_text(root.find("abstract")),
        creation_date=creation,
        extra_metadata=tuple(extra),
    )
    try:
        return AnnotatedDocument(
            record=record,
            spatial=tuple(_parse_es(e) for e in blocks["spatialAnnotations"]),
            temporal=tuple(_parse_timex(e) for e in blocks["temporalAnnotations"]),
            thematic=tuple(_parse_topic(e) for e in blocks["thematicAnnotations"]),
        )
    except InvalidDate as exc:
        raise InvariantViolation(str(exc)) from exc
