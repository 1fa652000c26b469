"""Source format detection and normalization into DocumentRecord.

Three source dialects are recognized: MODS XML (ISTEX), Dublin-Core-style
XML (CIRAD/Agritrop), and RDF thesis records (ANRT). Field mapping is driven
by the crosswalk table shipped with the package (see docs/crosswalk.md);
everything the crosswalk does not map lands in extra_metadata, so no leaf
text node of the source is lost.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path
from xml.etree import ElementTree as ET

from .dates import InvalidDate, PartialDate, parse_flexible
from .model import DocumentRecord, Language, Source
from .textutil import profile_language

log = logging.getLogger(__name__)


class MalformedInput(ValueError):
    """Bytes are not parseable as XML/RDF at all."""


class MissingRequiredField(ValueError):
    """The source lacks a field the pivot model requires (e.g. title)."""


NAMESPACES = {
    "mods": "http://www.loc.gov/mods/v3",
    "dc": "http://purl.org/dc/elements/1.1/",
    "dcterms": "http://purl.org/dc/terms/",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
}
_NS_TO_PREFIX = {uri: prefix for prefix, uri in NAMESPACES.items()}
XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"

_FORMAT_TO_SOURCE = {
    "mods": Source.ISTEX,
    "dc_xml": Source.AGRITROP,
    "rdf": Source.ANRT,
}

_LANGUAGE_CODES = {
    "fr": "fr", "fre": "fr", "fra": "fr", "french": "fr", "français": "fr",
    "en": "en", "eng": "en", "english": "en",
}


@dataclass(frozen=True)
class SourceFile:
    """Raw metadata bytes plus an optional path and format override."""

    data: bytes
    path: Path | None = None
    declared_format: str | None = None

    def __post_init__(self):
        if not self.data:
            raise MalformedInput("source file is empty")

    @classmethod
    def read(cls, path: str | Path, declared_format: str | None = None) -> "SourceFile":
        path = Path(path)
        return cls(path.read_bytes(), path, declared_format)


def _qname(tag: str) -> str:
    """'{uri}local' -> 'prefix:local' (known namespaces) or 'local'."""
    if tag.startswith("{"):
        uri, local = tag[1:].split("}", 1)
        prefix = _NS_TO_PREFIX.get(uri)
        return f"{prefix}:{local}" if prefix else local
    return tag


def _parse_xml(file: SourceFile) -> ET.Element:
    try:
        return ET.fromstring(file.data)
    except ET.ParseError as exc:
        raise MalformedInput(f"{file.path or '<bytes>'}: not XML ({exc})") from exc


def detect_format(file: SourceFile) -> str:
    """'mods', 'dc_xml', 'rdf', or 'unknown'. Raises MalformedInput."""
    root = _parse_xml(file)
    root_q = _qname(root.tag)
    if root_q in ("mods:mods", "mods:modsCollection", "mods", "modsCollection"):
        return "mods"
    if root_q == "rdf:RDF":
        return "rdf"
    leaves = [el for el in root.iter() if len(el) == 0]
    if leaves:
        dc = sum(1 for el in leaves
                 if _qname(el.tag).split(":")[0] in ("dc", "dcterms"))
        if dc / len(leaves) > 0.5:
            return "dc_xml"
    return "unknown"


# --- crosswalk ---

_crosswalk_cache: dict[str, list[tuple[tuple[str, ...], str]]] | None = None


def _crosswalk() -> dict[str, list[tuple[tuple[str, ...], str]]]:
    global _crosswalk_cache
    if _crosswalk_cache is None:
        table: dict[str, list[tuple[tuple[str, ...], str]]] = {}
        ref = importlib_resources.files("geoscope.resources").joinpath("crosswalk.tsv")
        for line in ref.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fmt, path, field = line.split("\t")
            table.setdefault(fmt, []).append((tuple(path.split("/")), field))
        _crosswalk_cache = table
    return _crosswalk_cache


def _match_rule(path: tuple[str, ...], rules) -> str | None:
    for rule_path, field in rules:
        if len(path) >= len(rule_path) and path[-len(rule_path):] == rule_path:
            return field
        # sources without namespaces are matched on local names
        locals_only = tuple(p.split(":")[-1] for p in path)
        rule_locals = tuple(p.split(":")[-1] for p in rule_path)
        if len(locals_only) >= len(rule_locals) and \
                locals_only[-len(rule_locals):] == rule_locals:
            return field
    return None


def _infer_language(declared: list[str], abstract: str, title: str) -> Language:
    codes = {_LANGUAGE_CODES.get(v.strip().lower()) for v in declared}
    codes.discard(None)
    if codes == {"fr", "en"}:
        return Language.MIXED
    if codes == {"fr"}:
        return Language.FR
    if codes == {"en"}:
        return Language.EN
    profiled = profile_language(f"{title}\n{abstract}")
    return Language(profiled)


def normalize(file: SourceFile) -> DocumentRecord:
    """Map one source file to the pivot DocumentRecord.

    Raises MalformedInput (unparseable / unknown format) and
    MissingRequiredField (no title). An unparseable issued date is kept in
    extra_metadata and logged; creation_date stays unset.
    """
    fmt = file.declared_format or detect_format(file)
    if fmt == "unknown":
        raise MalformedInput(f"{file.path or '<bytes>'}: unrecognized format")
    root = _parse_xml(file)
    rules = _crosswalk().get(fmt, [])

    fields: dict[str, list[tuple[str, str]]] = {}  # field -> [(path, text)]
    declared_langs: list[str] = []
    extra: list[tuple[str, str]] = []

    def walk(el: ET.Element, path: tuple[str, ...]):
        for child in el:
            child_path = path + (_qname(child.tag),)
            if len(child) == 0:
                text = (child.text or "").strip()
                lang_attr = child.attrib.get(XML_LANG, "").strip()
                field = _match_rule(child_path, rules)
                if field is None:
                    if text:
                        extra.append(("/".join(child_path), text))
                    continue
                if text:
                    fields.setdefault(field, []).append(("/".join(child_path), text))
                if field == "abstract" and lang_attr:
                    declared_langs.append(lang_attr)
            else:
                walk(child, child_path)

    walk(root, ())

    titles = [text for _, text in fields.get("title", [])]
    if not titles:
        raise MissingRequiredField(f"{file.path or '<bytes>'}: no title")
    abstract = "\n\n".join(text for _, text in fields.get("abstract", []))

    # language codes and written dates are stored in normalized form; keep
    # the original spellings so no source text node is lost
    creation: PartialDate | None = None
    for path, raw in fields.get("creation_date", []):
        if creation is not None:
            extra.append((path, raw))
            continue
        try:
            creation = parse_flexible(raw)
            if raw != creation.isoformat():
                extra.append((path, raw))
        except InvalidDate:
            log.warning("unparseable date %r in %s; creation_date left unset",
                        raw, file.path or "<bytes>")
            extra.append((path, raw))

    doc_id = next((text for _, text in fields.get("doc_id", [])), None)
    if doc_id is None:
        if file.path is not None:
            doc_id = file.path.stem
        else:
            raise MissingRequiredField("no identifier and no file name")

    declared_langs.extend(raw for _, raw in fields.get("language", []))
    language = _infer_language(declared_langs, abstract, titles[0])
    for path, raw in fields.get("language", []):
        if raw != language.value:
            extra.append((path, raw))

    # \r would not survive XML round-trips; normalize line ends up front
    abstract = abstract.replace("\r\n", "\n").replace("\r", "\n")
    return DocumentRecord(
        doc_id=doc_id,
        source=_FORMAT_TO_SOURCE.get(fmt, Source.OTHER),
        language=language,
        title=titles[0],
        abstract=abstract,
        creation_date=creation,
        extra_metadata=tuple(extra),
    )
