"""SKOS thesaurus loading and concept annotation.

Matching is longest-match, non-overlapping, case- and diacritic-insensitive,
with FR/EN plural stripping (trailing s/x), against prefLabel and altLabel
("used for") terms. Each match carries the concept's used-for labels and its
full broader chain, from direct parent to root.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping
from xml.etree import ElementTree as ET

from .model import DocumentRecord, Language, ThematicAnnotation
from .textutil import match_key, tokenize

SKOS_NS = "http://www.w3.org/2004/02/skos/core#"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"


class MalformedSkos(ValueError):
    pass


class CyclicBroader(ValueError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("cyclic broader chain: " + " -> ".join(cycle))


@dataclass(frozen=True)
class ThesaurusConcept:
    uri: str
    pref_labels: Mapping[str, str]              # language -> label
    alt_labels: Mapping[str, tuple[str, ...]]    # language -> used-for terms
    broader_uri: str | None = None

    def pref_label(self, language: str | None = None) -> str:
        if language and language in self.pref_labels:
            return self.pref_labels[language]
        for lang in ("fr", "en"):
            if lang in self.pref_labels:
                return self.pref_labels[lang]
        return next(iter(self.pref_labels.values()))


class Thesaurus:
    def __init__(self, concepts: Iterable[ThesaurusConcept]):
        self.concepts: dict[str, ThesaurusConcept] = {}
        for concept in concepts:
            if not concept.pref_labels:
                raise MalformedSkos(f"{concept.uri}: concept has no prefLabel")
            self.concepts[concept.uri] = concept
        self._check_broader()
        # label index: language -> match-key token tuple -> [(uri, label)]
        self._index: dict[str, dict[tuple[str, ...], list[tuple[str, str]]]] = {}
        self.max_label_tokens = 1
        for concept in self.concepts.values():
            labels = [(lang, label) for lang, label in concept.pref_labels.items()]
            labels += [(lang, alt) for lang, alts in concept.alt_labels.items()
                       for alt in alts]
            for lang, label in labels:
                key = tuple(match_key(t.text) for t in tokenize(label))
                if not key:
                    continue
                bucket = self._index.setdefault(lang, {}).setdefault(key, [])
                bucket.append((concept.uri, label))
                self.max_label_tokens = max(self.max_label_tokens, len(key))
        for buckets in self._index.values():
            for bucket in buckets.values():
                bucket.sort()

    def _check_broader(self):
        for concept in self.concepts.values():
            if concept.broader_uri and concept.broader_uri not in self.concepts:
                raise MalformedSkos(
                    f"{concept.uri}: broader target {concept.broader_uri} "
                    f"not in scheme")
        for concept in self.concepts.values():
            seen = [concept.uri]
            parent = concept.broader_uri
            while parent:
                if parent in seen:
                    raise CyclicBroader(seen[seen.index(parent):] + [parent])
                seen.append(parent)
                parent = self.concepts[parent].broader_uri

    def __len__(self):
        return len(self.concepts)

    def lookup(self, key: tuple[str, ...], language: str) -> list[tuple[str, str]]:
        return self._index.get(language, {}).get(key, [])

    def broader_chain(self, uri: str, language: str | None = None
                      ) -> tuple[tuple[str, str], ...]:
        """(uri, label) pairs from direct parent to root."""
        chain = []
        parent = self.concepts[uri].broader_uri
        while parent:
            concept = self.concepts[parent]
            chain.append((parent, concept.pref_label(language)))
            parent = concept.broader_uri
        return tuple(chain)

    def used_for(self, uri: str, language: str | None = None) -> tuple[str, ...]:
        """All alternative labels; the matched language's terms come first."""
        concept = self.concepts[uri]
        ordered: list[str] = []
        langs = sorted(concept.alt_labels,
                       key=lambda l: (l != language, l))
        for lang in langs:
            ordered.extend(concept.alt_labels[lang])
        return tuple(ordered)


def load_skos(xml: str) -> Thesaurus:
    """Parse SKOS RDF/XML into a Thesaurus.

    Raises MalformedSkos for unparseable input, concepts without prefLabel,
    or dangling broader links, and CyclicBroader on broader cycles.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise MalformedSkos(f"not well-formed XML: {exc}") from exc
    concepts = []
    for el in root.iter(f"{{{SKOS_NS}}}Concept"):
        uri = el.attrib.get(f"{{{RDF_NS}}}about", "")
        if not uri:
            raise MalformedSkos("skos:Concept without rdf:about")
        pref: dict[str, str] = {}
        alt: dict[str, list[str]] = {}
        broader = None
        for child in el:
            lang = child.attrib.get(XML_LANG, "")
            if child.tag == f"{{{SKOS_NS}}}prefLabel":
                if child.text and child.text.strip():
                    pref[lang] = child.text.strip()
            elif child.tag == f"{{{SKOS_NS}}}altLabel":
                if child.text and child.text.strip():
                    alt.setdefault(lang, []).append(child.text.strip())
            elif child.tag == f"{{{SKOS_NS}}}broader":
                broader = child.attrib.get(f"{{{RDF_NS}}}resource", broader)
        if not pref:
            raise MalformedSkos(f"{uri}: concept has no prefLabel")
        concepts.append(ThesaurusConcept(
            uri, pref, {k: tuple(v) for k, v in alt.items()}, broader))
    return Thesaurus(concepts)


def load_skos_file(path: str | Path) -> Thesaurus:
    return load_skos(Path(path).read_text(encoding="utf-8"))


def _doc_languages(language: Language) -> list[str]:
    if language in (Language.MIXED, Language.UNKNOWN):
        return ["fr", "en"]
    return [language.value]


@dataclass(frozen=True)
class LabelMatch:
    """A raw label hit before concept data is attached."""

    start: int
    end: int
    uri: str
    language: str
    label: str


def match_labels(abstract: str, thesaurus: Thesaurus,
                 languages: list[str]) -> list[LabelMatch]:
    """Longest-match, non-overlapping label scan, left to right."""
    tokens = tokenize(abstract)
    matches: list[LabelMatch] = []
    i = 0
    while i < len(tokens):
        hit = None
        max_n = min(thesaurus.max_label_tokens, len(tokens) - i)
        for n in range(max_n, 0, -1):
            window = tokens[i:i + n]
            if any(abstract[a.end:b.start].strip()
                   for a, b in zip(window, window[1:])):
                continue
            key = tuple(match_key(t.text) for t in window)
            found = [(uri, lang, label)
                     for lang in languages
                     for uri, label in thesaurus.lookup(key, lang)]
            if found:
                uri, lang, label = min(found)
                hit = LabelMatch(window[0].start, window[-1].end, uri, lang,
                                 label)
                i += n
                break
        if hit is None:
            i += 1
        else:
            matches.append(hit)
    return matches


def attach_concept_data(matches: Iterable[LabelMatch], abstract: str,
                        thesaurus: Thesaurus) -> list[ThematicAnnotation]:
    """Attach pref label, used-for terms, and broader chain to raw matches."""
    out = []
    for m in matches:
        concept = thesaurus.concepts[m.uri]
        out.append(ThematicAnnotation(
            start=m.start, end=m.end,
            surface_text=abstract[m.start:m.end],
            concept_uri=m.uri,
            pref_label=concept.pref_label(m.language),
            used_for=thesaurus.used_for(m.uri, m.language),
            broader=thesaurus.broader_chain(m.uri, m.language),
        ))
    return out


def annotate_thematic(doc: DocumentRecord,
                      thesaurus: Thesaurus) -> list[ThematicAnnotation]:
    """Thesaurus concept annotations over the abstract."""
    if not doc.abstract:
        return []
    matches = match_labels(doc.abstract, thesaurus, _doc_languages(doc.language))
    return attach_concept_data(matches, doc.abstract, thesaurus)
