"""Flattened index records, JSON-lines persistence, and 3-dimensional search.

A query is a conjunction of up to three clauses (place, period, concept).
Place names match by normalized equality, admin-hierarchy containment
through the gazetteer parent chain, or bounding-box inclusion; periods match
on interval overlap at the coarsest common granularity; concepts match by
URI or label, optionally through broader links (the index stores inherited
broader concepts flagged as such).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .dates import PartialDate, parse_iso
from .gazetteer import Gazetteer, name_key
from .model import AnnotatedDocument, TimexClass


class UnknownPlaceName(ValueError):
    """Queried place name is absent from both the index and the gazetteer."""


class IndexError_(ValueError):
    pass


@dataclass(frozen=True)
class PlaceEntry:
    name: str
    country: str
    lat: float
    lon: float
    kind: str  # resolved entry's feature class


@dataclass(frozen=True)
class PeriodEntry:
    begin: PartialDate
    end: PartialDate


@dataclass(frozen=True)
class ConceptEntry:
    uri: str
    label: str
    inherited: bool


@dataclass(frozen=True)
class TermEntry:
    term: str
    frequency: int
    c_value: float
    tf_idf: float


@dataclass(frozen=True)
class IndexRecord:
    doc_id: str
    source: str
    language: str
    title: str
    year: int | None
    places: tuple[PlaceEntry, ...]
    periods: tuple[PeriodEntry, ...]
    concepts: tuple[ConceptEntry, ...]
    terms: tuple[TermEntry, ...]

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id, "source": self.source,
            "language": self.language, "title": self.title, "year": self.year,
            "places": [{"name": p.name, "country": p.country, "lat": p.lat,
                        "lon": p.lon, "kind": p.kind} for p in self.places],
            "periods": [{"begin": p.begin.isoformat(),
                         "end": p.end.isoformat()} for p in self.periods],
            "concepts": [{"uri": c.uri, "label": c.label,
                          "inherited": c.inherited} for c in self.concepts],
            "terms": [{"term": t.term, "frequency": t.frequency,
                       "c_value": t.c_value, "tf_idf": t.tf_idf}
                      for t in self.terms],
        }

    @classmethod
    def from_json(cls, data: dict) -> "IndexRecord":
        return cls(
            doc_id=data["doc_id"], source=data["source"],
            language=data["language"], title=data["title"], year=data["year"],
            places=tuple(PlaceEntry(p["name"], p["country"], p["lat"],
                                    p["lon"], p["kind"])
                         for p in data["places"]),
            periods=tuple(PeriodEntry(parse_iso(p["begin"]),
                                      parse_iso(p["end"]))
                          for p in data["periods"]),
            concepts=tuple(ConceptEntry(c["uri"], c["label"], c["inherited"])
                           for c in data["concepts"]),
            terms=tuple(TermEntry(t["term"], t["frequency"], t["c_value"],
                                  t["tf_idf"]) for t in data["terms"]),
        )


def build_index_record(doc: AnnotatedDocument,
                       terms: Iterable[TermEntry] = (),
                       broader_chains: bool = True) -> IndexRecord:
    """Flatten an annotated document: one place per resolved spatial
    annotation, one period per temporal annotation (date => begin == end),
    one direct concept entry per thematic annotation plus deduplicated
    inherited broader concepts."""
    rec = doc.record
    places = tuple(
        PlaceEntry(a.resolution.canonical_name, a.resolution.country_code,
                   a.resolution.latitude, a.resolution.longitude,
                   a.resolution.feature_class.value)
        for a in doc.spatial if a.resolution is not None)
    periods = tuple(
        PeriodEntry(a.value_begin,
                    a.value_end if a.value_end is not None else a.value_begin)
        for a in doc.temporal)
    direct = [ConceptEntry(a.concept_uri, a.pref_label, False)
              for a in doc.thematic]
    direct_uris = {c.uri for c in direct}
    inherited: dict[str, str] = {}
    if broader_chains:
        for a in doc.thematic:
            for uri, label in a.broader:
                if uri not in direct_uris:
                    inherited.setdefault(uri, label)
    concepts = tuple(direct) + tuple(
        ConceptEntry(uri, label, True)
        for uri, label in sorted(inherited.items()))

    year = None
    dates = [a.value_begin.year for a in doc.temporal
             if a.timex_class is TimexClass.DATE]
    if dates:
        year = min(dates)
    elif rec.creation_date is not None:
        year = rec.creation_date.year

    return IndexRecord(
        doc_id=rec.doc_id, source=rec.source.value,
        language=rec.language.value, title=rec.title, year=year,
        places=places, periods=periods, concepts=concepts,
        terms=tuple(terms))


@dataclass(frozen=True)
class Query:
    """Conjunction of optional place / period / concept clauses."""

    place: str | None = None
    bbox: tuple[float, float, float, float] | None = None  # W, S, E, N
    period: tuple[PartialDate, PartialDate] | None = None
    concept: str | None = None
    expand_broader: bool = False

    def __post_init__(self):
        if self.place is None and self.bbox is None and \
                self.period is None and self.concept is None:
            raise ValueError("query needs at least one clause")
        if self.place is not None and self.bbox is not None:
            raise ValueError("place name and bounding box are exclusive")
        if self.bbox is not None:
            west, south, east, north = self.bbox
            if not (-180 <= west <= east <= 180 and -90 <= south <= north <= 90):
                raise ValueError(f"invalid bounding box {self.bbox}")
        if self.period is not None and \
                self.period[0].compare_coarse(self.period[1]) > 0:
            raise ValueError("period begin after end")


def periods_overlap(a: PeriodEntry, begin: PartialDate, end: PartialDate) -> bool:
    return a.begin.compare_coarse(end) <= 0 and begin.compare_coarse(a.end) <= 0


@dataclass
class SearchWeights:
    place: float = 1.0
    period: float = 1.0
    concept: float = 1.0
    term_bonus: float = 0.1


class DocumentIndex:
    """In-memory index over IndexRecords, with inverted name/uri maps
    rebuilt on load. The optional gazetteer enables admin-hierarchy
    containment for place queries."""

    def __init__(self, records: Iterable[IndexRecord],
                 gazetteer: Gazetteer | None = None):
        self.records = sorted(records, key=lambda r: r.doc_id)
        ids = [r.doc_id for r in self.records]
        if len(set(ids)) != len(ids):
            dup = next(d for i, d in enumerate(ids) if d in ids[:i])
            raise IndexError_(f"duplicate doc_id {dup}")
        self.gazetteer = gazetteer
        self._by_place: dict[str, set[str]] = {}
        self._by_concept: dict[str, set[str]] = {}
        self._label_to_uris: dict[str, set[str]] = {}
        for rec in self.records:
            for place in rec.places:
                self._by_place.setdefault(name_key(place.name),
                                          set()).add(rec.doc_id)
            for concept in rec.concepts:
                self._by_concept.setdefault(concept.uri, set()).add(rec.doc_id)
                self._label_to_uris.setdefault(name_key(concept.label),
                                               set()).add(concept.uri)

    def __len__(self):
        return len(self.records)

    # --- persistence ---

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")

    @classmethod
    def read_jsonl(cls, path: str | Path,
                   gazetteer: Gazetteer | None = None) -> "DocumentIndex":
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(IndexRecord.from_json(json.loads(line)))
        return cls(records, gazetteer)

    # --- matching ---

    def _place_entry_of(self, place: PlaceEntry):
        if self.gazetteer is None:
            return None
        entries = self.gazetteer.lookup(place.name)
        if not entries:
            return None
        return min(entries, key=lambda e: (abs(e.latitude - place.lat)
                                           + abs(e.longitude - place.lon),
                                           e.gazetteer_id))

    def _match_place(self, rec: IndexRecord, query: Query) -> bool:
        if query.bbox is not None:
            west, south, east, north = query.bbox
            return any(south <= p.lat <= north and west <= p.lon <= east
                       for p in rec.places)
        key = name_key(query.place)
        if any(name_key(p.name) == key for p in rec.places):
            return True
        if self.gazetteer is not None:
            targets = {e.gazetteer_id for e in self.gazetteer.lookup_key(key)}
            if targets:
                for place in rec.places:
                    entry = self._place_entry_of(place)
                    if entry is None:
                        continue
                    chain = {e.gazetteer_id
                             for e in self.gazetteer.parent_chain(entry)}
                    if chain & targets:
                        return True
        return False

    def _concept_uris(self, clause: str) -> set[str]:
        if "://" in clause or clause.startswith("urn:"):
            return {clause}
        return set(self._label_to_uris.get(name_key(clause), ()))

    def _matched_concepts(self, rec: IndexRecord, uris: set[str],
                          expand: bool) -> list[ConceptEntry]:
        return [c for c in rec.concepts
                if c.uri in uris and (expand or not c.inherited)]

    def search(self, query: Query,
               weights: SearchWeights | None = None) -> list[tuple[str, float]]:
        """Ranked (doc_id, score) for records matching every clause.

        Raises UnknownPlaceName when a place-name clause is resolvable
        neither in the index nor in the gazetteer.
        """
        weights = weights or SearchWeights()
        if query.place is not None:
            key = name_key(query.place)
            in_index = key in self._by_place
            in_gazetteer = self.gazetteer is not None and \
                self.gazetteer.has_key(key)
            if not in_index and not in_gazetteer:
                raise UnknownPlaceName(query.place)
        concept_uris: set[str] = set()
        if query.concept is not None:
            concept_uris = self._concept_uris(query.concept)

        results = []
        for rec in self.records:
            score = 0.0
            if query.place is not None or query.bbox is not None:
                if not self._match_place(rec, query):
                    continue
                score += weights.place
            if query.period is not None:
                begin, end = query.period
                if not any(periods_overlap(p, begin, end)
                           for p in rec.periods):
                    continue
                score += weights.period
            if query.concept is not None:
                matched = self._matched_concepts(rec, concept_uris,
                                                 query.expand_broader)
                if not matched:
                    continue
                score += weights.concept + weights.term_bonus * len(matched)
            results.append((rec.doc_id, score))
        results.sort(key=lambda pair: (-pair[1], pair[0]))
        return results


def search(index: DocumentIndex, query: Query,
           weights: SearchWeights | None = None) -> list[tuple[str, float]]:
    return index.search(query, weights)
