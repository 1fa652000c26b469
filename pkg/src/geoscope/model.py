"""Domain model: normalized documents and their three annotation layers.

All types are immutable after construction and validate their invariants in
__post_init__. Span offsets are Unicode code point offsets into the abstract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .dates import PartialDate
from .textutil import labels_match


class InvariantViolation(ValueError):
    """A domain invariant does not hold."""


class Source(str, Enum):
    ISTEX = "istex"
    AGRITROP = "agritrop"
    ANRT = "anrt"
    OTHER = "other"


class Language(str, Enum):
    FR = "fr"
    EN = "en"
    MIXED = "mixed"
    UNKNOWN = "unknown"


class SpatialKind(str, Enum):
    ESA = "ESA"   # absolute: directly geo-locatable named place
    ESR = "ESR"   # relative: indicator + anchor ESA


class SpatialIndicator(str, Enum):
    ORIENTATION = "orientation"
    DISTANCE = "distance"
    ADJACENCY = "adjacency"
    INCLUSION = "inclusion"
    GEOMETRIC_FIGURE = "geometric_figure"


class FeatureClass(str, Enum):
    POPULATED_PLACE = "populated_place"
    ADMINISTRATIVE = "administrative"
    HYDROGRAPHIC = "hydrographic"
    TERRAIN = "terrain"
    REGION = "region"
    COUNTRY = "country"
    OTHER = "other"


class TimexClass(str, Enum):
    DATE = "date"
    PERIOD = "period"


# XML 1.0 cannot carry these; \r is excluded as well because parsers
# normalize line ends, which would silently break round-trips.
_BAD_TEXT = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\r\ud800-\udfff￾￿]")
# Attribute values additionally normalize tabs/newlines to spaces.
_BAD_ATTR = re.compile("[\x00-\x1f\ud800-\udfff￾￿]")


def _check_text(value: str, what: str) -> None:
    if _BAD_TEXT.search(value):
        raise InvariantViolation(f"{what} contains XML-unsafe characters")


def _check_attr(value: str, what: str) -> None:
    if _BAD_ATTR.search(value):
        raise InvariantViolation(f"{what} contains XML-unsafe characters")


@dataclass(frozen=True)
class DocumentRecord:
    """One normalized publication: identity, provenance, title and abstract."""

    doc_id: str
    source: Source
    language: Language
    title: str
    abstract: str
    creation_date: PartialDate | None = None
    extra_metadata: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.doc_id:
            raise InvariantViolation("doc_id must be non-empty")
        _check_attr(self.doc_id, "doc_id")
        _check_text(self.title, "title")
        _check_text(self.abstract, "abstract")
        object.__setattr__(self, "extra_metadata",
                           tuple((k, v) for k, v in self.extra_metadata))
        for key, value in self.extra_metadata:
            if not key:
                raise InvariantViolation("extra_metadata key must be non-empty")
            _check_attr(key, "extra_metadata key")
            _check_text(value, f"extra_metadata[{key}]")


@dataclass(frozen=True)
class GazetteerResolution:
    """A resolved gazetteer footprint for a spatial annotation."""

    gazetteer_id: str
    canonical_name: str
    latitude: float
    longitude: float
    feature_class: FeatureClass
    country_code: str = ""
    score: float = 0.0

    def __post_init__(self):
        _check_attr(self.gazetteer_id, "gazetteer_id")
        _check_attr(self.canonical_name, "canonical_name")
        _check_attr(self.country_code, "country_code")
        if not -90.0 <= self.latitude <= 90.0:
            raise InvariantViolation(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise InvariantViolation(f"longitude out of range: {self.longitude}")
        if not 0.0 <= self.score <= 1.0:
            raise InvariantViolation(f"score out of range: {self.score}")


@dataclass(frozen=True)
class SpatialAnnotation:
    """An absolute (ESA) or relative (ESR) spatial entity span."""

    start: int
    end: int
    surface_text: str
    kind: SpatialKind
    indicator: SpatialIndicator | None = None
    feature_noun: str | None = None
    anchor_esa: "SpatialAnnotation | None" = None
    resolution: GazetteerResolution | None = None

    def __post_init__(self):
        if self.end <= self.start or self.start < 0:
            raise InvariantViolation(f"invalid span ({self.start}, {self.end})")
        _check_text(self.surface_text, "surface_text")
        if self.feature_noun is not None:
            _check_attr(self.feature_noun, "feature_noun")
        if self.kind is SpatialKind.ESR:
            if self.indicator is None:
                raise InvariantViolation("ESR requires an indicator")
            if self.anchor_esa is None:
                raise InvariantViolation("ESR requires an anchor ESA")
            anchor = self.anchor_esa
            if anchor.kind is not SpatialKind.ESA:
                raise InvariantViolation("ESR anchor must be an ESA")
            inside = self.start <= anchor.start and anchor.end <= self.end
            if not inside or (anchor.start, anchor.end) == (self.start, self.end):
                raise InvariantViolation(
                    "ESR span must strictly contain its anchor ESA span")
        else:
            if self.indicator is not None:
                raise InvariantViolation("ESA must not carry an indicator")
            if self.anchor_esa is not None:
                raise InvariantViolation("ESA must not carry an anchor")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class TemporalAnnotation:
    """A calendar expression span with normalized partial ISO value(s)."""

    start: int
    end: int
    surface_text: str
    timex_class: TimexClass
    value_begin: PartialDate
    value_end: PartialDate | None = None

    def __post_init__(self):
        if self.end <= self.start or self.start < 0:
            raise InvariantViolation(f"invalid span ({self.start}, {self.end})")
        _check_text(self.surface_text, "surface_text")
        if self.timex_class is TimexClass.PERIOD:
            if self.value_end is None:
                raise InvariantViolation("period requires value_end")
            if self.value_begin.compare_coarse(self.value_end) > 0:
                raise InvariantViolation(
                    f"period begin {self.value_begin.isoformat()} after "
                    f"end {self.value_end.isoformat()}")
        elif self.value_end is not None:
            raise InvariantViolation("date must not carry value_end")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class ThematicAnnotation:
    """A thesaurus concept match span with used-for labels and broader chain."""

    start: int
    end: int
    surface_text: str
    concept_uri: str
    pref_label: str
    used_for: tuple[str, ...] = ()
    broader: tuple[tuple[str, str], ...] = ()  # (uri, label), parent -> root

    def __post_init__(self):
        if self.end <= self.start or self.start < 0:
            raise InvariantViolation(f"invalid span ({self.start}, {self.end})")
        _check_text(self.surface_text, "surface_text")
        _check_attr(self.concept_uri, "concept_uri")
        if not self.pref_label:
            raise InvariantViolation("pref_label must be non-empty")
        _check_attr(self.pref_label, "pref_label")
        object.__setattr__(self, "used_for", tuple(self.used_for))
        object.__setattr__(self, "broader",
                           tuple((u, l) for u, l in self.broader))
        for label in self.used_for:
            _check_text(label, "used_for label")
        seen = set()
        for uri, label in self.broader:
            _check_attr(uri, "broader uri")
            _check_text(label, "broader label")
            if uri in seen:
                raise InvariantViolation(f"broader chain repeats {uri}")
            seen.add(uri)
        if not labels_match(self.surface_text, self.pref_label) and not any(
                labels_match(self.surface_text, alt) for alt in self.used_for):
            raise InvariantViolation(
                f"surface {self.surface_text!r} matches neither pref_label "
                f"nor used_for labels")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def _sorted_unique(annotations, what: str):
    ordered = tuple(sorted(annotations, key=lambda a: (a.start, a.end)))
    spans = [a.span for a in ordered]
    if len(set(spans)) != len(spans):
        dup = next(s for i, s in enumerate(spans) if s in spans[:i])
        raise InvariantViolation(f"duplicate {what} annotation span {dup}")
    return ordered


@dataclass(frozen=True)
class AnnotatedDocument:
    """A DocumentRecord plus its three annotation layers.

    Annotation lists are normalized to (start, end) order at construction;
    duplicate spans within a layer are rejected.
    """

    record: DocumentRecord
    spatial: tuple[SpatialAnnotation, ...] = ()
    temporal: tuple[TemporalAnnotation, ...] = ()
    thematic: tuple[ThematicAnnotation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "spatial", _sorted_unique(self.spatial, "spatial"))
        object.__setattr__(self, "temporal", _sorted_unique(self.temporal, "temporal"))
        object.__setattr__(self, "thematic", _sorted_unique(self.thematic, "thematic"))
        abstract = self.record.abstract
        for layer in (self.spatial, self.temporal, self.thematic):
            for ann in layer:
                self._check_span(ann, abstract)
        for ann in self.spatial:
            if ann.anchor_esa is not None:
                self._check_span(ann.anchor_esa, abstract)

    @staticmethod
    def _check_span(ann, abstract: str) -> None:
        if ann.end > len(abstract):
            raise InvariantViolation(
                f"span ({ann.start}, {ann.end}) outside abstract of length "
                f"{len(abstract)}")
        actual = abstract[ann.start:ann.end]
        if actual != ann.surface_text:
            raise InvariantViolation(
                f"surface {ann.surface_text!r} != abstract[{ann.start}:{ann.end}] "
                f"({actual!r})")
