"""Pipeline orchestration: normalize, annotate, index, and report timings.

Per-document failures are isolated (logged and skipped); resource-load
failures abort the run. The manifest reports wall-clock totals for the five
processing stages (temporal annotation, thematic annotation, concept lookup,
spatial annotation, index generation) plus the total and per-document mean.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources as importlib_resources
from pathlib import Path

from . import ingest
from .gazetteer import Gazetteer
from .indexing import DocumentIndex, TermEntry, build_index_record
from .model import AnnotatedDocument, Language
from .modsxml import serialize_mods_ti
from .spatial import SpatialLexicon, annotate_spatial
from .temporal import TemporalRule, annotate_temporal, load_rules, parse_rules
from .terms import EmptyCorpus, candidate_runs, extract_terms_cvalue
from .textutil import match_key, stopwords
from .thematic import Thesaurus, attach_concept_data, load_skos, match_labels

log = logging.getLogger(__name__)

STAGES = ("temporal_annotation", "thematic_annotation", "concept_lookup",
          "spatial_annotation", "index_generation")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    workers: int = 4
    decade_pivot: int = 1900
    top_k_terms: int = 10
    weight_place: float = 1.0
    weight_period: float = 1.0
    weight_concept: float = 1.0
    term_bonus: float = 0.1
    resolve_feature_weight: float = 0.5
    resolve_context_weight: float = 0.3
    resolve_population_weight: float = 0.2

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        """Parse a flat key = value config file (ints/floats; # comments)."""
        values = {}
        types = {f.name: f.type for f in fields(cls)}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8")
                                      .splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = int(raw) if types[key] == "int" else float(raw)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from exc
        return cls(**values)

    @property
    def resolve_weights(self) -> tuple[float, float, float]:
        return (self.resolve_feature_weight, self.resolve_context_weight,
                self.resolve_population_weight)


@dataclass(frozen=True)
class Resources:
    gazetteer: Gazetteer
    lexicons: dict[str, SpatialLexicon]
    rules: list[TemporalRule]
    thesaurus: Thesaurus

    @classmethod
    def load(cls, directory: str | Path) -> "Resources":
        directory = Path(directory)
        return cls(
            gazetteer=Gazetteer.load(directory / "gazetteer.tsv"),
            lexicons={lang: SpatialLexicon.load(
                directory / f"lexicon-{lang}.txt", lang)
                for lang in ("fr", "en")},
            rules=load_rules(directory / "temporal-rules.tsv"),
            thesaurus=load_skos((directory / "thesaurus.skos.xml")
                                .read_text(encoding="utf-8")),
        )

    @classmethod
    def default(cls) -> "Resources":
        base = importlib_resources.files("geoscope.resources")

        def text(name):
            return base.joinpath(name).read_text(encoding="utf-8")

        return cls(
            gazetteer=Gazetteer.loads(text("gazetteer.tsv")),
            lexicons={lang: SpatialLexicon.loads(
                text(f"lexicon-{lang}.txt"), lang) for lang in ("fr", "en")},
            rules=parse_rules(text("temporal-rules.tsv")),
            thesaurus=load_skos(text("thesaurus.skos.xml")),
        )


@dataclass
class PipelineResult:
    documents: list[AnnotatedDocument]
    index: DocumentIndex
    manifest: dict
    failures: list[tuple[str, str]] = field(default_factory=list)


def _annotate_one(record, resources: Resources, config: PipelineConfig):
    """Annotate one document; returns (AnnotatedDocument, stage timings)."""
    timings = dict.fromkeys(STAGES, 0.0)

    t0 = time.perf_counter()
    temporal = annotate_temporal(record, resources.rules,
                                 decade_pivot=config.decade_pivot)
    timings["temporal_annotation"] = time.perf_counter() - t0

    languages = (["fr", "en"]
                 if record.language in (Language.MIXED, Language.UNKNOWN)
                 else [record.language.value])
    t0 = time.perf_counter()
    matches = match_labels(record.abstract, resources.thesaurus, languages) \
        if record.abstract else []
    timings["thematic_annotation"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    thematic = attach_concept_data(matches, record.abstract,
                                   resources.thesaurus)
    timings["concept_lookup"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    spatial = annotate_spatial(record, resources.gazetteer,
                               resources.lexicons,
                               weights=config.resolve_weights)
    timings["spatial_annotation"] = time.perf_counter() - t0

    doc = AnnotatedDocument(record=record, spatial=tuple(spatial),
                            temporal=tuple(temporal), thematic=tuple(thematic))
    return doc, timings


def _document_terms(doc: AnnotatedDocument, ranked_by_lang, config):
    """The document's own candidates, ranked by corpus-level C-value."""
    languages = (["fr", "en"]
                 if doc.record.language in (Language.MIXED, Language.UNKNOWN)
                 else [doc.record.language.value])
    own: dict[str, TermEntry] = {}
    for lang in languages:
        ranked = ranked_by_lang.get(lang)
        if not ranked:
            continue
        keys = set()
        for run in candidate_runs(doc.record.abstract, stopwords(lang)):
            for i in range(len(run)):
                for n in range(1, min(5, len(run) - i) + 1):
                    keys.add(tuple(k for k, _ in run[i:i + n]))
        for term in ranked:
            key = tuple(match_key(w) for w in term.surface.split())
            if key in keys and term.surface not in own:
                own[term.surface] = TermEntry(term.surface, term.frequency,
                                              term.c_value, term.tf_idf)
    top = sorted(own.values(),
                 key=lambda t: (-t.c_value, -t.frequency, t.term))
    return tuple(top[:config.top_k_terms])


def discover_corpus(corpus_dir: str | Path) -> list[Path]:
    corpus_dir = Path(corpus_dir)
    return sorted(p for p in corpus_dir.iterdir()
                  if p.is_file() and not p.name.startswith("."))


def run_pipeline(corpus_dir: str | Path,
                 resources: Resources,
                 config: PipelineConfig | None = None,
                 out_dir: str | Path | None = None) -> PipelineResult:
    """Normalize, annotate, and index every document under corpus_dir.

    Writes one MODS-TI XML per document, a JSON-lines index, and a manifest
    with per-stage timings when out_dir is given.
    """
    config = config or PipelineConfig()
    started = time.perf_counter()
    timings = dict.fromkeys(STAGES, 0.0)
    failures: list[tuple[str, str]] = []

    records = []
    for path in discover_corpus(corpus_dir):
        try:
            records.append(ingest.normalize(ingest.SourceFile.read(path)))
        except Exception as exc:  # per-document isolation
            log.warning("skipping %s: %s", path, exc)
            failures.append((str(path), str(exc)))

    documents: list[AnnotatedDocument] = []
    if records:
        workers = max(1, config.workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(
                    lambda r: _run_safe(r, resources, config), records):
                if outcome.error is not None:
                    failures.append(outcome.error)
                    continue
                documents.append(outcome.document)
                for stage, seconds in outcome.timings.items():
                    timings[stage] += seconds

    documents.sort(key=lambda d: d.record.doc_id)

    t0 = time.perf_counter()
    ranked_by_lang = {}
    for lang in ("fr", "en"):
        abstracts = [d.record.abstract for d in documents
                     if d.record.abstract and (
                         d.record.language.value == lang
                         or d.record.language in (Language.MIXED,
                                                  Language.UNKNOWN))]
        if abstracts:
            try:
                ranked_by_lang[lang] = extract_terms_cvalue(abstracts, lang)
            except EmptyCorpus:
                pass

    index_records = []
    for doc in documents:
        terms = _document_terms(doc, ranked_by_lang, config)
        index_records.append(build_index_record(doc, terms))
    index = DocumentIndex(index_records, gazetteer=resources.gazetteer)

    if out_dir is not None:
        out_dir = Path(out_dir)
        mods_dir = out_dir / "mods-ti"
        mods_dir.mkdir(parents=True, exist_ok=True)
        for doc in documents:
            (mods_dir / f"{doc.record.doc_id}.xml").write_text(
                serialize_mods_ti(doc), encoding="utf-8")
        index.write_jsonl(out_dir / "index.jsonl")
    timings["index_generation"] = time.perf_counter() - t0

    total = time.perf_counter() - started
    count = len(documents)
    manifest = {f"{stage}_seconds": round(timings[stage], 6)
                for stage in STAGES}
    manifest.update({
        "total_seconds": round(total, 6),
        "document_count": count,
        "mean_seconds_per_document": round(total / count, 6) if count else 0.0,
        "failures": len(failures),
    })
    if out_dir is not None:
        (Path(out_dir) / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return PipelineResult(documents, index, manifest, failures)


@dataclass
class _Outcome:
    document: AnnotatedDocument | None = None
    timings: dict | None = None
    error: tuple[str, str] | None = None


def _run_safe(record, resources, config) -> _Outcome:
    try:
        doc, timings = _annotate_one(record, resources, config)
        return _Outcome(document=doc, timings=timings)
    except Exception as exc:  # per-document isolation
        log.warning("annotation failed for %s: %s", record.doc_id, exc)
        return _Outcome(error=(record.doc_id, str(exc)))
