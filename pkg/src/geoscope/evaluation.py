"""Precision / recall / F-measure of annotations against gold corpora.

Gold spans live in a TSV sidecar (doc_id, start, end, dimension, kind).
Matching is greedy left-to-right, each gold span consumed by at most one
system span; exact mode needs identical spans and kinds, overlap mode span
intersection and the same kind. Report tables mirror the per-kind
precision/rappel/F layout used for spatial entity marking evaluations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .model import AnnotatedDocument

DIMENSIONS = ("spatial", "temporal", "thematic")
ALL_KINDS = "ALL"


class GoldFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GoldSpan:
    start: int
    end: int
    kind: str


class GoldCorpus:
    """Expert-annotated reference spans, per document and dimension."""

    def __init__(self, spans: Mapping[str, Mapping[str, Iterable[GoldSpan]]]):
        self.docs: dict[str, dict[str, list[GoldSpan]]] = {}
        for doc_id, dims in spans.items():
            self.docs[doc_id] = {}
            for dimension, items in dims.items():
                ordered = sorted(items, key=lambda s: (s.start, s.end))
                seen = set()
                for span in ordered:
                    if (span.start, span.end) in seen:
                        raise GoldFormatError(
                            f"{doc_id}/{dimension}: duplicate span "
                            f"({span.start}, {span.end})")
                    seen.add((span.start, span.end))
                    if span.end <= span.start:
                        raise GoldFormatError(
                            f"{doc_id}/{dimension}: empty span at {span.start}")
                self.docs[doc_id][dimension] = ordered

    @classmethod
    def load(cls, path: str | Path) -> "GoldCorpus":
        spans: dict[str, dict[str, list[GoldSpan]]] = {}
        for lineno, line in enumerate(
                Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise GoldFormatError(f"line {lineno}: expected 5 columns")
            doc_id, start, end, dimension, kind = (p.strip() for p in parts)
            if dimension not in DIMENSIONS:
                raise GoldFormatError(f"line {lineno}: bad dimension {dimension!r}")
            spans.setdefault(doc_id, {}).setdefault(dimension, []).append(
                GoldSpan(int(start), int(end), kind))
        return cls(spans)


@dataclass
class Cell:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f_measure(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class EvalReport:
    mode: str
    cells: dict[tuple[str, str], Cell] = field(default_factory=dict)

    def cell(self, dimension: str, kind: str = ALL_KINDS) -> Cell:
        return self.cells.get((dimension, kind), Cell())

    def kinds(self, dimension: str) -> list[str]:
        return sorted(k for d, k in self.cells
                      if d == dimension and k != ALL_KINDS)


SystemSpans = Mapping[str, Mapping[str, Iterable[tuple[int, int, str]]]]


def system_spans_from_documents(
        documents: Iterable[AnnotatedDocument],
        organizations: Mapping[str, Iterable[tuple[int, int]]] | None = None,
) -> dict[str, dict[str, list[tuple[int, int, str]]]]:
    """Flatten annotated documents into evaluable (start, end, kind) spans.

    Organization spans rejected by the spatial chain may be passed
    separately; they evaluate under the spatial dimension with kind
    "organization".
    """
    out: dict[str, dict[str, list[tuple[int, int, str]]]] = {}
    for doc in documents:
        spans = {
            "spatial": [(a.start, a.end, a.kind.value) for a in doc.spatial],
            "temporal": [(a.start, a.end, a.timex_class.value)
                         for a in doc.temporal],
            "thematic": [(a.start, a.end, "concept") for a in doc.thematic],
        }
        out[doc.record.doc_id] = spans
    if organizations:
        for doc_id, org_spans in organizations.items():
            bucket = out.setdefault(doc_id, {}).setdefault("spatial", [])
            bucket.extend((s, e, "organization") for s, e in org_spans)
            bucket.sort()
    return out


def _matches(system: tuple[int, int, str], gold: GoldSpan, mode: str) -> bool:
    s_start, s_end, s_kind = system
    if s_kind != gold.kind:
        return False
    if mode == "exact":
        return (s_start, s_end) == (gold.start, gold.end)
    return s_start < gold.end and gold.start < s_end


def evaluate(system: SystemSpans, gold: GoldCorpus,
             mode: str = "exact") -> EvalReport:
    """Score system spans against the gold corpus.

    Documents present only in gold count as all-fn; documents present only
    in the system count as all-fp.
    """
    if mode not in ("exact", "overlap"):
        raise ValueError(f"unknown mode {mode!r}")
    report = EvalReport(mode=mode)

    def cell(dimension: str, kind: str) -> Cell:
        return report.cells.setdefault((dimension, kind), Cell())

    doc_ids = set(system) | set(gold.docs)
    for doc_id in sorted(doc_ids):
        sys_dims = system.get(doc_id, {})
        gold_dims = gold.docs.get(doc_id, {})
        for dimension in DIMENSIONS:
            sys_spans = sorted(sys_dims.get(dimension, ()))
            gold_spans = list(gold_dims.get(dimension, ()))
            consumed = [False] * len(gold_spans)
            for span in sys_spans:
                hit = None
                for gi, gspan in enumerate(gold_spans):
                    if not consumed[gi] and _matches(span, gspan, mode):
                        hit = gi
                        break
                if hit is None:
                    cell(dimension, span[2]).fp += 1
                    cell(dimension, ALL_KINDS).fp += 1
                else:
                    consumed[hit] = True
                    cell(dimension, gold_spans[hit].kind).tp += 1
                    cell(dimension, ALL_KINDS).tp += 1
            for gi, gspan in enumerate(gold_spans):
                if not consumed[gi]:
                    cell(dimension, gspan.kind).fn += 1
                    cell(dimension, ALL_KINDS).fn += 1
    return report


def _percent(value: float) -> str:
    """Paper-style rendering: '100%', '90%', '94,7%'."""
    pct = value * 100
    if abs(pct - round(pct)) < 0.05:
        return f"{round(pct):d}%"
    return f"{pct:.1f}%".replace(".", ",")


def render_table(report: EvalReport) -> str:
    lines = []
    for dimension in DIMENSIONS:
        kinds = report.kinds(dimension)
        if not kinds:
            continue
        columns = kinds + [ALL_KINDS]
        width = max(12, max(len(c) for c in columns) + 2)
        lines.append(f"== {dimension} (mode: {report.mode}) ==")
        header = f"{'':<12}" + "".join(f"{c:>{width}}" for c in columns)
        lines.append(header)
        for label, attr in (("Précision", "precision"), ("Rappel", "recall"),
                            ("F-mesure", "f_measure")):
            row = f"{label:<12}"
            for kind in columns:
                value = getattr(report.cell(dimension, kind), attr)
                row += f"{_percent(value):>{width}}"
            lines.append(row)
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def render_json(report: EvalReport) -> str:
    data: dict = {"mode": report.mode, "dimensions": {}}
    for dimension in DIMENSIONS:
        kinds = report.kinds(dimension)
        if not kinds:
            continue
        block = {}
        for kind in kinds + [ALL_KINDS]:
            c = report.cell(dimension, kind)
            block[kind] = {"tp": c.tp, "fp": c.fp, "fn": c.fn,
                           "precision": c.precision, "recall": c.recall,
                           "f_measure": c.f_measure}
        data["dimensions"][dimension] = block
    return json.dumps(data, ensure_ascii=False, indent=2)
