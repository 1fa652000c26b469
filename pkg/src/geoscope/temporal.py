"""Rule-based tagging of calendar expressions (dates and periods).

Rules are declarative (regex pattern + named normalizer + class) and live in
a TSV file, one rule per line: lang TAB pattern TAB normalizer TAB class
(see docs/temporal-rules.md). Classes duration and frequency are detected so
they can claim their span during overlap resolution, then discarded: only
date and period annotations are emitted. Expressions relative to the
document creation time (DCT) resolve against creation_date and are skipped
with a warning when it is absent or too coarse.
"""

from __future__ import annotations

import datetime
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .dates import MONTH_NAMES, InvalidDate, PartialDate
from .model import DocumentRecord, Language, TemporalAnnotation, TimexClass
from .textutil import fold

log = logging.getLogger(__name__)


class RuleError(ValueError):
    pass


_EMITTING_CLASSES = {"date", "period"}
_DISCARD_CLASSES = {"duration", "frequency"}


@dataclass(frozen=True)
class TemporalRule:
    language: str
    pattern: re.Pattern
    normalizer: str
    yields: str  # date | period | duration | frequency

    def __post_init__(self):
        if self.yields not in _EMITTING_CLASSES | _DISCARD_CLASSES:
            raise RuleError(f"unknown rule class {self.yields!r}")
        if self.yields in _EMITTING_CLASSES and \
                _normalizer_fn(self.normalizer) is None:
            raise RuleError(f"unknown normalizer {self.normalizer!r}")


def load_rules(path: str | Path) -> list[TemporalRule]:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


def parse_rules(text: str) -> list[TemporalRule]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise RuleError(f"line {lineno}: expected 4 tab-separated fields")
        lang, pattern, normalizer, yields = (p.strip() for p in parts)
        try:
            compiled = re.compile(pattern, re.IGNORECASE | re.UNICODE)
        except re.error as exc:
            raise RuleError(f"line {lineno}: bad pattern: {exc}") from exc
        rules.append(TemporalRule(lang, compiled, normalizer, yields))
    return rules


def _month_number(name: str) -> int:
    return MONTH_NAMES[fold(name)]


def _shift_months(dct: PartialDate, offset: int) -> PartialDate:
    total = dct.year * 12 + (dct.month - 1) + offset
    return PartialDate(total // 12, total % 12 + 1)


# Each normalizer maps (match, dct, decade_pivot) to (begin, end|None);
# returning None skips the match (e.g. inverted range, missing DCT).
def _normalizer_fn(name: str) -> Callable | None:
    if name.startswith("dct_"):
        kind, _, amount = name.partition(":")
        if kind not in ("dct_days", "dct_months", "dct_years"):
            return None
        try:
            offset = int(amount)
        except ValueError:
            return None

        def dct_norm(m, dct, pivot, _kind=kind, _offset=offset):
            if dct is None:
                log.warning("skipping DCT-relative %r: no creation_date",
                            m.group(0))
                return None
            if _kind == "dct_years":
                return (PartialDate(dct.year + _offset), None)
            if _kind == "dct_months":
                if dct.granularity == "year":
                    log.warning("skipping %r: creation_date has no month",
                                m.group(0))
                    return None
                return (_shift_months(dct, _offset), None)
            if dct.granularity != "day":
                log.warning("skipping %r: creation_date has no day",
                            m.group(0))
                return None
            shifted = dct.to_date() + datetime.timedelta(days=_offset)
            return (PartialDate.from_date(shifted), None)

        return dct_norm
    return _STATIC_NORMALIZERS.get(name)


def _norm_day_month_year(m, dct, pivot):
    return (PartialDate(int(m.group("y")), _month_number(m.group("m")),
                        int(m.group("d"))), None)


def _norm_month_year(m, dct, pivot):
    return (PartialDate(int(m.group("y")), _month_number(m.group("m"))), None)


def _norm_year(m, dct, pivot):
    return (PartialDate(int(m.group("y"))), None)


def _norm_year_range(m, dct, pivot):
    y1, y2 = int(m.group("y1")), int(m.group("y2"))
    if y1 > y2:
        return None
    return (PartialDate(y1), PartialDate(y2))


def _norm_decade(m, dct, pivot):
    year = int(m.group("y"))
    if len(m.group("y")) == 2:
        year += pivot
    first = year - year % 10
    return (PartialDate(first), PartialDate(first + 9))


_STATIC_NORMALIZERS = {
    "day_month_year": _norm_day_month_year,
    "month_day_year": _norm_day_month_year,
    "month_year": _norm_month_year,
    "year": _norm_year,
    "year_range": _norm_year_range,
    "decade": _norm_decade,
}


def _doc_languages(language: Language) -> set[str]:
    if language in (Language.MIXED, Language.UNKNOWN):
        return {"fr", "en"}
    return {language.value}


@dataclass(frozen=True)
class _Match:
    start: int
    end: int
    rule_index: int
    yields: str
    begin: PartialDate | None
    value_end: PartialDate | None


def annotate_temporal(doc: DocumentRecord,
                      rules: Iterable[TemporalRule],
                      decade_pivot: int = 1900) -> list[TemporalAnnotation]:
    """Date/period annotations over the abstract, longest match first.

    Rules for the document's language(s) all run; overlapping matches are
    resolved longest-first (ties: earlier start, then rule order), and
    duration/frequency matches claim their span but are not emitted.
    """
    text = doc.abstract
    if not text:
        return []
    languages = _doc_languages(doc.language)
    dct = doc.creation_date

    matches: list[_Match] = []
    for idx, rule in enumerate(rules):
        if rule.language not in languages:
            continue
        for m in rule.pattern.finditer(text):
            if rule.yields in _DISCARD_CLASSES:
                matches.append(_Match(m.start(), m.end(), idx, rule.yields,
                                      None, None))
                continue
            fn = _normalizer_fn(rule.normalizer)
            try:
                normalized = fn(m, dct, decade_pivot)
            except (InvalidDate, KeyError):
                normalized = None
            if normalized is None:
                continue
            begin, end = normalized
            if rule.yields == "period" and end is None:
                continue
            matches.append(_Match(m.start(), m.end(), idx, rule.yields,
                                  begin, end if rule.yields == "period" else None))

    chosen: list[_Match] = []
    occupied: list[tuple[int, int]] = []
    for cand in sorted(matches, key=lambda c: (-(c.end - c.start), c.start,
                                               c.rule_index)):
        if any(cand.start < e and s < cand.end for s, e in occupied):
            continue
        occupied.append((cand.start, cand.end))
        chosen.append(cand)

    out = []
    for m in chosen:
        if m.yields not in _EMITTING_CLASSES:
            continue
        out.append(TemporalAnnotation(
            start=m.start, end=m.end, surface_text=text[m.start:m.end],
            timex_class=TimexClass(m.yields),
            value_begin=m.begin, value_end=m.value_end))
    out.sort(key=lambda a: (a.start, a.end))
    return out
