"""Spatial entity extraction and gazetteer resolution.

Absolute entities (ESA) come from three pattern families:
  - FR feature-noun phrases: "golfe de Guinée", "fleuve Sénégal"
  - EN postfix feature-noun phrases: "Wujiang River Basin", "Indian Ocean"
  - bare gazetteer names: "Madagascar", "Bénin"

Relative entities (ESR) wrap an ESA with a typed spatial indicator plus
optional linker/article tokens: "au sud du Bénin", "Near Paris". Candidates
whose name is followed by an action verb are filtered out as organizations.

Resolution scores gazetteer homonyms by feature-class agreement with the
feature noun, country agreement with already-resolved context, and
log-population; see docs/gazetteer.md for the shipped snapshot format.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .gazetteer import Gazetteer, GazetteerEntry, name_key
from .model import (
    DocumentRecord,
    FeatureClass,
    GazetteerResolution,
    Language,
    SpatialAnnotation,
    SpatialIndicator,
    SpatialKind,
)
from .textutil import Token, fold, tokenize

log = logging.getLogger(__name__)


class UnsupportedLanguage(ValueError):
    pass


class LexiconError(ValueError):
    pass


DEFAULT_WEIGHTS = (0.5, 0.3, 0.2)  # feature class, context country, population

# linkers allowed between a feature noun / indicator and the proper name
_FEATURE_LINKERS = {
    "fr": {"de", "du", "des", "d'", "la", "le", "les", "l'"},
    "en": {"of", "the"},
}
# linkers allowed inside a multiword proper name ("Côte d'Ivoire")
_NAME_LINKERS = {"fr": {"de", "du", "d'"}, "en": set()}
# article/preposition tokens pulled into an ESR span ("au sud du Bénin")
_ESR_PREFIXES = {"fr": {"au", "aux", "a", "l'", "le", "la"}, "en": {"the"}}
_ADVERB_SUFFIX = {"fr": "ment", "en": "ly"}


@dataclass(frozen=True)
class SpatialLexicon:
    """Per-language wordlists driving the extraction grammar."""

    language: str
    feature_nouns: Mapping[str, FeatureClass]      # folded noun -> class
    indicators: Mapping[str, SpatialIndicator]     # folded word -> type
    action_verbs: frozenset[str]
    stop_titles: frozenset[str]
    adverbs: frozenset[str]

    def __post_init__(self):
        present = {ind for ind in self.indicators.values()}
        missing = set(SpatialIndicator) - present
        if missing:
            raise LexiconError(
                f"{self.language}: no indicator entries for "
                f"{sorted(m.value for m in missing)}")

    @classmethod
    def load(cls, path: str | Path, language: str) -> "SpatialLexicon":
        return cls.loads(Path(path).read_text(encoding="utf-8"), language)

    @classmethod
    def loads(cls, text: str, language: str) -> "SpatialLexicon":
        feature_nouns: dict[str, FeatureClass] = {}
        indicators: dict[str, SpatialIndicator] = {}
        plain: dict[str, set[str]] = {
            "action_verbs": set(), "stop_titles": set(), "adverbs": set()}
        section: tuple[str, ...] | None = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = tuple(line[1:-1].split())
                continue
            if section is None:
                raise LexiconError(f"line {lineno}: entry before any section")
            word = fold(line)
            if section[0] == "feature_nouns":
                feature_nouns[word] = FeatureClass(section[1])
            elif section[0] == "indicators":
                indicators[word] = SpatialIndicator(section[1])
            elif section[0] in plain:
                plain[section[0]].add(word)
            else:
                raise LexiconError(f"line {lineno}: unknown section {section[0]}")
        return cls(language, feature_nouns, indicators,
                   frozenset(plain["action_verbs"]),
                   frozenset(plain["stop_titles"]),
                   frozenset(plain["adverbs"]))


# --- candidate extraction ---


def _gap_ok(abstract: str, left: Token, right: Token) -> bool:
    gap = abstract[left.end:right.start]
    return gap == "" or gap.isspace()


def _name_token(tok: Token, lexicon: SpatialLexicon) -> bool:
    return tok.capitalized and tok.folded not in lexicon.stop_titles


def _extend_name(tokens, j: int, abstract: str, lexicon, language: str) -> int:
    """Last token index (inclusive) of the proper name starting at j."""
    k = j
    linkers = _NAME_LINKERS[language]
    while True:
        nxt = k + 1
        if nxt < len(tokens) and _name_token(tokens[nxt], lexicon) \
                and not tokens[nxt].sentence_initial \
                and _gap_ok(abstract, tokens[k], tokens[nxt]):
            k = nxt
            continue
        if (nxt + 1 < len(tokens) and tokens[nxt].folded in linkers
                and _name_token(tokens[nxt + 1], lexicon)
                and not tokens[nxt + 1].sentence_initial
                and _gap_ok(abstract, tokens[k], tokens[nxt])
                and _gap_ok(abstract, tokens[nxt], tokens[nxt + 1])):
            k = nxt + 1
            continue
        return k


@dataclass
class _Candidate:
    start: int
    end: int
    kind: SpatialKind
    priority: int                  # overlap tie-break: lower wins
    indicator: SpatialIndicator | None = None
    feature_noun: str | None = None
    anchor: "_Candidate | None" = None
    start_tok: int = 0
    end_tok: int = 0               # exclusive

    def to_annotation(self, abstract: str) -> SpatialAnnotation:
        return SpatialAnnotation(
            start=self.start, end=self.end,
            surface_text=abstract[self.start:self.end],
            kind=self.kind, indicator=self.indicator,
            feature_noun=self.feature_noun,
            anchor_esa=(self.anchor.to_annotation(abstract)
                        if self.anchor is not None else None))


def _bare_name_candidates(tokens, abstract, gazetteer: Gazetteer) -> list[_Candidate]:
    found = []
    max_n = min(gazetteer.max_name_tokens, 5)
    for i, tok in enumerate(tokens):
        if not tok.capitalized:
            continue
        for n in range(min(max_n, len(tokens) - i), 0, -1):
            window = tokens[i:i + n]
            if any(not _gap_ok(abstract, a, b)
                   for a, b in zip(window, window[1:])):
                continue
            if any(t.sentence_initial for t in window[1:]):
                continue
            key = " ".join(t.folded for t in window)
            if gazetteer.has_key(key):
                found.append(_Candidate(
                    start=window[0].start, end=window[-1].end,
                    kind=SpatialKind.ESA, priority=3,
                    start_tok=i, end_tok=i + n))
                break
    return found


def _fr_feature_candidates(tokens, abstract, lexicon) -> list[_Candidate]:
    found = []
    linkers = _FEATURE_LINKERS["fr"]
    for i, tok in enumerate(tokens):
        fclass = lexicon.feature_nouns.get(tok.folded)
        if fclass is None:
            continue
        j, hops = i + 1, 0
        while (j < len(tokens) and hops < 2 and tokens[j].folded in linkers
               and not tokens[j].sentence_initial
               and _gap_ok(abstract, tokens[j - 1], tokens[j])):
            j, hops = j + 1, hops + 1
        if j >= len(tokens) or not _name_token(tokens[j], lexicon) \
                or tokens[j].sentence_initial \
                or not _gap_ok(abstract, tokens[j - 1], tokens[j]):
            continue
        k = _extend_name(tokens, j, abstract, lexicon, "fr")
        found.append(_Candidate(
            start=tok.start, end=tokens[k].end, kind=SpatialKind.ESA,
            priority=2, feature_noun=tok.text.lower(),
            start_tok=i, end_tok=k + 1))
    return found


def _en_feature_candidates(tokens, abstract, lexicon, gazetteer) -> list[_Candidate]:
    found = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not _name_token(tok, lexicon) or (
                tok.sentence_initial
                and tok.folded not in gazetteer.first_words):
            i += 1
            continue
        k = _extend_name(tokens, i, abstract, lexicon, "en")
        run = tokens[i:k + 1]
        feature_idx = None
        if len(run) >= 2 and run[-1].folded in lexicon.feature_nouns:
            feature_idx = k
        elif k + 1 < len(tokens) and not tokens[k + 1].capitalized \
                and tokens[k + 1].folded in lexicon.feature_nouns \
                and not tokens[k + 1].sentence_initial \
                and _gap_ok(abstract, tokens[k], tokens[k + 1]):
            feature_idx = k + 1
        if feature_idx is not None:
            found.append(_Candidate(
                start=tok.start, end=tokens[feature_idx].end,
                kind=SpatialKind.ESA, priority=2,
                feature_noun=tokens[feature_idx].text.lower(),
                start_tok=i, end_tok=feature_idx + 1))
        i = k + 1
    return found


def _esr_candidates(tokens, abstract, esas, lexicon, language: str) -> list[_Candidate]:
    found = []
    linkers = _FEATURE_LINKERS[language]
    prefixes = _ESR_PREFIXES[language]
    for esa in esas:
        k, hops = esa.start_tok - 1, 0
        while (k >= 0 and hops < 2 and tokens[k].folded in linkers
               and not tokens[k + 1].sentence_initial
               and _gap_ok(abstract, tokens[k], tokens[k + 1])):
            k, hops = k - 1, hops + 1
        if k < 0 or tokens[k].folded not in lexicon.indicators \
                or tokens[k + 1].sentence_initial \
                or not _gap_ok(abstract, tokens[k], tokens[k + 1]):
            continue
        indicator = lexicon.indicators[tokens[k].folded]
        first = k
        hops = 0
        while (first - 1 >= 0 and hops < 2
               and tokens[first - 1].folded in prefixes
               and not tokens[first].sentence_initial
               and _gap_ok(abstract, tokens[first - 1], tokens[first])):
            first, hops = first - 1, hops + 1
        if indicator is SpatialIndicator.GEOMETRIC_FIGURE:
            log.debug("geometric_figure ESR at %d-%d: only the first anchor "
                      "is represented", tokens[first].start, esa.end)
        found.append(_Candidate(
            start=tokens[first].start, end=esa.end, kind=SpatialKind.ESR,
            priority=1, indicator=indicator, anchor=esa,
            start_tok=first, end_tok=esa.end_tok))
    return found


def _language_passes(language: Language | str) -> list[str]:
    value = language.value if isinstance(language, Language) else language
    if value in ("fr", "en"):
        return [value]
    if value in ("mixed", "unknown"):
        return ["fr", "en"]
    raise UnsupportedLanguage(f"no spatial grammar for language {value!r}")


def extract_spatial_candidates(
        abstract: str,
        language: Language | str,
        lexicons: Mapping[str, SpatialLexicon],
        gazetteer: Gazetteer) -> list[SpatialAnnotation]:
    """Unresolved ESA/ESR candidates, sorted, longest-match non-overlapping.

    For mixed-language documents both grammars run and overlapping spans are
    merged longest-first.
    """
    if not abstract:
        return []
    tokens = tokenize(abstract)
    candidates: list[_Candidate] = []
    for lang in _language_passes(language):
        lexicon = lexicons[lang]
        esas = _bare_name_candidates(tokens, abstract, gazetteer)
        if lang == "fr":
            esas += _fr_feature_candidates(tokens, abstract, lexicon)
        else:
            esas += _en_feature_candidates(tokens, abstract, lexicon, gazetteer)
        # absorb ESAs into ESRs where an indicator precedes them
        esrs = _esr_candidates(tokens, abstract, esas, lexicon, lang)
        anchored = {id(e.anchor) for e in esrs}
        candidates.extend(esrs)
        candidates.extend(e for e in esas if id(e) not in anchored)

    chosen: list[_Candidate] = []
    occupied: list[tuple[int, int]] = []
    for cand in sorted(candidates,
                       key=lambda c: (-(c.end - c.start), c.start, c.priority)):
        if any(cand.start < e and s < cand.end for s, e in occupied):
            continue
        occupied.append((cand.start, cand.end))
        chosen.append(cand)
    chosen.sort(key=lambda c: (c.start, c.end))
    return [c.to_annotation(abstract) for c in chosen]


# --- organization filtering ---


def _is_adverb(tok: Token, lexicons: Iterable[SpatialLexicon]) -> bool:
    for lexicon in lexicons:
        if tok.folded in lexicon.adverbs:
            return True
        suffix = _ADVERB_SUFFIX.get(lexicon.language, "")
        if suffix and len(tok.folded) > len(suffix) + 2 \
                and tok.folded.endswith(suffix):
            return True
    return False


def filter_organizations(
        candidates: list[SpatialAnnotation],
        abstract: str,
        language: Language | str,
        lexicons: Mapping[str, SpatialLexicon],
) -> tuple[list[SpatialAnnotation], list[SpatialAnnotation]]:
    """(kept, rejected): drop candidates followed by an action verb.

    The verb may sit up to 3 tokens after the name (auxiliaries), with
    adverbs skipped; sentence boundaries stop the scan.
    """
    active = [lexicons[lang] for lang in _language_passes(language)]
    verbs = frozenset().union(*(lx.action_verbs for lx in active))
    tokens = tokenize(abstract)
    kept, rejected = [], []
    for cand in candidates:
        idx = next((i for i, t in enumerate(tokens) if t.start >= cand.end),
                   len(tokens))
        checked = 0
        is_org = False
        while idx < len(tokens) and checked < 3:
            tok = tokens[idx]
            if tok.sentence_initial:
                break
            if _is_adverb(tok, active):
                idx += 1
                continue
            if tok.folded in verbs:
                is_org = True
                break
            checked += 1
            idx += 1
        (rejected if is_org else kept).append(cand)
    return kept, rejected


# --- gazetteer resolution ---


def _name_keys(ann: SpatialAnnotation) -> list[str]:
    """Candidate lookup keys, most specific first (full surface, then the
    proper-name part with the feature noun stripped)."""
    if ann.kind is SpatialKind.ESR:
        return _name_keys(ann.anchor_esa)
    keys = [name_key(ann.surface_text)]
    if ann.feature_noun:
        feature = fold(ann.feature_noun)
        toks = [fold(t.text) for t in tokenize(ann.surface_text)]
        if toks and toks[0] == feature:
            rest = toks[1:]
            while rest and rest[0] in _FEATURE_LINKERS["fr"]:
                rest = rest[1:]
            if rest:
                keys.append(" ".join(rest))
        if len(toks) > 1 and toks[-1] == feature:
            keys.append(" ".join(toks[:-1]))
    seen: list[str] = []
    for key in keys:
        if key and key not in seen:
            seen.append(key)
    return seen


def candidate_entries(ann: SpatialAnnotation, gazetteer: Gazetteer) -> list[GazetteerEntry]:
    """Gazetteer entries matching the candidate name, most specific key first."""
    for key in _name_keys(ann):
        entries = gazetteer.lookup_key(key)
        if entries:
            return entries
    return []


def resolve(candidate: SpatialAnnotation,
            gazetteer: Gazetteer,
            context: Iterable[SpatialAnnotation] = (),
            feature_classes: Mapping[str, FeatureClass] | None = None,
            weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
            ) -> GazetteerResolution | None:
    """Best gazetteer entry for the candidate, or None when no name matches.

    Score = w_feature * [feature noun class == entry class]
          + w_context * [entry country is modal among context resolutions]
          + w_population * normalized log population.
    Ties break toward larger population, then lexicographic id.
    """
    entries = candidate_entries(candidate, gazetteer)
    if not entries:
        return None
    w_feature, w_context, w_population = weights

    feature_class = None
    noun_ann = candidate.anchor_esa if candidate.kind is SpatialKind.ESR else candidate
    if noun_ann.feature_noun and feature_classes:
        feature_class = feature_classes.get(fold(noun_ann.feature_noun))
    if feature_class is None and candidate.feature_noun and feature_classes:
        feature_class = feature_classes.get(fold(candidate.feature_noun))

    counts = Counter(
        ann.resolution.country_code for ann in context
        if ann.resolution is not None and ann.resolution.country_code)
    top = max(counts.values()) if counts else 0
    modal = {cc for cc, n in counts.items() if n == top} if top else set()

    max_log_pop = max(math.log1p(e.population) for e in entries)

    def score(entry: GazetteerEntry) -> float:
        total = 0.0
        if feature_class is not None and entry.feature_class is feature_class:
            total += w_feature
        if entry.country_code and entry.country_code in modal:
            total += w_context
        if max_log_pop > 0:
            total += w_population * (math.log1p(entry.population) / max_log_pop)
        return total

    best = min(entries, key=lambda e: (-score(e), -e.population, e.gazetteer_id))
    return GazetteerResolution(
        gazetteer_id=best.gazetteer_id,
        canonical_name=best.canonical_name,
        latitude=best.latitude,
        longitude=best.longitude,
        feature_class=best.feature_class,
        country_code=best.country_code,
        score=min(1.0, score(best)),
    )


def annotate_spatial(doc: DocumentRecord,
                     gazetteer: Gazetteer,
                     lexicons: Mapping[str, SpatialLexicon],
                     weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
                     ) -> list[SpatialAnnotation]:
    """Full spatial chain: extract, filter organizations, resolve in two
    passes (unambiguous names first, then the rest against that context)."""
    candidates = extract_spatial_candidates(
        doc.abstract, doc.language, lexicons, gazetteer)
    kept, _ = filter_organizations(candidates, doc.abstract, doc.language,
                                   lexicons)
    feature_classes: dict[str, FeatureClass] = {}
    for lang in _language_passes(doc.language):
        feature_classes.update(lexicons[lang].feature_nouns)

    resolved: dict[int, GazetteerResolution | None] = {}
    context: list[SpatialAnnotation] = []
    pending: list[int] = []
    for i, cand in enumerate(kept):
        entries = candidate_entries(cand, gazetteer)
        if len(entries) == 1:
            res = resolve(cand, gazetteer, (), feature_classes, weights)
            resolved[i] = res
            if res is not None:
                context.append(dataclasses.replace(cand, resolution=res))
        else:
            pending.append(i)
    for i in pending:
        res = resolve(kept[i], gazetteer, context, feature_classes, weights)
        resolved[i] = res
        if res is not None:
            context.append(dataclasses.replace(kept[i], resolution=res))

    out = []
    for i, cand in enumerate(kept):
        res = resolved.get(i)
        out.append(dataclasses.replace(cand, resolution=res)
                   if res is not None else cand)
    out.sort(key=lambda a: (a.start, a.end))
    return out
