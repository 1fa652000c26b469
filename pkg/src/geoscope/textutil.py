"""Shared text helpers: tokenization, diacritic folding, language profiling.

All offsets produced here are Unicode code point offsets into the original
string (Python string indices), never byte offsets.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources as importlib_resources

# French elision prefixes ("d'Allada", "l'Arabie") are split into their own
# token so grammars can treat them as linkers rather than name material.
_ELISION = r"(?:[dljcmnst]|qu)['’](?=\w)"
_WORD = r"\w+(?:-\w+)*"
_TOKEN_RE = re.compile(f"(?:{_ELISION})|(?:{_WORD})", re.IGNORECASE | re.UNICODE)

_SENTENCE_END = re.compile(r"[.!?…]\s*$|\n\s*$")

_COMBINING = re.compile(r"[̀-ͯ]")


def fold(text: str) -> str:
    """Casefold and strip diacritics (NFD + combining mark removal)."""
    decomposed = unicodedata.normalize("NFD", text.casefold())
    return _COMBINING.sub("", decomposed)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    sentence_initial: bool

    @property
    def folded(self) -> str:
        return fold(self.text)

    @property
    def capitalized(self) -> bool:
        return bool(self.text) and self.text[0].isupper()


def tokenize(text: str) -> list[Token]:
    """Word tokens with code point offsets.

    Hyphenated words stay single tokens ("sud-ouest"); elided articles become
    their own token ("d'" before "Allada").
    """
    tokens = []
    last_end = 0
    for m in _TOKEN_RE.finditer(text):
        gap = text[last_end:m.start()]
        initial = last_end == 0 or bool(_SENTENCE_END.search(gap))
        tokens.append(Token(m.group(0), m.start(), m.end(), initial))
        last_end = m.end()
    return tokens


def strip_plural(word: str) -> str:
    """FR/EN plural normalization: drop one trailing s or x (3+ letter words)."""
    if len(word) > 3 and word[-1] in "sx":
        return word[:-1]
    return word


def match_key(word: str) -> str:
    """Normalization used for label matching: fold + plural stripping."""
    return strip_plural(fold(word))


def label_key(label: str) -> tuple[str, ...]:
    """Token-level match key for a thesaurus label or text n-gram."""
    return tuple(match_key(t.text) for t in tokenize(label))


def labels_match(surface: str, label: str) -> bool:
    return label_key(surface) == label_key(label)


def _load_wordlist(name: str) -> frozenset[str]:
    ref = importlib_resources.files("geoscope.resources").joinpath(name)
    words = set()
    for line in ref.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


_STOPWORDS: dict[str, frozenset[str]] = {}


def stopwords(language: str) -> frozenset[str]:
    """Stopword set for 'fr' or 'en' (folded forms)."""
    if language not in _STOPWORDS:
        _STOPWORDS[language] = _load_wordlist(f"stopwords-{language}.txt")
    return _STOPWORDS[language]


def language_shares(text: str) -> tuple[float, float]:
    """(fr_share, en_share): fraction of tokens that are language stopwords.

    Words in both lists are ignored so shares stay discriminative.
    """
    fr = stopwords("fr")
    en = stopwords("en")
    both = fr & en
    tokens = [t.folded for t in tokenize(text)]
    if not tokens:
        return (0.0, 0.0)
    fr_hits = sum(1 for t in tokens if t in fr and t not in both)
    en_hits = sum(1 for t in tokens if t in en and t not in both)
    return (fr_hits / len(tokens), en_hits / len(tokens))


def profile_language(text: str, threshold: float = 0.10) -> str:
    """'fr', 'en', 'mixed' (both profiles above threshold), or 'unknown'."""
    fr_share, en_share = language_shares(text)
    if fr_share >= threshold and en_share >= threshold:
        return "mixed"
    if fr_share > en_share and fr_share > 0:
        return "fr"
    if en_share > fr_share and en_share > 0:
        return "en"
    return "unknown"
