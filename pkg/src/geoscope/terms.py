"""C-value terminology extraction with TF-IDF reported alongside.

Candidates are stopword-delimited n-grams (1..5 words). A candidate nested
inside longer candidates is discounted by their mean frequency:

    C-value(a) = log2(|a|+1) * f(a)                       if nothing contains a
               = log2(|a|+1) * (f(a) - mean_{b in T_a} f(b))   otherwise

where T_a is the set of candidate terms containing a. The +1 length
smoothing keeps single-word terms scored. Ranking is C-value descending,
then frequency, then the term string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .textutil import match_key, stopwords, tokenize

MAX_TERM_WORDS = 5


class EmptyCorpus(ValueError):
    pass


@dataclass(frozen=True)
class TermCandidate:
    surface: str
    frequency: int
    length_words: int
    nested_in: tuple[str, ...]
    c_value: float
    tf_idf: float


def _stopword_set(language: str) -> frozenset[str]:
    if language == "mixed":
        return stopwords("fr") | stopwords("en")
    return stopwords(language)


def candidate_runs(abstract: str, stop: frozenset[str]) -> list[list[tuple[str, str]]]:
    """Maximal stopword-free token runs as (match_key, raw_text) pairs.

    Stopwords, numbers, and any non-whitespace gap (punctuation, sentence
    breaks) delimit runs.
    """
    runs: list[list[tuple[str, str]]] = []
    current: list[tuple[str, str]] = []
    prev_end = None
    for tok in tokenize(abstract):
        gap_break = prev_end is not None and abstract[prev_end:tok.start].strip()
        if gap_break or tok.folded in stop or tok.text.isdigit():
            if current:
                runs.append(current)
            current = []
            if tok.folded in stop or tok.text.isdigit():
                prev_end = tok.end
                continue
        current.append((match_key(tok.text), tok.text))
        prev_end = tok.end
    if current:
        runs.append(current)
    return runs


def extract_terms_cvalue(corpus: Sequence[str], language: str,
                         max_words: int = MAX_TERM_WORDS) -> list[TermCandidate]:
    """Ranked term candidates over a corpus of abstracts.

    Raises EmptyCorpus when no abstract has content.
    """
    documents = [a for a in corpus if a and a.strip()]
    if not documents:
        raise EmptyCorpus("no non-empty abstract in corpus")
    stop = _stopword_set(language)

    freq: dict[tuple[str, ...], int] = {}
    doc_freq: dict[tuple[str, ...], int] = {}
    surface: dict[tuple[str, ...], str] = {}
    for doc in documents:
        seen_here: set[tuple[str, ...]] = set()
        for run in candidate_runs(doc, stop):
            for i in range(len(run)):
                for n in range(1, min(max_words, len(run) - i) + 1):
                    window = run[i:i + n]
                    key = tuple(k for k, _ in window)
                    freq[key] = freq.get(key, 0) + 1
                    if key not in surface:
                        surface[key] = " ".join(raw for _, raw in window)
                    if key not in seen_here:
                        seen_here.add(key)
                        doc_freq[key] = doc_freq.get(key, 0) + 1

    # For every candidate, accumulate the distinct longer candidates that
    # contain it (each counted once, per the T_a set semantics).
    nest_count: dict[tuple[str, ...], int] = {}
    nest_sum: dict[tuple[str, ...], int] = {}
    nested_in: dict[tuple[str, ...], list[str]] = {}
    for key, f in freq.items():
        length = len(key)
        if length < 2:
            continue
        subs = set()
        for n in range(1, length):
            for i in range(length - n + 1):
                subs.add(key[i:i + n])
        for sub in subs:
            nest_count[sub] = nest_count.get(sub, 0) + 1
            nest_sum[sub] = nest_sum.get(sub, 0) + f
            nested_in.setdefault(sub, []).append(" ".join(key))

    n_docs = len(documents)
    out = []
    for key, f in freq.items():
        weight = math.log2(len(key) + 1)
        contains = nest_count.get(key, 0)
        if contains:
            c_value = weight * (f - nest_sum[key] / contains)
        else:
            c_value = weight * f
        tf_idf = f * math.log(n_docs / doc_freq[key])
        out.append(TermCandidate(
            surface=surface[key],
            frequency=f,
            length_words=len(key),
            nested_in=tuple(sorted(nested_in.get(key, ()))),
            c_value=c_value,
            tf_idf=tf_idf,
        ))
    out.sort(key=lambda t: (-t.c_value, -t.frequency,
                            tuple(match_key(w) for w in t.surface.split())))
    return out
