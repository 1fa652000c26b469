"""Shared fixtures: default packaged resources and fixture paths."""

import sys
from functools import lru_cache
from pathlib import Path

from importlib import resources as importlib_resources

sys.path.insert(0, str(Path(__file__).parent))

from geoscope.gazetteer import Gazetteer
from geoscope.spatial import SpatialLexicon

FIXTURES = Path(__file__).parent / "fixtures"


def _resource_text(name: str) -> str:
    ref = importlib_resources.files("geoscope.resources").joinpath(name)
    return ref.read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def load_default_gazetteer() -> Gazetteer:
    return Gazetteer.loads(_resource_text("gazetteer.tsv"))


@lru_cache(maxsize=1)
def load_default_lexicons() -> dict:
    return {lang: SpatialLexicon.loads(_resource_text(f"lexicon-{lang}.txt"), lang)
            for lang in ("fr", "en")}


@lru_cache(maxsize=1)
def load_default_rules():
    from geoscope.temporal import parse_rules
    return parse_rules(_resource_text("temporal-rules.tsv"))


@lru_cache(maxsize=1)
def load_default_thesaurus():
    from geoscope.thematic import load_skos
    return load_skos(_resource_text("thesaurus.skos.xml"))
