"""Local gazetteer snapshot: GeoNames-style entries loaded from TSV.

The column layout is documented bit-exactly in docs/gazetteer.md:
id, name, alt_names (pipe-separated, optional @lang suffix), lat, lon,
feature_class, country, population, parent_id. The name index is keyed on
folded (case- and diacritic-insensitive) tokenized names.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .model import FeatureClass
from .textutil import fold, tokenize


class GazetteerError(ValueError):
    pass


def name_key(name: str) -> str:
    """Fold a place name to its index key (tokenized, space-joined)."""
    return " ".join(fold(t.text) for t in tokenize(name))


@dataclass(frozen=True)
class GazetteerEntry:
    gazetteer_id: str
    names: tuple[tuple[str, str], ...]  # (name, language); first is canonical
    latitude: float
    longitude: float
    feature_class: FeatureClass
    country_code: str
    population: int
    admin_parent: str | None = None

    def __post_init__(self):
        if not self.names:
            raise GazetteerError(f"{self.gazetteer_id}: entry needs at least one name")
        if not -90.0 <= self.latitude <= 90.0:
            raise GazetteerError(f"{self.gazetteer_id}: latitude {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise GazetteerError(f"{self.gazetteer_id}: longitude {self.longitude}")
        if self.population < 0:
            raise GazetteerError(f"{self.gazetteer_id}: negative population")

    @property
    def canonical_name(self) -> str:
        return self.names[0][0]


class Gazetteer:
    def __init__(self, entries):
        self.entries: dict[str, GazetteerEntry] = {}
        for entry in entries:
            if entry.gazetteer_id in self.entries:
                raise GazetteerError(f"duplicate id {entry.gazetteer_id}")
            self.entries[entry.gazetteer_id] = entry
        self._check_parent_chains()
        self._index: dict[str, list[GazetteerEntry]] = {}
        self.max_name_tokens = 1
        for entry in self.entries.values():
            for name, _ in entry.names:
                key = name_key(name)
                if not key:
                    continue
                bucket = self._index.setdefault(key, [])
                if entry not in bucket:
                    bucket.append(entry)
                self.max_name_tokens = max(self.max_name_tokens,
                                           key.count(" ") + 1)
        for bucket in self._index.values():
            bucket.sort(key=lambda e: e.gazetteer_id)
        # first tokens of all indexed names; used for the sentence-initial
        # capitalization exception in proper-name detection
        self.first_words = frozenset(key.split(" ")[0] for key in self._index)

    def _check_parent_chains(self):
        for entry in self.entries.values():
            seen = {entry.gazetteer_id}
            parent = entry.admin_parent
            while parent:
                if parent not in self.entries:
                    raise GazetteerError(
                        f"{entry.gazetteer_id}: unknown parent {parent}")
                if parent in seen:
                    raise GazetteerError(
                        f"{entry.gazetteer_id}: cyclic admin_parent chain")
                seen.add(parent)
                parent = self.entries[parent].admin_parent

    def __len__(self):
        return len(self.entries)

    def lookup(self, name: str) -> list[GazetteerEntry]:
        """Entries whose name set contains `name`, diacritic/case-insensitive."""
        return list(self._index.get(name_key(name), ()))

    def has_key(self, key: str) -> bool:
        return key in self._index

    def lookup_key(self, key: str) -> list[GazetteerEntry]:
        return list(self._index.get(key, ()))

    def parent_chain(self, entry: GazetteerEntry) -> list[GazetteerEntry]:
        chain = []
        parent = entry.admin_parent
        while parent:
            parent_entry = self.entries[parent]
            chain.append(parent_entry)
            parent = parent_entry.admin_parent
        return chain

    @classmethod
    def load(cls, path: str | Path) -> "Gazetteer":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def loads(cls, text: str) -> "Gazetteer":
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) == 8:
                cols.append("")  # trailing empty parent_id may be omitted
            if len(cols) != 9:
                raise GazetteerError(f"line {lineno}: expected 9 columns, got {len(cols)}")
            (gid, name, alts, lat, lon, fclass, country, population, parent) = cols
            names = [(name.strip(), "")]
            for alt in alts.split("|"):
                alt = alt.strip()
                if not alt:
                    continue
                if "@" in alt:
                    alt_name, lang = alt.rsplit("@", 1)
                    names.append((alt_name, lang))
                else:
                    names.append((alt, ""))
            try:
                entries.append(GazetteerEntry(
                    gazetteer_id=gid.strip(),
                    names=tuple(names),
                    latitude=float(lat),
                    longitude=float(lon),
                    feature_class=FeatureClass(fclass.strip()),
                    country_code=country.strip(),
                    population=int(population),
                    admin_parent=parent.strip() or None,
                ))
            except ValueError as exc:
                raise GazetteerError(f"line {lineno}: {exc}") from exc
        return cls(entries)
