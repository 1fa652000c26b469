"""Calendar dates at year, month, or day granularity.

Scholarly metadata rarely carries full dates, so values are kept at their
native granularity (YYYY, YYYY-MM, or YYYY-MM-DD) and compared at the
coarsest granularity the two sides share.
"""

from __future__ import annotations

import calendar
import datetime
import re
from dataclasses import dataclass


class InvalidDate(ValueError):
    pass


MONTHS_FR = {
    "janvier": 1, "fevrier": 2, "mars": 3, "avril": 4, "mai": 5, "juin": 6,
    "juillet": 7, "aout": 8, "septembre": 9, "octobre": 10, "novembre": 11,
    "decembre": 12,
}
MONTHS_EN = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
}
MONTH_NAMES = {**MONTHS_FR, **MONTHS_EN}


@dataclass(frozen=True, order=False)
class PartialDate:
    """A Gregorian date truncated to year, month, or day granularity."""

    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self):
        if not 1 <= self.year <= 9999:
            raise InvalidDate(f"year out of range: {self.year}")
        if self.day is not None and self.month is None:
            raise InvalidDate("day without month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise InvalidDate(f"month out of range: {self.month}")
        if self.day is not None:
            last = calendar.monthrange(self.year, self.month)[1]
            if not 1 <= self.day <= last:
                raise InvalidDate(f"day out of range: {self.isoformat()}{self.day:+d}")

    @property
    def granularity(self) -> str:
        if self.day is not None:
            return "day"
        if self.month is not None:
            return "month"
        return "year"

    def isoformat(self) -> str:
        if self.day is not None:
            return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"
        if self.month is not None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}"

    def to_date(self) -> datetime.date:
        if self.granularity != "day":
            raise InvalidDate(f"{self.isoformat()} has no day granularity")
        return datetime.date(self.year, self.month, self.day)

    @classmethod
    def from_date(cls, d: datetime.date) -> "PartialDate":
        return cls(d.year, d.month, d.day)

    def compare_coarse(self, other: "PartialDate") -> int:
        """-1/0/1 comparison truncated to the coarsest common granularity."""
        if self.year != other.year:
            return -1 if self.year < other.year else 1
        if self.month is None or other.month is None:
            return 0
        if self.month != other.month:
            return -1 if self.month < other.month else 1
        if self.day is None or other.day is None:
            return 0
        if self.day != other.day:
            return -1 if self.day < other.day else 1
        return 0


_ISO_RE = re.compile(r"^(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?$")
# "1er janvier 2017", "3 mars 1998", "January 1, 2017", "1 January 2017"
_DAY_FIRST_RE = re.compile(
    r"^(\d{1,2})(?:er|re|e)?\s+([^\W\d_]+)\s+(\d{4})$", re.UNICODE)
_MONTH_FIRST_RE = re.compile(
    r"^([^\W\d_]+)\s+(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4})$", re.UNICODE)
_MONTH_YEAR_RE = re.compile(r"^([^\W\d_]+)\s+(\d{4})$", re.UNICODE)


def parse_iso(value: str) -> PartialDate:
    m = _ISO_RE.match(value.strip())
    if not m:
        raise InvalidDate(f"not a partial ISO date: {value!r}")
    year, month, day = m.groups()
    return PartialDate(int(year), int(month) if month else None,
                       int(day) if day else None)


def _month_number(name: str) -> int | None:
    from .textutil import fold
    return MONTH_NAMES.get(fold(name))


def parse_flexible(value: str) -> PartialDate:
    """Parse an ISO partial date or a written FR/EN date ("1er janvier 2017")."""
    text = value.strip()
    m = _ISO_RE.match(text)
    if m:
        return parse_iso(text)
    m = _DAY_FIRST_RE.match(text)
    if m:
        month = _month_number(m.group(2))
        if month:
            return PartialDate(int(m.group(3)), month, int(m.group(1)))
    m = _MONTH_FIRST_RE.match(text)
    if m:
        month = _month_number(m.group(1))
        if month:
            return PartialDate(int(m.group(3)), month, int(m.group(2)))
    m = _MONTH_YEAR_RE.match(text)
    if m:
        month = _month_number(m.group(1))
        if month:
            return PartialDate(int(m.group(2)), month)
    raise InvalidDate(f"unparseable date: {value!r}")
