"""Temporal rule engine: extraction, normalization, DCT arithmetic."""

import datetime

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoscope.dates import PartialDate
from geoscope.model import DocumentRecord, Language, Source, TimexClass
from geoscope.temporal import RuleError, annotate_temporal, parse_rules
from conftest import load_default_rules

RULES = load_default_rules()


def doc(abstract, language=Language.FR, dct=None):
    return DocumentRecord("d", Source.OTHER, language, "t", abstract,
                          creation_date=dct)


def annotate(abstract, language=Language.FR, dct=None):
    return annotate_temporal(doc(abstract, language, dct), RULES)


class TestExplicitDates:
    def test_premier_janvier_2017(self):
        anns = annotate("La loi entre en vigueur le 1er janvier 2017.")
        (ann,) = anns
        assert ann.timex_class is TimexClass.DATE
        assert ann.value_begin == PartialDate(2017, 1, 1)
        assert ann.surface_text == "1er janvier 2017"

    def test_english_month_day_year(self):
        (ann,) = annotate("Data collected on January 1, 2017.", Language.EN)
        assert ann.value_begin == PartialDate(2017, 1, 1)

    def test_month_year(self):
        (ann,) = annotate("La campagne de mars 1998 fut décisive.")
        assert ann.value_begin == PartialDate(1998, 3)

    def test_bare_year_bounds(self):
        assert annotate("Vers 999 après J.-C.") == []
        (ann,) = annotate("La crue de 1042 fut notée.")
        assert ann.value_begin == PartialDate(1042)
        assert annotate("En 2150, peut-être.") == []


class TestPeriods:
    def test_between_1990_and_2000(self):
        (ann,) = annotate("Rainfall fell between 1990 and 2000.", Language.EN)
        assert ann.timex_class is TimexClass.PERIOD
        assert ann.value_begin == PartialDate(1990)
        assert ann.value_end == PartialDate(2000)
        assert ann.surface_text == "between 1990 and 2000"

    def test_entre_et(self):
        (ann,) = annotate("Les mesures faites entre 1990 et 2000 le montrent.")
        assert (ann.value_begin, ann.value_end) == (PartialDate(1990),
                                                    PartialDate(2000))

    def test_decade_fr(self):
        (ann,) = annotate("La sécheresse des années 1990 a marqué la région.")
        assert ann.timex_class is TimexClass.PERIOD
        assert ann.value_begin == PartialDate(1990)
        assert ann.value_end == PartialDate(1999)

    def test_decade_two_digit_pivot(self):
        (ann,) = annotate("Les crues des années 90 furent record.")
        assert (ann.value_begin, ann.value_end) == (PartialDate(1990),
                                                    PartialDate(1999))
        (ann,) = annotate_temporal(
            doc("Les crues des années 90 furent record."), RULES,
            decade_pivot=2000)
        assert (ann.value_begin, ann.value_end) == (PartialDate(2090),
                                                    PartialDate(2099))

    def test_decade_en(self):
        (ann,) = annotate("Yields dropped through the 1990s.", Language.EN)
        assert (ann.value_begin, ann.value_end) == (PartialDate(1990),
                                                    PartialDate(1999))

    def test_inverted_range_not_a_period(self):
        anns = annotate("la période de 2000 à 1990 est absurde")
        # the range rule rejects it; bare years are still tagged
        assert all(a.timex_class is TimexClass.DATE for a in anns)
        assert len(anns) == 2


class TestDctRelative:
    def test_avant_hier(self):
        # calendar arithmetic oracle: 2017-01-03 minus 2 days
        expected = datetime.date(2017, 1, 3) - datetime.timedelta(days=2)
        assert expected == datetime.date(2017, 1, 1)
        (ann,) = annotate("L'alerte fut donnée avant-hier.",
                          dct=PartialDate(2017, 1, 3))
        assert ann.value_begin == PartialDate(2017, 1, 1)
        assert ann.surface_text == "avant-hier"

    def test_last_year(self):
        (ann,) = annotate("Surveys ran last year.", Language.EN,
                          dct=PartialDate(2005, 6))
        assert ann.value_begin == PartialDate(2004)

    def test_missing_dct_skips_with_warning(self, caplog):
        with caplog.at_level("WARNING"):
            anns = annotate("L'alerte fut donnée avant-hier.")
        assert anns == []
        assert any("no creation_date" in m for m in caplog.messages)

    def test_coarse_dct_skips_day_relative(self, caplog):
        with caplog.at_level("WARNING"):
            anns = annotate("L'alerte fut donnée hier.", dct=PartialDate(1990))
        assert anns == []

    def test_last_month(self):
        (ann,) = annotate("Records were set last month.", Language.EN,
                          dct=PartialDate(2005, 1, 15))
        assert ann.value_begin == PartialDate(2004, 12)


class TestDiscards:
    def test_duration_detected_but_discarded(self):
        assert annotate("Les essais ont duré pendant trois ans.") == []

    def test_frequency_discarded(self):
        assert annotate("Sampling happened every year.", Language.EN) == []
        assert annotate("Les relevés sont faits chaque année.") == []

    def test_no_temporal_expression(self):
        assert annotate("Aucune mention de calendrier ici.") == []


class TestOverlaps:
    def test_range_beats_bare_years(self):
        (ann,) = annotate("Mesures faites entre 1990 et 2000 sur le terrain.")
        assert ann.timex_class is TimexClass.PERIOD

    def test_decade_beats_bare_year(self):
        (ann,) = annotate("La sécheresse des années 1990 fut rude.")
        assert ann.timex_class is TimexClass.PERIOD

    def test_date_beats_nested_year(self):
        (ann,) = annotate("Publié le 15 mars 1998 à Dakar.")
        assert ann.value_begin == PartialDate(1998, 3, 15)

    def test_mixed_language_document(self):
        anns = annotate("Étude menée en 1995. Data from March 2001 follow.",
                        Language.MIXED)
        values = {a.value_begin.isoformat() for a in anns}
        assert values == {"1995", "2001-03"}


class TestRuleParsing:
    def test_bad_pattern(self):
        with pytest.raises(RuleError):
            parse_rules("fr\t(unclosed\tyear\tdate")

    def test_bad_class(self):
        with pytest.raises(RuleError):
            parse_rules("fr\tabc\tyear\ttime_of_day")

    def test_unknown_normalizer(self):
        with pytest.raises(RuleError):
            parse_rules("fr\tabc\tno_such\tdate")


@settings(max_examples=80, deadline=None)
@given(st.text(alphabet="abc 1209entre90 etd'hier au-", max_size=80))
def test_only_date_and_period_classes(text):
    annotations = annotate_temporal(
        doc(text, dct=PartialDate(2000, 6, 15)), RULES)
    for ann in annotations:
        assert ann.timex_class in (TimexClass.DATE, TimexClass.PERIOD)
        if ann.timex_class is TimexClass.PERIOD:
            assert ann.value_begin.compare_coarse(ann.value_end) <= 0


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="ab  19c95 entre 2000 et ans\t x-", max_size=60))
def test_idempotent_under_whitespace_normalization(text):
    import re
    collapsed = re.sub(r"\s+", " ", text)
    base = annotate_temporal(doc(collapsed, dct=PartialDate(2000, 6, 15)), RULES)
    again = annotate_temporal(doc(collapsed, dct=PartialDate(2000, 6, 15)), RULES)
    assert base == again
    raw = annotate_temporal(doc(text, dct=PartialDate(2000, 6, 15)), RULES)
    assert [(a.timex_class, a.value_begin, a.value_end) for a in raw] == \
           [(a.timex_class, a.value_begin, a.value_end) for a in base]
