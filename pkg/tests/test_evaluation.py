"""Metric math, greedy matching, and report rendering."""

import pytest

from geoscope.evaluation import (
    Cell,
    GoldCorpus,
    GoldFormatError,
    GoldSpan,
    evaluate,
    render_json,
    render_table,
    system_spans_from_documents,
)
from geoscope.model import (
    AnnotatedDocument,
    DocumentRecord,
    Language,
    Source,
    SpatialAnnotation,
    SpatialKind,
)


def gold(spans):
    return GoldCorpus(spans)


def synthetic_case(tp, fp, fn, kind="ESA"):
    """System/gold span sets realizing exact tp/fp/fn counts."""
    system_spans = [(i * 10, i * 10 + 5, kind) for i in range(tp + fp)]
    gold_spans = [GoldSpan(i * 10, i * 10 + 5, kind) for i in range(tp)]
    gold_spans += [GoldSpan(100000 + i * 10, 100000 + i * 10 + 5, kind)
                   for i in range(fn)]
    return ({"doc": {"spatial": system_spans}},
            gold({"doc": {"spatial": gold_spans}}))


class TestMetricFidelity:
    # printed P/R pairs and their F cells: FR table (ours/CASEN), EN table
    # (ours/CASEN), and the press-corpus triple
    CASES = [
        (1.00, 0.90, 0.947),
        (0.93, 0.77, 0.842),
        (0.90, 0.60, 0.72),
        (0.94, 0.533, 0.68),
        (0.62, 0.91, 0.74),
    ]

    @pytest.mark.parametrize("p,r,f_expected", CASES)
    def test_f_from_printed_pairs(self, p, r, f_expected):
        # realize the P/R pair with integer counts, then evaluate()
        scale = 1000
        tp = round(p * r * scale)
        fp = round(tp / p) - tp
        fn = round(tp / r) - tp
        system, gold_corpus = synthetic_case(tp, fp, fn)
        report = evaluate(system, gold_corpus, "exact")
        cell = report.cell("spatial", "ESA")
        assert abs(cell.precision - p) < 0.005
        assert abs(cell.recall - r) < 0.005
        assert abs(cell.f_measure - f_expected) < 0.005  # ±0.5 pp

    def test_formula_directly(self):
        assert Cell(tp=62 * 91, fp=62 * 91 * 38 // 62,
                    fn=62 * 91 * 9 // 91).f_measure == pytest.approx(0.7375,
                                                                     abs=1e-4)

    def test_zero_denominators(self):
        assert Cell().precision == 0.0
        assert Cell().recall == 0.0
        assert Cell().f_measure == 0.0


class TestMatching:
    def test_exact_requires_identical_span_and_kind(self):
        system = {"doc": {"spatial": [(0, 5, "ESA"), (10, 15, "ESR")]}}
        g = gold({"doc": {"spatial": [GoldSpan(0, 5, "ESA"),
                                      GoldSpan(10, 15, "ESA")]}})
        report = evaluate(system, g, "exact")
        assert report.cell("spatial", "ESA").tp == 1
        assert report.cell("spatial", "ESR").fp == 1
        assert report.cell("spatial", "ESA").fn == 1

    def test_overlap_mode(self):
        system = {"doc": {"spatial": [(0, 7, "ESA")]}}
        g = gold({"doc": {"spatial": [GoldSpan(2, 5, "ESA")]}})
        assert evaluate(system, g, "exact").cell("spatial").tp == 0
        assert evaluate(system, g, "overlap").cell("spatial").tp == 1

    def test_gold_span_matched_at_most_once(self):
        system = {"doc": {"spatial": [(0, 5, "ESA"), (0, 5, "ESA")]}}
        g = gold({"doc": {"spatial": [GoldSpan(0, 5, "ESA")]}})
        report = evaluate(system, g, "exact")
        cell = report.cell("spatial", "ESA")
        assert (cell.tp, cell.fp, cell.fn) == (1, 1, 0)

    def test_missing_doc_counts_all_fn(self):
        g = gold({"doc": {"temporal": [GoldSpan(0, 4, "date")]}})
        report = evaluate({}, g, "exact")
        assert report.cell("temporal", "date").fn == 1

    def test_perfect_on_self(self):
        rec = DocumentRecord("d", Source.OTHER, Language.FR, "t",
                             "Bénin et Dakar")
        doc = AnnotatedDocument(rec, spatial=(
            SpatialAnnotation(0, 5, "Bénin", SpatialKind.ESA),
            SpatialAnnotation(9, 14, "Dakar", SpatialKind.ESA)))
        system = system_spans_from_documents([doc])
        gold_corpus = gold({"d": {"spatial": [
            GoldSpan(0, 5, "ESA"), GoldSpan(9, 14, "ESA")]}})
        report = evaluate(system, gold_corpus, "exact")
        cell = report.cell("spatial", "ALL")
        assert (cell.precision, cell.recall, cell.f_measure) == (1.0, 1.0, 1.0)

    def test_removing_tp_degrades_recall_not_precision(self):
        system, g = synthetic_case(tp=5, fp=2, fn=1)
        full = evaluate(system, g, "exact").cell("spatial", "ALL")
        smaller = {"doc": {"spatial": system["doc"]["spatial"][1:]}}
        less = evaluate(smaller, g, "exact").cell("spatial", "ALL")
        assert less.recall < full.recall
        assert less.precision <= full.precision


class TestGoldCorpus:
    def test_load_tsv(self, tmp_path):
        path = tmp_path / "gold.tsv"
        path.write_text("# comment\n"
                        "d1\t0\t5\tspatial\tESA\n"
                        "d1\t9\t14\ttemporal\tdate\n",
                        encoding="utf-8")
        g = GoldCorpus.load(path)
        assert g.docs["d1"]["spatial"] == [GoldSpan(0, 5, "ESA")]

    def test_duplicate_span_rejected(self):
        with pytest.raises(GoldFormatError):
            gold({"d": {"spatial": [GoldSpan(0, 5, "ESA"),
                                    GoldSpan(0, 5, "ESR")]}})

    def test_bad_dimension(self, tmp_path):
        path = tmp_path / "gold.tsv"
        path.write_text("d1\t0\t5\tspace\tESA\n", encoding="utf-8")
        with pytest.raises(GoldFormatError):
            GoldCorpus.load(path)


class TestRendering:
    def test_table_shape_and_percent_style(self):
        system, g = synthetic_case(tp=9, fp=0, fn=1)
        table = render_table(evaluate(system, g, "exact"))
        assert "Précision" in table and "Rappel" in table and "F-mesure" in table
        assert "100%" in table   # precision
        assert "90%" in table    # recall
        assert "94,7%" in table  # comma decimal, as printed in the tables

    def test_json_format(self):
        system, g = synthetic_case(tp=1, fp=0, fn=0)
        import json
        data = json.loads(render_json(evaluate(system, g, "exact")))
        assert data["dimensions"]["spatial"]["ESA"]["tp"] == 1
