import json

import numpy as np
import pytest

from histoblend.curriculum import (
    CaseRecord,
    TileScore,
    analyze_improvement,
    build_test,
    format_improvement,
    load_answers_csv,
    load_cases_csv,
    load_paper,
    render_trios,
    save_paper,
    score_test,
    split_cases,
    stratify_tiles,
)
from histoblend.imaging import png_encode


def make_case(case_id, label, strong=4, weak=4, wrong=1):
    sign = -1.0 if label == 0 else 1.0
    tiles = []
    for i in range(strong):
        tiles.append(TileScore(f"{case_id}-s{i}", sign * (0.6 + 0.05 * i)))
    for i in range(weak):
        tiles.append(TileScore(f"{case_id}-w{i}", sign * (0.1 + 0.05 * i)))
    for i in range(wrong):
        tiles.append(TileScore(f"{case_id}-x{i}", -sign * 0.4))
    return CaseRecord(case_id=case_id, slide_id=f"slide-{case_id}", label=label, tiles=tiles)


def make_cases(n=48):
    return [make_case(f"case{i:02d}", i % 2) for i in range(n)]


class TestStratify:
    def test_positive_label_example(self):
        case = CaseRecord(
            case_id="c",
            slide_id="s",
            label=1,
            tiles=[TileScore("a", 0.8), TileScore("b", 0.3), TileScore("c", -0.2)],
        )
        strata = stratify_tiles(case)
        assert [t.tile_id for t in strata.strong_correct] == ["a"]
        assert [t.tile_id for t in strata.weak_correct] == ["b"]
        assert [t.tile_id for t in strata.excluded] == ["c"]

    def test_boundary_half_is_weak(self):
        case = CaseRecord("c", "s", 1, [TileScore("a", 0.5), TileScore("b", 0.6)])
        strata = stratify_tiles(case)
        assert [t.tile_id for t in strata.weak_correct] == ["a"]

    def test_zero_score_excluded(self):
        case = CaseRecord("c", "s", 0, [TileScore("a", 0.0), TileScore("b", -0.1)])
        strata = stratify_tiles(case)
        assert [t.tile_id for t in strata.excluded] == ["a"]

    def test_partition_is_exhaustive_and_disjoint(self):
        case = make_case("c", 0)
        strata = stratify_tiles(case)
        ids = (
            [t.tile_id for t in strata.strong_correct]
            + [t.tile_id for t in strata.weak_correct]
            + [t.tile_id for t in strata.excluded]
        )
        assert sorted(ids) == sorted(t.tile_id for t in case.tiles)


class TestBuildTest:
    def test_forty_eight_cases_make_ninety_six_items(self):
        paper = build_test(make_cases(48), rng_seed=11)
        assert len(paper.items) == 96
        per_case = {}
        for item in paper.items:
            per_case.setdefault(item.case_id, []).append(item.stratum)
        assert all(sorted(v) == ["strong", "weak"] for v in per_case.values())

    def test_no_tile_reuse_within_trio(self):
        paper = build_test(make_cases(12), rng_seed=3)
        for item in paper.items:
            assert len(set(item.tile_ids)) == 3

    def test_deterministic_given_seed(self):
        a = build_test(make_cases(20), rng_seed=11)
        b = build_test(make_cases(20), rng_seed=11)
        assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(
            b.to_json(), sort_keys=True
        )

    def test_different_seed_changes_order(self):
        a = build_test(make_cases(20), rng_seed=11)
        b = build_test(make_cases(20), rng_seed=12)
        assert [i.item_id for i in a.items] != [i.item_id for i in b.items]

    def test_underpopulated_case_named_in_error(self):
        cases = make_cases(5)
        cases[2] = make_case("case02", 0, strong=4, weak=2)
        with pytest.raises(ValueError, match="case02"):
            build_test(cases, rng_seed=1)

    def test_duplicate_case_ids_rejected(self):
        cases = [make_case("same", 0), make_case("same", 1)]
        with pytest.raises(ValueError, match="duplicate"):
            build_test(cases, rng_seed=1)

    def test_key_matches_case_label(self):
        cases = make_cases(6)
        labels = {c.case_id: c.label for c in cases}
        paper = build_test(cases, rng_seed=2)
        assert all(item.key_label == labels[item.case_id] for item in paper.items)


class TestScoring:
    def _paper(self):
        return build_test(make_cases(8), rng_seed=5)

    def test_perfect_answers(self):
        paper = self._paper()
        answers = {i.item_id: i.key_label for i in paper.items}
        sheet = score_test(paper, answers, "r1")
        assert sheet.overall == 1.0
        assert sheet.by_stratum == {"strong": 1.0, "weak": 1.0}

    def test_flipped_answers(self):
        paper = self._paper()
        answers = {i.item_id: 1 - i.key_label for i in paper.items}
        sheet = score_test(paper, answers, "r1")
        assert sheet.overall == 0.0

    def test_missing_answers_listed(self):
        paper = self._paper()
        answers = {i.item_id: i.key_label for i in paper.items[:-2]}
        with pytest.raises(ValueError, match=paper.items[-1].item_id):
            score_test(paper, answers, "r1")

    def test_overall_is_item_weighted_stratum_mean(self):
        paper = self._paper()
        rng = np.random.default_rng(0)
        answers = {i.item_id: int(rng.integers(0, 2)) for i in paper.items}
        sheet = score_test(paper, answers, "r1")
        weighted = sum(
            sheet.by_stratum[k] * sheet.n_by_stratum[k] for k in sheet.by_stratum
        )
        assert sheet.overall == pytest.approx(weighted / sheet.n_items)


class TestAnalyze:
    def _sheets(self, accuracies, stratum_shift=0.0):
        from histoblend.curriculum import ScoreSheet

        return [
            ScoreSheet(
                respondent=f"r{i}",
                overall=a,
                by_stratum={"strong": min(a + stratum_shift, 1.0), "weak": a},
                n_items=96,
                n_by_stratum={"strong": 48, "weak": 48},
            )
            for i, a in enumerate(accuracies)
        ]

    def test_identical_sheets_trivial_null(self):
        sheets = self._sheets([0.7, 0.8, 0.9])
        report = analyze_improvement(sheets, sheets)
        overall = report.row("overall")
        assert overall.test.p == 0.5
        assert overall.post_mean - overall.pre_mean == 0.0

    def test_unit_deltas_match_t_fixture(self):
        pre = self._sheets([0.50, 0.52, 0.54, 0.56, 0.58, 0.60])
        post = self._sheets([0.51, 0.54, 0.57, 0.60, 0.63, 0.66])  # deltas 1..6 pp
        report = analyze_improvement(pre, post)
        assert report.row("overall").test.t == pytest.approx(4.583, abs=1e-3)

    def test_respondent_mismatch_rejected(self):
        with pytest.raises(ValueError, match="respondent sets differ"):
            analyze_improvement(self._sheets([0.7, 0.8]), self._sheets([0.7, 0.8, 0.9]))

    def test_report_layout_fixtures(self):
        assert format_improvement(0.727, 0.790, 0.021) == "72.7% to 79.0% (p = 0.021)"
        from histoblend.curriculum import ImprovementReport, ImprovementRow
        from histoblend.metrics import TTestResult

        report = ImprovementReport(
            rows=[
                ImprovementRow("overall", 0.727, 0.790, TTestResult(2.0, 5, 0.021)),
                ImprovementRow("strong", 0.743, 0.830, TTestResult(2.0, 5, 0.012)),
                ImprovementRow("weak", 0.708, 0.750, TTestResult(2.0, 5, 0.132)),
            ],
            respondents=["r0"],
        )
        text = report.to_text()
        assert "overall: 72.7% to 79.0% (p = 0.021)" in text
        assert "strong: 74.3% to 83.0%, p = 0.012" in text
        assert "weak: 70.8% to 75.0%, p = 0.132" in text


class TestFiles:
    def test_case_csv_round_trip(self, tmp_path):
        path = tmp_path / "cases.csv"
        path.write_text(
            "case_id,slide_id,label,tile_id,score\n"
            "c1,s1,0,t1,-0.8\n"
            "c1,s1,0,t2,-0.2\n"
            "c2,s2,1,t3,0.9\n"
        )
        cases = load_cases_csv(path)
        assert [c.case_id for c in cases] == ["c1", "c2"]
        assert cases[0].tiles[1].score == -0.2

    def test_case_csv_conflicting_labels(self, tmp_path):
        path = tmp_path / "cases.csv"
        path.write_text(
            "case_id,slide_id,label,tile_id,score\nc1,s1,0,t1,-0.8\nc1,s1,1,t2,0.2\n"
        )
        with pytest.raises(ValueError, match="conflicting"):
            load_cases_csv(path)

    def test_answers_csv(self, tmp_path):
        path = tmp_path / "answers.csv"
        path.write_text("respondent,item_id,answer\nr1,i1,0\nr1,i2,1\nr2,i1,1\n")
        answers = load_answers_csv(path)
        assert answers == {"r1": {"i1": 0, "i2": 1}, "r2": {"i1": 1}}

    def test_paper_json_round_trip(self, tmp_path):
        paper = build_test(make_cases(4), rng_seed=9)
        path = tmp_path / "paper.json"
        save_paper(paper, path)
        loaded = load_paper(path)
        assert loaded.to_json() == paper.to_json()

    def test_render_trios(self, tmp_path):
        cases = make_cases(2)
        paper = build_test(cases, rng_seed=1)
        tiles_dir = tmp_path / "tiles"
        tiles_dir.mkdir()
        rng = np.random.default_rng(0)
        for case in cases:
            for tile in case.tiles:
                img = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
                (tiles_dir / f"{tile.tile_id}.png").write_bytes(png_encode(img))
        rendered = render_trios(paper, tiles_dir, tmp_path / "trios")
        from histoblend.imaging import png_decode

        for item in rendered.items:
            assert item.trio_path is not None
            trio = png_decode((tmp_path / "trios" / f"{item.item_id}.png").read_bytes())
            assert trio.shape == (32, 96, 3)


class TestSplit:
    def test_stratified_halves(self):
        cases = make_cases(48)
        pre, post = split_cases(cases, rng_seed=4)
        assert len(pre) == len(post) == 24
        assert sum(1 for c in pre if c.label == 0) == 12
        assert sum(1 for c in post if c.label == 1) == 12
        assert {c.case_id for c in pre} | {c.case_id for c in post} == {
            c.case_id for c in cases
        }

    def test_deterministic(self):
        cases = make_cases(20)
        assert [c.case_id for c in split_cases(cases, 4)[0]] == [
            c.case_id for c in split_cases(cases, 4)[0]
        ]
