"""Pre/post test construction from classifier scores on real tiles, and scoring.

Each case contributes two test items: a trio of strongly-predicted tiles and
a trio of weakly-predicted tiles, both sampled reproducibly from the tiles
whose continuous prediction lands on the correct side of zero.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .imaging import load_raster, merge_trio, png_encode
from .metrics import TTestResult, fmt_percent, paired_t_one_sided
from .rng import SplitMix64

# Domain tag xored into the user seed so curriculum draws never collide with
# other consumers of the same seed value.
CURRICULUM_TAG = 0x637572726963756C

STRONG_BAND = 0.5  # |score| beyond this is a strong prediction


@dataclass
class TileScore:
    tile_id: str
    score: float


@dataclass
class CaseRecord:
    case_id: str
    slide_id: str
    label: int  # 0 = first class (negative side), 1 = second class (positive side)
    tiles: list[TileScore]

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"case {self.case_id}: label must be 0 or 1")
        if not self.tiles:
            raise ValueError(f"case {self.case_id}: needs at least one tile")


@dataclass
class Strata:
    strong_correct: list[TileScore]
    weak_correct: list[TileScore]
    excluded: list[TileScore]


def stratify_tiles(case: CaseRecord) -> Strata:
    """Split tiles into strong-correct / weak-correct / excluded.

    Correct means the score sign matches the label side (label 0 negative,
    label 1 positive); a score of exactly 0 has no side and is excluded.
    |score| above 0.5 is strong, at or below (but nonzero) is weak.
    """
    strong, weak, excluded = [], [], []
    for tile in case.tiles:
        side = -1 if tile.score < 0 else (1 if tile.score > 0 else 0)
        wanted = -1 if case.label == 0 else 1
        if side != wanted:
            excluded.append(tile)
        elif abs(tile.score) > STRONG_BAND:
            strong.append(tile)
        else:
            weak.append(tile)
    return Strata(strong_correct=strong, weak_correct=weak, excluded=excluded)


@dataclass
class TestItem:
    item_id: str
    case_id: str
    stratum: str  # "strong" | "weak"
    tile_ids: tuple[str, str, str]
    key_label: int
    trio_path: str | None = None


@dataclass
class TestPaper:
    items: tuple[TestItem, ...]
    rng_seed: int
    case_ids: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "version": 1,
            "rng_seed": self.rng_seed,
            "cases": list(self.case_ids),
            "items": [
                {
                    "item_id": it.item_id,
                    "case_id": it.case_id,
                    "stratum": it.stratum,
                    "tiles": list(it.tile_ids),
                    "key": it.key_label,
                    "trio": it.trio_path,
                }
                for it in self.items
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TestPaper":
        items = tuple(
            TestItem(
                item_id=it["item_id"],
                case_id=it["case_id"],
                stratum=it["stratum"],
                tile_ids=tuple(it["tiles"]),
                key_label=int(it["key"]),
                trio_path=it.get("trio"),
            )
            for it in doc["items"]
        )
        return cls(items=items, rng_seed=int(doc["rng_seed"]), case_ids=tuple(doc["cases"]))


def build_test(cases: list[CaseRecord], rng_seed: int) -> TestPaper:
    """Assemble one strong and one weak trio item per case, then shuffle.

    Draws and the final item order all come from one splitmix64 stream, so
    (cases, rng_seed) fully determines the paper.
    """
    seen = set()
    for case in cases:
        if case.case_id in seen:
            raise ValueError(f"duplicate case id {case.case_id!r}")
        seen.add(case.case_id)

    rng = SplitMix64(rng_seed ^ CURRICULUM_TAG)
    items: list[TestItem] = []
    for case in cases:
        strata = stratify_tiles(case)
        for stratum, pool in (("strong", strata.strong_correct), ("weak", strata.weak_correct)):
            if len(pool) < 3:
                raise ValueError(
                    f"case {case.case_id!r} has only {len(pool)} {stratum}-correct "
                    f"tiles; 3 are required"
                )
            picks = rng.sample_indices(len(pool), 3)
            items.append(
                TestItem(
                    item_id=f"{case.case_id}-{stratum}",
                    case_id=case.case_id,
                    stratum=stratum,
                    tile_ids=tuple(pool[i].tile_id for i in picks),
                    key_label=case.label,
                )
            )
    rng.shuffle(items)
    return TestPaper(
        items=tuple(items),
        rng_seed=rng_seed,
        case_ids=tuple(c.case_id for c in cases),
    )


def render_trios(paper: TestPaper, tiles_dir: str | Path, out_dir: str | Path) -> TestPaper:
    """Merge each item's three tiles side by side and write the trio PNGs.

    Tile images are looked up as <tiles_dir>/<tile_id>.png. Returns a paper
    whose items carry their trio paths.
    """
    tiles = Path(tiles_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rendered = []
    for item in paper.items:
        trio = merge_trio([load_raster(tiles / f"{t}.png") for t in item.tile_ids])
        path = out / f"{item.item_id}.png"
        path.write_bytes(png_encode(trio))
        rendered.append(
            TestItem(
                item_id=item.item_id,
                case_id=item.case_id,
                stratum=item.stratum,
                tile_ids=item.tile_ids,
                key_label=item.key_label,
                trio_path=str(path),
            )
        )
    return TestPaper(items=tuple(rendered), rng_seed=paper.rng_seed, case_ids=paper.case_ids)


@dataclass
class ScoreSheet:
    respondent: str
    overall: float
    by_stratum: dict[str, float]
    n_items: int
    n_by_stratum: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "respondent": self.respondent,
            "overall": self.overall,
            "by_stratum": dict(self.by_stratum),
            "n_items": self.n_items,
            "n_by_stratum": dict(self.n_by_stratum),
        }


def score_test(paper: TestPaper, answers: Mapping[str, int], respondent: str) -> ScoreSheet:
    """Overall and per-stratum accuracy for one respondent's answers."""
    missing = [it.item_id for it in paper.items if it.item_id not in answers]
    if missing:
        raise ValueError(f"incomplete sheet for {respondent!r}: missing {missing}")
    correct = {"strong": 0, "weak": 0}
    totals = {"strong": 0, "weak": 0}
    for item in paper.items:
        totals[item.stratum] += 1
        if int(answers[item.item_id]) == item.key_label:
            correct[item.stratum] += 1
    by_stratum = {k: correct[k] / totals[k] for k in totals if totals[k]}
    n = sum(totals.values())
    return ScoreSheet(
        respondent=respondent,
        overall=sum(correct.values()) / n,
        by_stratum=by_stratum,
        n_items=n,
        n_by_stratum=totals,
    )


@dataclass
class ImprovementRow:
    scope: str  # "overall" | "strong" | "weak"
    pre_mean: float
    post_mean: float
    test: TTestResult


@dataclass
class ImprovementReport:
    rows: list[ImprovementRow]
    respondents: list[str]

    def row(self, scope: str) -> ImprovementRow:
        for r in self.rows:
            if r.scope == scope:
                return r
        raise KeyError(scope)

    def to_json(self) -> dict:
        return {
            "respondents": list(self.respondents),
            "results": {
                r.scope: {
                    "pre": r.pre_mean,
                    "post": r.post_mean,
                    **r.test.to_json(),
                }
                for r in self.rows
            },
        }

    def to_text(self) -> str:
        overall = self.row("overall")
        lines = [f"overall: {format_improvement(overall.pre_mean, overall.post_mean, overall.test.p)}"]
        for scope in ("strong", "weak"):
            r = self.row(scope)
            lines.append(
                f"{scope}: {fmt_percent(r.pre_mean)} to {fmt_percent(r.post_mean)}, "
                f"p = {r.test.p:.3f}"
            )
        return "\n".join(lines)


def format_improvement(pre: float, post: float, p: float) -> str:
    return f"{fmt_percent(pre)} to {fmt_percent(post)} (p = {p:.3f})"


def analyze_improvement(
    pre: list[ScoreSheet], post: list[ScoreSheet]
) -> ImprovementReport:
    """Pair respondents across the two sittings and t-test the improvement."""
    pre_by = {s.respondent: s for s in pre}
    post_by = {s.respondent: s for s in post}
    if set(pre_by) != set(post_by):
        raise ValueError(
            f"respondent sets differ: pre={sorted(pre_by)} post={sorted(post_by)}"
        )
    if len(pre_by) < 2:
        raise ValueError("need at least 2 respondents")
    who = sorted(pre_by)
    rows = []
    for scope in ("overall", "strong", "weak"):
        if scope == "overall":
            a = [pre_by[r].overall for r in who]
            b = [post_by[r].overall for r in who]
        else:
            a = [pre_by[r].by_stratum[scope] for r in who]
            b = [post_by[r].by_stratum[scope] for r in who]
        if a == b:
            # no movement at all: report the symmetric null instead of
            # tripping the zero-variance guard in the t-test primitive
            test = TTestResult(t=0.0, df=len(a) - 1, p=0.5)
        else:
            test = paired_t_one_sided(a, b)
        rows.append(
            ImprovementRow(
                scope=scope,
                pre_mean=sum(a) / len(a),
                post_mean=sum(b) / len(b),
                test=test,
            )
        )
    return ImprovementReport(rows=rows, respondents=who)


def split_cases(cases: list[CaseRecord], rng_seed: int) -> tuple[list[CaseRecord], list[CaseRecord]]:
    """Seeded stratified halving of cases into (pre, post) by label."""
    rng = SplitMix64(rng_seed ^ CURRICULUM_TAG ^ 0x73706C6974)  # extra "split" tag
    first, second = [], []
    for label in (0, 1):
        group = [c for c in cases if c.label == label]
        order = rng.sample_indices(len(group), len(group))
        half = (len(group) + 1) // 2
        first.extend(group[i] for i in order[:half])
        second.extend(group[i] for i in order[half:])
    return first, second


def load_cases_csv(path: str | Path) -> list[CaseRecord]:
    """Case manifest CSV: case_id,slide_id,label,tile_id,score (one row per tile)."""
    by_case: dict[str, CaseRecord] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"case_id", "slide_id", "label", "tile_id", "score"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"case manifest must have columns {sorted(required)}")
        for row in reader:
            case_id = row["case_id"]
            tile = TileScore(tile_id=row["tile_id"], score=float(row["score"]))
            if case_id not in by_case:
                by_case[case_id] = CaseRecord(
                    case_id=case_id,
                    slide_id=row["slide_id"],
                    label=int(row["label"]),
                    tiles=[tile],
                )
            else:
                rec = by_case[case_id]
                if int(row["label"]) != rec.label:
                    raise ValueError(f"case {case_id!r} has conflicting labels")
                rec.tiles.append(tile)
    return list(by_case.values())


def load_answers_csv(path: str | Path) -> dict[str, dict[str, int]]:
    """Answers CSV: respondent,item_id,answer. Returns respondent -> item -> 0/1."""
    out: dict[str, dict[str, int]] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"respondent", "item_id", "answer"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"answers file must have columns {sorted(required)}")
        for row in reader:
            out.setdefault(row["respondent"], {})[row["item_id"]] = int(row["answer"])
    return out


def save_paper(paper: TestPaper, path: str | Path) -> None:
    Path(path).write_text(json.dumps(paper.to_json(), indent=2), encoding="utf-8")


def load_paper(path: str | Path) -> TestPaper:
    return TestPaper.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
