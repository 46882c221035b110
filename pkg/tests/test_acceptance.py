"""Acceptance criteria, one test each.

The whole acceptance suite in ``configs/acceptance`` runs once per session
(each experiment timed); every criterion then re-reads the files it wrote and
rechecks the claim from the raw numbers.  A PASS/FAIL line per criterion is
printed in the terminal summary.
"""

import csv
import json
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

from cantorlab import cli
from cantorlab.formats import parse_set

import oracles

CONFIGS = Path(__file__).resolve().parent.parent / "configs" / "acceptance"
MEASURES = {"uniform", "product", "oscillating", "staircase", "segments", "kernel"}


@pytest.fixture(scope="session")
def suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    timings = {}
    real = cli.execute

    def timed(cfg, dest):
        t0 = time.perf_counter()
        code = real(cfg, dest)
        timings[Path(dest).name] = time.perf_counter() - t0
        return code

    with pytest.MonkeyPatch.context() as mp:
        mp.setattr(cli, "execute", timed)
        code = cli.run_suite(CONFIGS, out)
    return {"out": out, "code": code, "timings": timings}


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def load(path):
    return json.loads(Path(path).read_text())


def summary_ok(suite, name):
    s = load(suite["out"] / name / "summary.json")
    assert s["exit_code"] == 0 and s["ok"] and s["violations"] == [], s
    return s


@pytest.mark.acceptance(1, "measure validity to depth 8, under 10 s")
def test_c1_measure_validity(suite):
    summary_ok(suite, "01_validate")
    reports = load(suite["out"] / "01_validate" / "validate.json")
    assert {r["measure"] for r in reports} == MEASURES
    for r in reports:
        assert r["depth"] == 8 and r["ok"] and r["violations"] == []
        assert r["checked"] == (2**9 - 1) ** 2  # every rect pair to depth 8
    assert suite["timings"]["01_validate"] < 10


@pytest.mark.acceptance(2, "oscillation 2/3, 1/3 exactly at depths 0..12")
def test_c2_oscillation(suite):
    summary_ok(suite, "02_oscillate")
    trace = rows(suite["out"] / "02_oscillate" / "trace.csv")
    assert [int(r["depth"]) for r in trace] == list(range(13))
    for r in trace:
        want = F(2, 3) if int(r["depth"]) % 2 == 0 else F(1, 3)
        assert F(r["lo"]) == F(r["hi"]) == want
    assert load(suite["out"] / "02_oscillate" / "trace.json")["verdict"] == "oscillating"


@pytest.mark.acceptance(3, "staircase and segments conditionals within 2^-(d-2) of 3/4")
@pytest.mark.parametrize("name", ["03_staircase_limit", "03_segments_limit"])
def test_c3_limits(suite, name):
    summary_ok(suite, name)
    trace = {int(r["depth"]): r for r in rows(suite["out"] / name / "trace.csv")}
    for d in range(6, 13):
        for end in ("lo", "hi"):
            assert abs(F(trace[d][end]) - F(3, 4)) <= F(1, 2 ** (d - 2))
    assert load(suite["out"] / name / "trace.json")["verdict"] == "converged"


@pytest.mark.acceptance(4, "sequence locality: 6 terms vs 12 terms, every rect to depth 6")
def test_c4_locality(suite):
    summary_ok(suite, "04_locality")
    reports = load(suite["out"] / "04_locality" / "validate.json")
    assert {r["measure"] for r in reports} == {"staircase", "segments"}
    for r in reports:
        loc = r["locality"]
        assert loc["terms"] == [6, 12] and loc["depth"] == 6
        assert loc["checked"] == (2**7 - 1) ** 2 and loc["mismatches"] == []


@pytest.mark.acceptance(5, "maximal inequality and upcrossing bounds at depth 10, N <= 4")
def test_c5_martingales(suite):
    summary_ok(suite, "05_martingale")
    base = suite["out"] / "05_martingale"
    entries = load(base / "martingale.json")
    assert {e["martingale"].split("-")[0] for e in entries} == MEASURES
    assert any(e["martingale"].endswith("doubling") for e in entries)
    crossed = 0
    for e in entries:
        assert e["fair"] and e["checked"] == 2**10 - 1
        m = {r["cell"]: F(r["value"]) for r in rows(base / f"martingale_{e['martingale']}.csv")}
        assert max(len(c) for c in m) == 10
        for x in e["exceed"]:
            assert F(x["bound"]) == m[""] / F(x["c"])
            assert F(x["measure"]) <= F(x["bound"])
        assert {u["n"] for u in e["upcrossings"]} == {1, 2, 3, 4}
        for u in e["upcrossings"]:
            assert F(u["bound"]) == (F(u["u"]) / F(u["v"])) ** u["n"]
            assert F(u["measure"]) <= F(u["bound"])
            crossed += F(u["measure"]) > 0
    assert crossed  # some band is actually crossed


@pytest.mark.acceptance(6, "heavy-union bound, 1000 sets per measure, under 60 s")
def test_c6_heavy(suite):
    summary_ok(suite, "06_heavy")
    trials = rows(suite["out"] / "06_heavy" / "heavy_trials.csv")
    assert {r["measure"] for r in trials} == MEASURES
    for r in trials:
        assert int(r["trials"]) == 1000 and int(r["with_heavy"]) > 0
    cfg = load(CONFIGS / "06_heavy.json")
    assert sorted(cfg["ns"]) == [1, 2, 3]
    assert suite["timings"]["06_heavy"] < 60


@pytest.mark.acceptance(7, "discard-below: segments measure equals uniform measure")
def test_c7_discard(suite):
    summary_ok(suite, "07_discard")
    table = rows(suite["out"] / "07_discard" / "discard.csv")
    assert len(table) == 200
    seq = [F(1 - F(1, 4**i), 3) for i in range(1, 17)]
    positive = 0
    for r in table:
        assert r["equal"] == "1" and F(r["segments"]) == F(r["uniform"])
        D = parse_set(r["discarded"])
        seg = sum((oracles.segments_mass(seq, a1, a2) for a1, a2 in D.rects), F(0))
        uni = sum((F(1, 2 ** (len(a1) + len(a2))) for a1, a2 in D.rects), F(0))
        assert seg == uni == F(r["uniform"])
        positive += uni > 0
    assert positive >= 100


@pytest.mark.acceptance(8, "trimming ledger, 200 four-stage runs per measure, honest and adversarial")
@pytest.mark.parametrize("name", ["08_trim_honest", "08_trim_adversarial"])
def test_c8_trim_ledger(suite, name):
    summary_ok(suite, name)
    cfg = load(CONFIGS / f"{name}.json")
    assert cfg["stages"] == 4
    trials = rows(suite["out"] / name / "trim_trials.csv")
    assert {r["measure"] for r in trials} == MEASURES
    for r in trials:
        assert int(r["trials"]) == 200 and int(r["nonempty_U_hat"]) > 0


@pytest.mark.acceptance(9, "trimming coverage on 20 constructed scenarios")
def test_c9_coverage(suite):
    summary_ok(suite, "09_trim_coverage")
    cfg = load(CONFIGS / "09_trim_coverage.json")
    assert len(cfg["scenarios"]) == 20
    assert all(p["convergence_depth"] <= 8 for s in cfg["scenarios"] for p in s["coverage"])
    table = rows(suite["out"] / "09_trim_coverage" / "coverage.csv")
    assert len({r["scenario"] for r in table}) == 20
    assert len(table) == sum(len(s["coverage"]) for s in cfg["scenarios"])
    assert all(r["status"] == "covered" for r in table)


@pytest.mark.acceptance(10, "test constructions, ratio trim and Kraft identity")
def test_c10_vv(suite):
    summary_ok(suite, "10_vv")
    base = suite["out"] / "10_vv"
    ledger = load(base / "vv_ledger.json")
    by_kind = {}
    for row in ledger:
        by_kind.setdefault(row["construction"], set()).add(row["trial"])
        assert row["ok"] and F(row["integral"]) <= F(row["bound"]) == 1
    assert by_kind.keys() == {"product", "sum", "ratio_trim"}
    assert all(len(t) == 500 for t in by_kind.values())
    kraft = load(base / "kraft.json")
    assert {k["size"] for k in kraft} == {2**n for n in range(11)}
    assert all(k["ok"] for k in kraft)
    for k in kraft:
        assert F(k["kraft_sum"]) <= 1 and F(k["deficiency_power_sum"]) <= k["size"]


@pytest.mark.acceptance(11, "suite reruns are byte-identical")
def test_c11_determinism(suite, tmp_path):
    assert suite["code"] == 0
    again = tmp_path / "again"
    assert cli.run_suite(CONFIGS, again) == 0
    first = sorted(p.relative_to(suite["out"]) for p in suite["out"].rglob("*") if p.is_file())
    second = sorted(p.relative_to(again) for p in again.rglob("*") if p.is_file())
    assert first == second and len(first) > 12
    for rel in first:
        assert (suite["out"] / rel).read_bytes() == (again / rel).read_bytes(), rel
