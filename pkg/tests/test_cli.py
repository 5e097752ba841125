import csv

import pytest

from densegarage.cli import EXIT_INVALID, EXIT_OK, EXIT_TIMEOUT, EXIT_USAGE, main, parse_int_list


def run(*args):
    return main([str(a) for a in args])


def test_parse_int_list():
    assert parse_int_list("6..9") == [6, 7, 8, 9]
    assert parse_int_list("6..14:4") == [6, 10, 14]
    assert parse_int_list("10,20,30") == [10, 20, 30]


def test_pcsmp_round_trip(tmp_path):
    inst, plan = tmp_path / "i.json", tmp_path / "p.csv"
    assert run("gen", "--m1", 20, "--seed", 2, "--out", inst) == EXIT_OK
    assert run("solve", inst, "--planner", "pcsmp", "--out", plan) == EXIT_OK
    assert run("validate", inst, plan) == EXIT_OK
    lines = plan.read_text().splitlines()
    row = lines[5].split(",")
    row[2] = "9"  # teleport a vehicle
    lines[5] = ",".join(row)
    plan.write_text("\n".join(lines) + "\n")
    assert run("validate", inst, plan) == EXIT_INVALID


def test_ilp_solve_with_lp_dump(tmp_path):
    inst, lp = tmp_path / "i.json", tmp_path / "m.lp"
    run("gen", "--m1", 5, "--np", 1, "--nr", 1, "--nl", 2, "--seed", 1, "--out", inst)
    assert run("solve", inst, "--planner", "ilp", "--lp-dump", lp, "--out", tmp_path / "p.csv") == EXIT_OK
    assert lp.read_text().startswith("\\")
    assert run("solve", inst, "--planner", "pcsmp", "--lp-dump", lp) == EXIT_USAGE


def test_usage_errors(tmp_path):
    assert run("solve", tmp_path / "missing.json") == EXIT_USAGE
    assert run("gen", "--m1", 2) == EXIT_USAGE
    assert run("bench", "--sweep", "diagonal") == EXIT_USAGE
    assert run("frobnicate") == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("solve", bad) == EXIT_USAGE


def test_bench_rows_and_timeouts(tmp_path):
    out = tmp_path / "b.csv"
    code = run("bench", "--sizes", "6,9", "--planners", "ilp,pcsmp", "--runs", 2,
               "--timeout-s", 2, "--out", out)
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 * 2 * 2
    assert {r["status"] for r in rows if r["solver"] == "pcsmp"} == {"ok"}
    big_ilp = [r for r in rows if r["solver"] == "ilp" and r["m1"] == "9"]
    assert all(r["status"] == "timeout" for r in big_ilp)
    assert code == EXIT_TIMEOUT
    # append-safe: a second run adds rows without a second header
    run("bench", "--sizes", "6", "--planners", "pcsmp", "--runs", 1, "--out", out)
    text = out.read_text()
    assert text.count("solver,m1") == 1 and len(text.splitlines()) == 1 + 8 + 1


def test_bench_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run("bench", "--sweep", "density", "--m1", 10, "--densities", "0.2,max", "--runs", 2, "--out", path)
    strip = lambda p: [r[:5] + r[6:] for r in csv.reader(p.open())]
    assert strip(a) == strip(b)


def test_bench_plot(tmp_path):
    pytest.importorskip("matplotlib")
    png = tmp_path / "b.png"
    run("bench", "--sizes", "6", "--runs", 1, "--out", tmp_path / "b.csv", "--plot", png)
    assert png.stat().st_size > 0


def test_simulate_and_shuffle(tmp_path):
    out = tmp_path / "s.csv"
    assert run("simulate", "--scenario", "evening", "--horizon", 100, "--out", out) == EXIT_OK
    head = out.read_text().splitlines()[0]
    assert "avg_retrieval_time" in head and "avg_parking_time" in head and "total_moves" in head
    cfg = tmp_path / "c.json"
    cfg.write_text('{"scenario": "x", "m1": 8, "m2": 8, "ports": [1, 3], "p_p": 0.2, "p_r": 0.2, "horizon": 50}')
    assert run("simulate", "--config", cfg, "--out", out) == EXIT_OK
    cfg.write_text('{"scenario": "x"}')
    assert run("simulate", "--config", cfg) == EXIT_USAGE
    rep, cmp_ = tmp_path / "r.csv", tmp_path / "c.csv"
    assert run("shuffle", "--m1", 8, "--mode", "rubik", "--compare", "--compare-out", cmp_, "--out", rep) == EXIT_OK
    assert rep.read_text().startswith("seed,phase,kind,line,makespan,moves")
    assert len(cmp_.read_text().splitlines()) == 2
    sched = tmp_path / "o.json"
    sched.write_text('{"order": [0, 1]}')
    assert run("shuffle", "--m1", 8, "--schedule", sched) == EXIT_USAGE
