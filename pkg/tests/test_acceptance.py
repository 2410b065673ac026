"""Release gate: every workbench guarantee checked end to end.

Each test prints exactly one `[criterion N] PASS/FAIL: ...` line (visible
with `pytest -s`), then asserts, so the suite doubles as a human-readable
scorecard and a hard gate.
"""

import dataclasses
import json
import math
import random
import statistics
import time

import numpy as np
import pytest

import rsslocate as rl
import rsslocate.evaluate as ev
from conftest import quiet
from rsslocate.cli import main as cli_main

SEEDS = tuple(range(20))


def report(n, ok, detail):
    print(f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {n}: {detail}"


@pytest.fixture(scope="module")
def office_m70():
    """Shared office m=70 runs: all three methods, 25 queries x 20 seeds."""
    cfg = ev.ExperimentConfig(
        scenario="office",
        methods=("3NNF", "KNN(2)", "RBF"),
        segmentation=ev.SEG_MANUAL,
        seeds=SEEDS,
        m_values=(70,),
        n_test=25,
    )
    t0 = time.perf_counter()
    rows = ev.run_experiment(cfg)
    return rows, time.perf_counter() - t0


@pytest.fixture(scope="module")
def office_small_m():
    cfg = ev.ExperimentConfig(
        scenario="office",
        methods=("3NNF", "KNN(2)"),
        segmentation=ev.SEG_MANUAL,
        seeds=SEEDS,
        m_values=(20, 40, 60),
        n_test=25,
    )
    return ev.run_experiment(cfg)


def pick(rows, method, m):
    return {r.seed: r for r in rows if r.method == method and r.m == m}


def test_criterion_01_distance_against_brute_force():
    rng = random.Random(12345)
    beacon_pool = [f"b{i}" for i in range(12)]
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        shared = rng.sample(beacon_pool, rng.randint(1, 8))
        a = {b: rng.uniform(0, 100) for b in shared}
        b = {b: rng.uniform(0, 100) for b in shared}
        for extra in rng.sample(beacon_pool, rng.randint(0, 4)):
            (a if rng.random() < 0.5 else b)[extra] = rng.uniform(0, 100)
        va, vb = rl.RssVector(a), rl.RssVector(b)
        oracle = math.sqrt(sum((a[k] - b[k]) ** 2 for k in set(a) & set(b)))
        worst = max(worst, abs(rl.rss_distance(va, vb) - oracle))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 1.0
    report(1, ok, f"max deviation {worst:.2e} over 1000 pairs (tol 1e-9), {elapsed:.2f} s (limit 1)")


def test_criterion_02_zero_noise_exactness():
    hall0 = quiet(rl.preset_hall())
    t0 = time.perf_counter()
    db = rl.survey(hall0, seed=0)
    assert rl.segment_auto(db, seed=0).success
    est = rl.ThreeNNFLocalizer().fit(db)
    errors = []
    for i, rp in enumerate(db.reference_points):
        v = rl.query_at(hall0, rp.position, seed=0, index=i)
        res = est.locate(v)
        errors.append(rl.euclid(res.position, rp.position))
    elapsed = time.perf_counter() - t0
    exact = sum(1 for e in errors if e == 0.0)
    ok = exact == 60 and elapsed < 5.0
    report(2, ok, f"{exact}/60 reference queries exact (need 60), {elapsed:.2f} s (limit 5)")


def test_criterion_03_error_band(office_m70):
    rows, elapsed = office_m70
    medians = [r.median_error for r in pick(rows, "3NNF", 70).values()]
    in_band = sum(1 for v in medians if 0.5 <= v <= 3.5)
    ok = in_band >= 16 and elapsed < 60.0
    report(
        3,
        ok,
        f"{in_band}/20 seed medians in [0.5, 3.5] m (need 16), "
        f"band {min(medians):.2f}-{max(medians):.2f}, {elapsed:.1f} s (limit 60)",
    )


def test_criterion_04_mean_error_vs_rbf(office_m70):
    rows, _ = office_m70
    nnf = pick(rows, "3NNF", 70)
    rbf = pick(rows, "RBF", 70)
    wins = sum(1 for s in SEEDS if nnf[s].mean_error <= rbf[s].mean_error)
    ok = wins >= 14
    report(4, ok, f"3NNF mean <= RBF mean in {wins}/20 seeds (need 14)")


def test_criterion_05_reference_point_sweep(office_m70, office_small_m):
    rows = office_small_m + [r for r in office_m70[0] if r.method in ("3NNF", "KNN(2)")]
    per_m = {}
    for m in (20, 40, 60, 70):
        nnf, knn = pick(rows, "3NNF", m), pick(rows, "KNN(2)", m)
        per_m[m] = sum(1 for s in SEEDS if nnf[s].mean_error <= knn[s].mean_error)
    ordering_ok = all(w >= 14 for w in per_m.values())
    both_improve = sum(
        1
        for s in SEEDS
        if pick(rows, "3NNF", 70)[s].mean_error <= pick(rows, "3NNF", 20)[s].mean_error
        and pick(rows, "KNN(2)", 70)[s].mean_error <= pick(rows, "KNN(2)", 20)[s].mean_error
    )
    ok = ordering_ok and both_improve >= 16
    wins = "/".join(f"m{m}:{w}" for m, w in sorted(per_m.items()))
    report(
        5,
        ok,
        f"3NNF beats KNN(2) in {wins} of 20 seeds (need 14 each); "
        f"m=70 improves on m=20 for both methods in {both_improve}/20 (need 16)",
    )


def test_criterion_06_segmentation_dichotomy():
    hall0 = quiet(rl.preset_hall())
    office = rl.preset_office()
    t0 = time.perf_counter()
    hall_ok = 0
    for seed in SEEDS:
        db = rl.survey(hall0, seed=seed)
        rep = rl.segment_auto(db, seed=seed)
        if rep.success and all(
            rl.is_distinct(a.feature, b.feature)
            for i, a in enumerate(rep.subareas)
            for b in rep.subareas[i + 1 :]
        ):
            hall_ok += 1
    office_fail = 0
    for seed in SEEDS:
        db = rl.survey(office, seed=seed)
        if not rl.segment_auto(db, seed=seed).success:
            office_fail += 1
    elapsed = time.perf_counter() - t0
    ok = hall_ok == 20 and office_fail >= 18 and elapsed < 60.0
    report(
        6,
        ok,
        f"hall distinct successes {hall_ok}/20 (need 20), office failures "
        f"{office_fail}/20 (need 18), {elapsed:.1f} s (limit 60)",
    )


def test_criterion_07_tracking_search_reduction():
    hall0 = quiet(rl.preset_hall())
    db = rl.survey(hall0, seed=0)
    assert rl.segment_auto(db, seed=0).success
    u, m = len(db.subareas), len(db.reference_points)
    est = rl.ThreeNNFLocalizer().fit(db)
    steps = rl.walk(hall0, seed=0)
    prev = est.locate(steps[0][1])
    counts, stayed_steps, equal_steps = [], 0, 0
    for pos, v in steps[1:]:
        full = est.locate(v)
        tracked = est.track(v, prev)
        counts.append(tracked.candidate_count)
        if db.get_subarea(prev.subarea).region.contains(pos):
            stayed_steps += 1
            equal_steps += tracked.position == full.position
        prev = tracked
    mean_count = statistics.fmean(counts)
    ok = u >= 4 and mean_count < 0.6 * m and equal_steps == stayed_steps
    report(
        7,
        ok,
        f"u={u} (need >= 4), mean candidates {mean_count:.1f} < {0.6 * m:.0f}, "
        f"tracked equals full at {equal_steps}/{stayed_steps} stayed steps",
    )


def test_criterion_08_persistence_suite():
    hall0 = quiet(rl.preset_hall())
    scenarios = {"hall": rl.preset_hall(), "office": rl.preset_office()}
    value_ok = bytes_ok = 0
    total = 0
    for i in range(100):
        name = ("hall", "office")[i % 2]
        scenario = scenarios[name]
        m = (8, 12, 20, 30, 40)[i % 5]
        db = rl.survey(scenario, m=m, seed=i)
        if i % 4 == 0:
            rl.partition_manual(db, scenario.regions)
        total += 1
        text = rl.dumps_database(db)
        loaded = rl.loads_database(text)
        value_ok += loaded == db
        bytes_ok += rl.dumps_database(loaded) == text

    # replacing one subarea must not disturb any other serialized row
    db = rl.survey(hall0, seed=0)
    assert rl.segment_auto(db, seed=0).success
    target = db.subareas[0].id

    def other_rows(doc):
        return {
            "subareas": [json.dumps(s, sort_keys=True) for s in doc["subareas"]
                         if s["id"] != target],
            "points": [json.dumps(p, sort_keys=True) for p in doc["reference_points"]
                       if p["subarea"] != target],
        }

    before = other_rows(json.loads(rl.dumps_database(db)))
    region = db.get_subarea(target).region
    fresh = [
        rl.sample_batch(hall0, (region.x0 + (i + 0.5) * region.width / 4,
                                (region.y0 + region.y1) / 2), 9, 3, i, 10)
        for i in range(4)
    ]
    rl.resegment_subarea(db, target, fresh)
    after = other_rows(json.loads(rl.dumps_database(db)))
    untouched = before == after
    ok = value_ok == total == bytes_ok == 100 and untouched
    report(
        8,
        ok,
        f"round-trip value {value_ok}/100, bytes {bytes_ok}/100, "
        f"other subareas untouched by resegment: {untouched}",
    )


def test_criterion_09_rbf_sanity():
    # interpolation: zero ridge must reproduce every training position
    db = rl.survey(quiet(rl.preset_hall()), m=20, seed=0)
    model = rl.train_rbf(db, regularization=0.0)
    residual = max(
        rl.euclid(rl.estimate_rbf(model, rp.vector).position, rp.position)
        for rp in db.reference_points
    )

    # ridge weights against an independent dense normal-equations solve
    db10 = rl.survey(rl.preset_hall(), m=10, seed=0)
    lam = 1e-3
    model10 = rl.train_rbf(db10, regularization=lam)
    order = sorted(db10.beacon_ids())
    X = np.array(
        [[rp.vector.readings.get(b, 0.0) for b in order] for rp in db10.reference_points]
    )
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    dist = np.sqrt(d2)
    np.fill_diagonal(dist, np.inf)
    widths = np.maximum(np.median(np.sort(dist, axis=1)[:, :3], axis=1), 1.0)
    phi = np.exp(-d2 / (2.0 * widths[None, :] ** 2))
    y = np.array([rp.position for rp in db10.reference_points])
    n = len(db10.reference_points)
    ones = np.ones((n, 1))
    lhs = np.block(
        [[phi.T @ phi + lam * np.eye(n), phi.T @ ones], [ones.T @ phi, np.array([[float(n)]])]]
    )
    rhs = np.vstack([phi.T @ y, ones.T @ y])
    oracle = np.linalg.solve(lhs, rhs)
    weight_dev = float(np.abs(model10.weights - oracle).max())

    ok = residual <= 1e-6 and weight_dev <= 1e-6
    report(
        9,
        ok,
        f"zero-ridge residual {residual:.2e} m (tol 1e-6), ridge weight deviation "
        f"{weight_dev:.2e} (tol 1e-6)",
    )


def test_criterion_10_cli_byte_determinism(tmp_path, capsys):
    specs = [
        ("evaluate", ["evaluate", "--scenario", "hall", "--method", "3NNF,KNN(2)",
                      "--m", "12", "--seed", "3", "--n-test", "4"], "metrics.csv"),
        ("sweep", ["sweep", "--scenario", "hall", "--method", "KNN(2)",
                   "--m", "12,20", "--seeds", "2", "--n-test", "2"], "sweep.csv"),
        ("segstudy", ["segstudy", "--seeds", "2"], "segstudy_outcomes.csv"),
    ]
    identical = []
    for name, args, artifact in specs:
        outputs = []
        for run in ("one", "two"):
            out = tmp_path / name / run
            assert cli_main(args + ["--out", str(out)]) == 0
            outputs.append((out / artifact).read_bytes())
        identical.append(outputs[0] == outputs[1])
    capsys.readouterr()  # keep subcommand chatter out of the scorecard
    ok = all(identical)
    detail = ", ".join(
        f"{name}: {'identical' if same else 'DIFFERS'}"
        for (name, _, _), same in zip(specs, identical)
    )
    report(10, ok, detail)
