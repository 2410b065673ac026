"""Shared fixtures: a tiny hand-built database plus noise-free scenarios."""

import dataclasses

import pytest

import rsslocate as rl

# two well-separated clusters of three points each; readings chosen so
# cluster features are disjoint per beacon and easy to verify by hand
CLUSTER_READINGS = {
    "r1": ((0.0, 0.0), {"b1": 50.0, "b2": 20.0}),
    "r2": ((1.0, 0.0), {"b1": 48.0, "b2": 22.0}),
    "r3": ((0.0, 1.0), {"b1": 46.0, "b2": 24.0}),
    "r4": ((9.0, 9.0), {"b1": 20.0, "b2": 50.0}),
    "r5": ((10.0, 9.0), {"b1": 22.0, "b2": 48.0}),
    "r6": ((9.0, 10.0), {"b1": 24.0, "b2": 46.0}),
}

LEFT_RECT = rl.Rect(-0.5, -0.5, 1.5, 1.5)
RIGHT_RECT = rl.Rect(8.5, 8.5, 10.5, 10.5)


def build_cluster_db() -> rl.FingerprintDatabase:
    points = [
        rl.ReferencePoint(rid, pos, rl.RssVector(dict(readings)))
        for rid, (pos, readings) in CLUSTER_READINGS.items()
    ]
    return rl.FingerprintDatabase(
        beacons=[rl.BeaconNode("b1", (0.0, 0.0)), rl.BeaconNode("b2", (10.0, 10.0))],
        reference_points=points,
        bounds=rl.Rect(-1.0, -1.0, 11.0, 11.0),
    )


@pytest.fixture
def cluster_db():
    return build_cluster_db()


@pytest.fixture
def segmented_cluster_db():
    db = build_cluster_db()
    rl.partition_manual(db, [LEFT_RECT, RIGHT_RECT])
    return db


def quiet(scenario: rl.Scenario) -> rl.Scenario:
    """Same scenario with shadowing switched off."""
    return dataclasses.replace(
        scenario,
        propagation=dataclasses.replace(scenario.propagation, shadowing_sigma=0.0),
    )


@pytest.fixture(scope="session")
def hall():
    return rl.preset_hall()


@pytest.fixture(scope="session")
def hall_quiet():
    return quiet(rl.preset_hall())


@pytest.fixture(scope="session")
def office():
    return rl.preset_office()


@pytest.fixture(scope="session")
def hall_quiet_db(hall_quiet):
    """Surveyed and manually partitioned noise-free hall; treat as read-only."""
    db = rl.survey(hall_quiet, seed=0)
    rl.partition_manual(db, hall_quiet.regions)
    return db
