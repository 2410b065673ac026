import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import rsslocate as rl

readings_st = st.dictionaries(
    st.sampled_from(["b1", "b2", "b3", "b4"]),
    st.floats(0.0, 100.0),
    min_size=1,
)


class TestRssVector:
    def test_basic_access(self):
        v = rl.RssVector({"b1": 40.0, "b2": 55.5})
        assert v["b1"] == 40.0
        assert "b2" in v and "b9" not in v
        assert len(v) == 2
        assert v.beacons == frozenset({"b1", "b2"})

    def test_rejects_negative_and_non_finite(self):
        with pytest.raises(rl.InvalidInputError):
            rl.RssVector({"b1": -1.0})
        with pytest.raises(rl.InvalidInputError):
            rl.RssVector({"b1": math.nan})

    def test_rejects_empty(self):
        with pytest.raises(rl.InvalidInputError):
            rl.RssVector({})

    def test_values_coerced_to_float(self):
        v = rl.RssVector({"b1": 40})
        assert isinstance(v["b1"], float)


class TestAverageSamples:
    def test_plain_mean_per_beacon(self):
        batch = rl.RawSampleBatch((0.0, 0.0), {"b1": (10.0, 20.0, 30.0), "b2": (5.0,)})
        v = rl.average_samples(batch)
        assert v["b1"] == pytest.approx(20.0)
        assert v["b2"] == 5.0

    def test_empty_batch_rejected(self):
        with pytest.raises(rl.InvalidInputError):
            rl.average_samples(rl.RawSampleBatch((0.0, 0.0), {}))

    @given(st.floats(0.0, 100.0), st.integers(1, 12))
    def test_identical_samples_average_bit_exactly(self, value, n):
        # sum-then-divide may drift an ulp; identical draws must not
        batch = rl.RawSampleBatch((0.0, 0.0), {"b1": (value,) * n})
        assert rl.average_samples(batch)["b1"] == value


class TestRssDistance:
    def test_hand_computed(self):
        a = rl.RssVector({"b1": 10.0, "b2": 20.0, "b3": 99.0})
        b = rl.RssVector({"b1": 13.0, "b2": 16.0})
        # only shared beacons enter: sqrt(3^2 + 4^2) = 5
        assert rl.rss_distance(a, b) == pytest.approx(5.0)

    def test_no_shared_beacons(self):
        a = rl.RssVector({"b1": 10.0})
        b = rl.RssVector({"b2": 10.0})
        with pytest.raises(rl.NoOverlapError):
            rl.rss_distance(a, b)

    @given(readings_st, readings_st)
    def test_matches_brute_force(self, ra, rb):
        a, b = rl.RssVector(ra), rl.RssVector(rb)
        shared = set(ra) & set(rb)
        if not shared:
            with pytest.raises(rl.NoOverlapError):
                rl.rss_distance(a, b)
            return
        expected = math.sqrt(sum((ra[k] - rb[k]) ** 2 for k in shared))
        assert rl.rss_distance(a, b) == pytest.approx(expected, abs=1e-12)

    @given(readings_st, readings_st)
    def test_symmetric(self, ra, rb):
        # summation order may differ between directions, so allow rounding slack
        if not set(ra) & set(rb):
            return
        a, b = rl.RssVector(ra), rl.RssVector(rb)
        assert rl.rss_distance(a, b) == pytest.approx(rl.rss_distance(b, a), abs=1e-9)

    @given(readings_st)
    def test_self_distance_zero(self, ra):
        v = rl.RssVector(ra)
        assert rl.rss_distance(v, v) == 0.0


class TestCommonBeacons:
    def test_intersection(self):
        a = rl.RssVector({"b1": 1.0, "b2": 2.0})
        b = rl.RssVector({"b2": 3.0, "b3": 4.0})
        assert rl.common_beacons(a, b) == {"b2"}


class TestFeatureSet:
    def test_interval_order_enforced(self):
        with pytest.raises(rl.InvalidInputError):
            rl.FeatureSet({"b1": (5.0, 4.0)})

    def test_beacons(self):
        f = rl.FeatureSet({"b1": (1.0, 2.0), "b2": (0.0, 0.0)})
        assert f.beacons == frozenset({"b1", "b2"})


class TestFingerprintDatabase:
    def test_add_reference_point_assigns_ids(self, cluster_db):
        batch = rl.RawSampleBatch((5.0, 5.0), {"b1": (30.0, 32.0)})
        rid = cluster_db.add_reference_point((5.0, 5.0), batch)
        rp = cluster_db.get_reference_point(rid)
        assert rp.position == (5.0, 5.0)
        assert rp.vector["b1"] == pytest.approx(31.0)
        assert rp.subarea is None

    def test_duplicate_position_conflicts(self, cluster_db):
        batch = rl.RawSampleBatch((0.0, 0.0), {"b1": (30.0,)})
        with pytest.raises(rl.ConflictError):
            cluster_db.add_reference_point((0.0, 0.0), batch)

    def test_out_of_bounds_rejected(self, cluster_db):
        batch = rl.RawSampleBatch((50.0, 50.0), {"b1": (30.0,)})
        with pytest.raises(rl.InvalidInputError):
            cluster_db.add_reference_point((50.0, 50.0), batch)

    def test_lookup_missing_raises_keyerror(self, cluster_db):
        with pytest.raises(KeyError):
            cluster_db.get_reference_point("nope")
        with pytest.raises(KeyError):
            cluster_db.get_subarea("nope")

    def test_members_of(self, segmented_cluster_db):
        ids = {rp.id for rp in segmented_cluster_db.members_of("A1")}
        assert ids == {"r1", "r2", "r3"}

    def test_snapshot_is_independent(self, segmented_cluster_db):
        snap = segmented_cluster_db.snapshot()
        assert snap == segmented_cluster_db
        snap.reference_points[0].subarea = "elsewhere"
        assert segmented_cluster_db.get_reference_point("r1").subarea == "A1"

    def test_validate_catches_dangling_subarea(self, cluster_db):
        cluster_db.reference_points[0].subarea = "ghost"
        with pytest.raises(rl.InvalidInputError):
            cluster_db.validate()

    def test_validate_catches_duplicate_positions(self, cluster_db):
        cluster_db.reference_points[1].position = (0.0, 0.0)
        with pytest.raises(rl.InvalidInputError):
            cluster_db.validate()

    def test_value_equality(self, cluster_db):
        assert cluster_db == cluster_db.snapshot()
        other = cluster_db.snapshot()
        other.reference_points[0].subarea = "A9"
        assert cluster_db != other


class TestErrorHierarchy:
    def test_invalid_input_is_value_error(self):
        assert issubclass(rl.InvalidInputError, ValueError)
        assert issubclass(rl.InvalidInputError, rl.LocalizationError)

    def test_stale_state_is_conflict(self):
        assert issubclass(rl.StaleStateError, rl.ConflictError)

    def test_version_error_is_format_error(self):
        assert issubclass(rl.VersionError, rl.DatabaseFormatError)
        assert issubclass(rl.DatabaseFormatError, ValueError)

    def test_all_share_base(self):
        for exc in (
            rl.InvalidInputError,
            rl.NoOverlapError,
            rl.ConflictError,
            rl.UnlocatableError,
            rl.DatabaseFormatError,
            rl.NumericalError,
        ):
            assert issubclass(exc, rl.LocalizationError)
