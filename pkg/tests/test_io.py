import json

import pytest

import rsslocate as rl
from rsslocate.core import FORMAT_VERSION


class TestDatabaseRoundTrip:
    def test_value_equality(self, segmented_cluster_db):
        text = rl.dumps_database(segmented_cluster_db)
        assert rl.loads_database(text) == segmented_cluster_db

    def test_serialization_is_deterministic(self, segmented_cluster_db):
        a = rl.dumps_database(segmented_cluster_db)
        b = rl.dumps_database(rl.loads_database(a))
        assert a == b

    def test_file_round_trip(self, segmented_cluster_db, tmp_path):
        path = tmp_path / "db.json"
        rl.save_database(segmented_cluster_db, path)
        assert rl.load_database(path) == segmented_cluster_db
        # saving the loaded copy writes identical bytes
        again = tmp_path / "again.json"
        rl.save_database(rl.load_database(path), again)
        assert path.read_bytes() == again.read_bytes()

    def test_subarea_assignments_survive(self, segmented_cluster_db):
        loaded = rl.loads_database(rl.dumps_database(segmented_cluster_db))
        assert loaded.get_reference_point("r1").subarea == "A1"
        assert loaded.get_subarea("A2").feature == segmented_cluster_db.get_subarea("A2").feature

    def test_survey_database_round_trips(self, hall_quiet_db):
        loaded = rl.loads_database(rl.dumps_database(hall_quiet_db))
        assert loaded == hall_quiet_db


class TestMalformedInput:
    def test_invalid_json_names_location(self):
        with pytest.raises(rl.DatabaseFormatError, match="line 1"):
            rl.loads_database("{nope")

    def test_top_level_must_be_object(self):
        with pytest.raises(rl.DatabaseFormatError, match="top level"):
            rl.loads_database("[1, 2]")

    def test_missing_version(self):
        with pytest.raises(rl.DatabaseFormatError, match="version"):
            rl.loads_database("{}")

    def test_wrong_version(self, cluster_db):
        doc = json.loads(rl.dumps_database(cluster_db))
        doc["version"] = 999
        with pytest.raises(rl.VersionError):
            rl.loads_database(json.dumps(doc))

    def test_version_error_is_format_error(self, cluster_db):
        doc = json.loads(rl.dumps_database(cluster_db))
        doc["version"] = "bogus"
        with pytest.raises(rl.DatabaseFormatError):
            rl.loads_database(json.dumps(doc))

    def test_bad_reading_diagnostic_names_field(self, cluster_db):
        doc = json.loads(rl.dumps_database(cluster_db))
        doc["reference_points"][0]["readings"]["b1"] = "loud"
        with pytest.raises(rl.DatabaseFormatError, match="expected a number"):
            rl.loads_database(json.dumps(doc))

    def test_missing_point_field(self, cluster_db):
        doc = json.loads(rl.dumps_database(cluster_db))
        del doc["reference_points"][0]["x"]
        with pytest.raises(rl.DatabaseFormatError, match="missing field"):
            rl.loads_database(json.dumps(doc))

    def test_format_version_constant_round_trips(self, cluster_db):
        doc = json.loads(rl.dumps_database(cluster_db))
        assert doc["version"] == FORMAT_VERSION


class TestSampleLines:
    def test_parse_groups_by_point(self):
        text = "\n".join(
            [
                "# survey shard 1",
                "0.0 0.0 b1 40.0",
                "0.0 0.0 b1 42.0",
                "0.0 0.0 b2 31.0",
                "1.0 0.0 b1 39.5",
                "",
            ]
        )
        batches = rl.parse_sample_lines(text)
        assert len(batches) == 2
        assert batches[0].point == (0.0, 0.0)
        assert batches[0].samples["b1"] == (40.0, 42.0)
        assert batches[1].samples == {"b1": (39.5,)}

    def test_malformed_line_rejected(self):
        with pytest.raises(rl.DatabaseFormatError, match="line 1"):
            rl.parse_sample_lines("0.0 0.0 b1")

    def test_non_numeric_rss_rejected(self):
        with pytest.raises(rl.DatabaseFormatError):
            rl.parse_sample_lines("0.0 0.0 b1 loud")

    def test_file_reader(self, tmp_path):
        p = tmp_path / "samples.txt"
        p.write_text("2.0 3.0 b7 55.0\n", encoding="utf-8")
        batches = rl.read_sample_file(p)
        assert batches[0].point == (2.0, 3.0)


class TestWalkTrace:
    def test_format_shape(self):
        steps = [
            ((0.0, 0.0), rl.RssVector({"b2": 10.0, "b1": 20.0})),
            ((1.0, 0.0), rl.RssVector({"b1": 19.0})),
        ]
        text = rl.format_walk_trace(steps)
        lines = text.splitlines()
        # beacon ids sorted within a step, steps in order
        assert lines == [
            "0 0.0 0.0 b1 20.0",
            "0 0.0 0.0 b2 10.0",
            "1 1.0 0.0 b1 19.0",
        ]
        assert text.endswith("\n")

    def test_empty_trace_is_empty_string(self):
        assert rl.format_walk_trace([]) == ""

    def test_write_reads_back(self, tmp_path):
        steps = [((0.5, 1.5), rl.RssVector({"b1": 33.25}))]
        out = tmp_path / "trace.txt"
        rl.write_walk_trace(steps, out)
        assert out.read_text(encoding="utf-8") == "0 0.5 1.5 b1 33.25\n"
