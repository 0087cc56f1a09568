"""Serialization round-trips, schema validation, and experiment specs."""

import numpy as np
import pytest

from trilat import (
    Configuration,
    DataSet,
    ExperimentSpec,
    InvalidSpec,
    MalformedInput,
    Path,
    random_configuration,
)
from trilat.io import (
    dumps_configuration,
    dumps_dataset,
    dumps_walks,
    loads_configuration,
    loads_dataset,
    loads_walks,
    read_configuration,
    read_dataset,
    write_text,
)


AWKWARD = [np.pi, 1.0 / 3.0, 1e-15 + 2.0, 12345.678901234567, 7e20]


class TestDatasetRoundTrip:
    def test_exact_values_survive(self):
        data = DataSet(2, 2, "loop", np.array(AWKWARD))
        back = loads_dataset(dumps_dataset(data))
        assert back.dim == 2 and back.bound == 2 and back.mode == "loop"
        assert np.array_equal(back.values, data.values)  # bit-for-bit

    def test_serialization_is_deterministic(self, rng):
        data = DataSet(3, 1, "path", rng.uniform(0.5, 2.0, size=12))
        assert dumps_dataset(data) == dumps_dataset(data)

    def test_file_round_trip(self, tmp_path, rng):
        data = DataSet(2, 3, "loop", rng.uniform(0.5, 2.0, size=9))
        target = tmp_path / "data.json"
        write_text(target, dumps_dataset(data))
        back = read_dataset(target)
        assert np.array_equal(back.values, data.values)
        assert (back.dim, back.bound, back.mode) == (2, 3, "loop")

    @pytest.mark.parametrize(
        "text",
        [
            "{",
            "[1, 2, 3]\n",
            '{"dim": 2, "bound": 1, "mode": "loop"}\n',
            '{"dim": 2, "bound": 1, "mode": "loop", "values": [1.0], "x": 0}\n',
            '{"dim": 2, "bound": 1, "mode": "ring", "values": [1.0]}\n',
            '{"dim": 2, "bound": 1, "mode": "loop", "values": 3}\n',
            '{"dim": 2, "bound": 1, "mode": "loop", "values": ["a"]}\n',
            '{"dim": 2, "bound": 1, "mode": "loop", "values": [true]}\n',
            '{"dim": 2, "bound": 1, "mode": "loop", "values": [-1.0]}\n',
            '{"dim": 2, "bound": 1, "mode": "loop", "values": [0.0]}\n',
            '{"dim": 2.5, "bound": 1, "mode": "loop", "values": [1.0]}\n',
            '{"dim": 0, "bound": 1, "mode": "loop", "values": [1.0]}\n',
            '{"dim": 2, "bound": 0, "mode": "loop", "values": [1.0]}\n',
        ],
    )
    def test_malformed_rejected(self, text):
        with pytest.raises(MalformedInput):
            loads_dataset(text)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(MalformedInput):
            read_dataset(tmp_path / "absent.json")


class TestConfigurationRoundTrip:
    def test_exact_coordinates_survive(self, rng):
        cfg = random_configuration(6, 3, rng)
        back = loads_configuration(dumps_configuration(cfg))
        assert back.dim == 3
        assert np.array_equal(back.points, cfg.points)

    def test_file_round_trip(self, tmp_path, rng):
        cfg = random_configuration(4, 2, rng)
        target = tmp_path / "cfg.json"
        write_text(target, dumps_configuration(cfg))
        assert np.array_equal(read_configuration(target).points, cfg.points)

    @pytest.mark.parametrize(
        "text",
        [
            "not json",
            '{"dim": 2}\n',
            '{"dim": 2, "points": []}\n',
            '{"dim": 2, "points": [[1.0]]}\n',
            '{"dim": 2, "points": [[1.0, "b"]]}\n',
            '{"dim": 2, "points": [[1e999, 0.0]]}\n',
            '{"dim": 2, "points": [[true, 1.0]]}\n',
            '{"dim": "2", "points": [[0.0, 0.0]]}\n',
        ],
    )
    def test_malformed_rejected(self, text):
        with pytest.raises(MalformedInput):
            loads_configuration(text)


class TestWalksRoundTrip:
    def test_plain_paths(self):
        walks = [Path((0, 1, 0)), Path((0, 2, 3, 0)), Path((1, 4))]
        back = loads_walks(dumps_walks(walks))
        assert back == [(None, w) for w in walks]

    def test_indexed_entries(self):
        pairs = [(4, Path((0, 1, 0))), (0, Path((2, 3)))]
        back = loads_walks(dumps_walks(pairs))
        assert back == pairs

    @pytest.mark.parametrize(
        "text",
        [
            '[{"nope": [0, 1]}]',
            '[{"path": [0]}]',
            '[{"path": [0, 0, 1]}]',
            '[{"path": [0, 1.5]}]',
            '[{"path": [0, 1], "value_index": "x"}]',
            '{"path": [0, 1]}',
        ],
    )
    def test_malformed_rejected(self, text):
        with pytest.raises(MalformedInput):
            loads_walks(text)


class TestExperimentSpec:
    def test_defaults_are_valid(self):
        spec = ExperimentSpec(n=5, d=2, mode="loop")
        assert spec.extra == 0 and spec.rank_strategy == "reduced"

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=3, d=1, mode="loop"),
            dict(n=3, d=2, mode="loop"),
            dict(n=4, d=3, mode="loop"),
            dict(n=5, d=2, mode="ring"),
            dict(n=5, d=2, mode="loop", extra=-1),
            dict(n=5, d=2, mode="loop", max_hops=0),
            dict(n=5, d=2, mode="loop", tol=0.0),
            dict(n=5, d=2, mode="loop", tol=1.5),
            dict(n=5, d=2, mode="loop", rank_strategy="magic"),
        ],
    )
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(InvalidSpec):
            ExperimentSpec(**kwargs)

    def test_one_dimensional_reconstruction_refused(self):
        # the flat-line ambiguity makes d=1 unsupportable; the message
        # should say as much rather than just fail a bounds check
        with pytest.raises(InvalidSpec, match="ambiguous"):
            ExperimentSpec(n=4, d=1, mode="path")


class TestRandomConfiguration:
    def test_seed_determines_points(self):
        a = random_configuration(6, 2, np.random.default_rng(9))
        b = random_configuration(6, 2, np.random.default_rng(9))
        assert np.array_equal(a.points, b.points)

    def test_plain_integer_seed_accepted(self):
        a = random_configuration(5, 3, 123)
        b = random_configuration(5, 3, 123)
        assert np.array_equal(a.points, b.points)

    def test_points_land_in_the_unit_box(self, rng):
        cfg = random_configuration(30, 2, rng)
        assert cfg.points.min() >= 0.0 and cfg.points.max() <= 1.0
