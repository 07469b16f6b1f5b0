"""Bit-exact round trips, corruption guards, and configuration parsing."""

import json

import numpy as np
import pytest

from lhits.config import apply_overrides, parse_config
from lhits.data import TrajectorySet
from lhits.errors import ConfigError, FormatError
from lhits.storage import (DATASET_MAGIC, load_dataset, load_model,
                           save_dataset, save_model, write_report_csv)


class TestDatasetFiles:
    def test_round_trip_is_bit_exact(self, rng, tmp_path):
        ts = TrajectorySet(rng.normal(size=(2, 3, 4)), 0.25, "synthetic")
        path = tmp_path / "d.lhts"
        save_dataset(path, ts)
        back = load_dataset(path)
        assert np.array_equal(back.data, ts.data)
        assert back.dt == ts.dt and back.system == ts.system

    def test_full_scale_header_fields(self, rng, tmp_path):
        # the flagship full-scale file: 4 trajectories x 5120 steps x 202 dims
        ts = TrajectorySet(np.zeros((4, 5120, 202)), 0.01, "fhn")
        path = tmp_path / "full.lhts"
        save_dataset(path, ts)
        import struct
        with open(path, "rb") as fh:
            assert fh.read(4) == DATASET_MAGIC
            version, p, t, n, dt, tag = struct.unpack("<BQQQdB",
                                                      fh.read(struct.calcsize("<BQQQdB")))
        assert (version, p, t, n, dt, tag) == (1, 4, 5120, 202, 0.01, 0)

    def test_truncated_payload_rejected_without_partial_value(self, rng, tmp_path):
        ts = TrajectorySet(rng.normal(size=(1, 4, 3)), 0.1, "ks")
        path = tmp_path / "t.lhts"
        save_dataset(path, ts)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(FormatError, match="offset"):
            load_dataset(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.lhts"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(FormatError, match="magic"):
            load_dataset(path)

    def test_random_round_trips(self, rng, tmp_path):
        for i in range(5):
            shape = tuple(int(rng.integers(1, 5)) for _ in range(3))
            ts = TrajectorySet(rng.normal(size=shape), float(rng.uniform(0.01, 1)),
                               "synthetic")
            path = tmp_path / f"r{i}.lhts"
            save_dataset(path, ts)
            back = load_dataset(path)
            assert np.array_equal(back.data, ts.data)
            assert back.dt == ts.dt


def tiny_fitted_model(rng, coder="autoencoder"):
    from lhits.forecasting import HierarchicalForecaster
    data = rng.normal(size=(3, 40, 6)) * 0.1
    data[:, :, 3] = 1.5  # exercise the constant-feature guard
    ts = TrajectorySet(data, 0.1, "synthetic")
    train, val, test = ts.split(1, 1, 1)
    model = HierarchicalForecaster(
        coder=coder, latent_dim=2, ae_hidden=(8,), ae_epochs=10,
        stepper_hidden=(6,), stepper_epochs=10, step_multiples=(1, 2, 4),
        batch_size=8, seed=4).fit(train, val)
    return model, test


class TestModelFiles:
    def test_round_trip_predictions_bit_identical(self, rng, tmp_path):
        model, test = tiny_fitted_model(rng)
        path = tmp_path / "m.lhtm"
        save_model(path, model, config_fingerprint="abc123")
        back = load_model(path)
        x0 = test.data[0, 0]
        assert np.array_equal(model.predict(x0, 20), back.predict(x0, 20))
        assert back.config_fingerprint_ == "abc123"
        assert back.plan_ == model.plan_

    def test_identity_coder_round_trip_preserves_flag(self, rng, tmp_path):
        model, test = tiny_fitted_model(rng, coder="identity")
        path = tmp_path / "id.lhtm"
        save_model(path, model)
        back = load_model(path)
        assert back.coder == "identity"
        x0 = test.data[0, 0]
        assert np.array_equal(model.predict(x0, 10), back.predict(x0, 10))

    def test_header_dims_must_match_blob(self, rng, tmp_path):
        model, _ = tiny_fitted_model(rng)
        path = tmp_path / "m.lhtm"
        save_model(path, model)
        import struct
        raw = bytearray(path.read_bytes())
        header_len = struct.unpack("<Q", raw[5:13])[0]
        header = json.loads(raw[13:13 + header_len].decode())
        header["stepper_dims"][0][1] += 1  # corrupt a width
        new_header = json.dumps(header, sort_keys=True).encode()
        rebuilt = raw[:5] + struct.pack("<Q", len(new_header)) + new_header \
            + raw[13 + header_len:]
        path.write_bytes(bytes(rebuilt))
        with pytest.raises(FormatError, match="blob"):
            load_model(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.lhtm"
        path.write_bytes(b"WHAT" + b"\x00" * 32)
        with pytest.raises(FormatError, match="magic"):
            load_model(path)


class TestReports:
    def test_csv_has_header_and_rows(self, tmp_path):
        path = tmp_path / "r.csv"
        write_report_csv(path, [{"a": 1, "b": 2.5}, {"a": 3, "b": 4.5}],
                         ["a", "b"])
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b"
        assert lines[1] == "1,2.5"
        assert len(lines) == 3


class TestConfig:
    def test_defaults_from_empty_optional_section(self):
        cfg = parse_config({"system": "fhn"})
        assert cfg.batch_size == 32
        assert cfg.learning_rate == pytest.approx(1e-3)
        assert cfg.activation == "relu"
        assert cfg.ae_epochs == 5000
        assert cfg.stepper_epochs == 20000
        assert cfg.latent_dim == 2
        assert cfg.ae_hidden == [100, 100, 100]
        assert cfg.stepper_hidden == [128] * 6

    def test_ks_defaults(self):
        cfg = parse_config({"system": "ks"})
        assert cfg.grid_points == 120
        assert cfg.domain_length == pytest.approx(22.0)
        assert cfg.dt == pytest.approx(0.05)
        assert cfg.time_steps == 5121
        assert cfg.stepper_hidden == [1024, 1024, 1024]
        assert cfg.ae_hidden == [120, 120, 100]
        assert cfg.latent_dim == 8
        assert (cfg.train_trajectories, cfg.val_trajectories,
                cfg.test_trajectories) == (10, 5, 5)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            parse_config({"system": "fhn", "mystery_knob": 1})

    def test_missing_system_rejected(self):
        with pytest.raises(ConfigError, match="system"):
            parse_config({})

    def test_latent_dim_must_be_below_state_dim(self):
        with pytest.raises(ConfigError, match="latent_dim"):
            parse_config({"system": "fhn", "grid_points": 5, "latent_dim": 10})

    def test_non_power_of_two_step_rejected(self):
        with pytest.raises(ConfigError, match="power of two"):
            parse_config({"system": "fhn", "step_multiples": [1, 3]})

    def test_overrides(self):
        cfg = parse_config({"system": "fhn"}, overrides=["stepper_epochs=2000",
                                                         "z_list=[1,2,8]"])
        assert cfg.stepper_epochs == 2000
        assert cfg.z_list == [1, 2, 8]

    def test_override_format_checked(self):
        with pytest.raises(ConfigError, match="key=value"):
            apply_overrides({}, ["oops"])

    def test_fingerprint_stable_and_sensitive(self):
        a = parse_config({"system": "fhn"})
        b = parse_config({"system": "fhn"})
        c = parse_config({"system": "fhn", "seed": 1})
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != c.fingerprint()

    def test_json_text_and_file_sources(self, tmp_path):
        text = json.dumps({"system": "ks", "seed": 3})
        cfg = parse_config(text)
        assert cfg.seed == 3
        path = tmp_path / "cfg.json"
        path.write_text(text)
        cfg2 = parse_config(path)
        assert cfg2.fingerprint() == cfg.fingerprint()
