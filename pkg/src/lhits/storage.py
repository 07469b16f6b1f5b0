"""Bit-exact on-disk formats for datasets and trained models, plus report
writers. All multi-byte fields are little-endian regardless of platform and
files are written atomically (temp + rename)."""

from __future__ import annotations

import csv
import io
import json
import os
import struct

import numpy as np

from .coders import Autoencoder, IdentityCoder
from .coupling import CouplingPlan
from .data import Normalizer, TrajectorySet
from .errors import FormatError
from .forecasting import HierarchicalForecaster
from .nets import Mlp
from .steppers import ResNetStepper, StepperBank

DATASET_MAGIC = b"LHTS"
MODEL_MAGIC = b"LHTM"
FORMAT_VERSION = 1
_SYSTEM_BYTES = {"fhn": 0, "ks": 1, "synthetic": 2}
_SYSTEM_NAMES = {v: k for k, v in _SYSTEM_BYTES.items()}


def _atomic_write(path, payload: bytes) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _read_exact(fh, count: int, what: str, offset: int) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise FormatError(f"truncated file: expected {count} bytes for {what} "
                          f"at offset {offset}, got {len(data)}")
    return data


# ---------------------------------------------------------------------------
# Dataset files: magic, version, p/T/n u64, dt f64, system byte, f64 payload
# ---------------------------------------------------------------------------

def save_dataset(path, ts: TrajectorySet) -> None:
    p, t, n = ts.data.shape
    header = DATASET_MAGIC + struct.pack("<BQQQdB", FORMAT_VERSION, p, t, n,
                                         ts.dt, _SYSTEM_BYTES[ts.system])
    payload = np.ascontiguousarray(ts.data, dtype="<f8").tobytes()
    _atomic_write(path, header + payload)


def load_dataset(path) -> TrajectorySet:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic", 0)
        if magic != DATASET_MAGIC:
            raise FormatError(f"bad magic {magic!r} at offset 0, expected {DATASET_MAGIC!r}")
        fixed = _read_exact(fh, struct.calcsize("<BQQQdB"), "header", 4)
        version, p, t, n, dt, tag = struct.unpack("<BQQQdB", fixed)
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported dataset version {version} at offset 4")
        if tag not in _SYSTEM_NAMES:
            raise FormatError(f"unknown system tag byte {tag} at offset 37")
        payload_offset = 4 + len(fixed)
        expected = p * t * n * 8
        payload = fh.read()
        if len(payload) != expected:
            raise FormatError(
                f"payload at offset {payload_offset} has {len(payload)} bytes, "
                f"expected {expected}")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(p, t, n)
    return TrajectorySet(data, dt, _SYSTEM_NAMES[tag])


# ---------------------------------------------------------------------------
# Model files: magic, version, u64 JSON length, JSON header, f64 weight blob
# ---------------------------------------------------------------------------

def _mlp_arrays(net: Mlp) -> list[np.ndarray]:
    return net.parameters()


def _model_arrays(model: HierarchicalForecaster) -> list[np.ndarray]:
    """Every float array of the model, in the declared serialization order:
    bank steppers (descending step order, weights then biases per layer),
    then encoder, then decoder."""
    arrays = []
    for stepper in model.bank_.steppers:
        arrays.extend(_mlp_arrays(stepper.body_))
    if isinstance(model.coder_, Autoencoder):
        arrays.extend(_mlp_arrays(model.coder_.encoder_))
        arrays.extend(_mlp_arrays(model.coder_.decoder_))
    return arrays


def save_model(path, model: HierarchicalForecaster,
               config_fingerprint: str = "") -> None:
    if not hasattr(model, "bank_"):
        raise FormatError("model is not fitted; nothing to save")
    is_ae = isinstance(model.coder_, Autoencoder)
    header = {
        "system": model.system_,
        "dt": model.dt_,
        "state_dim": model.state_dim_,
        "coder": "autoencoder" if is_ae else "identity",
        "activation": model.coder_.encoder_.activation if is_ae else "relu",
        "encoder_dims": model.coder_.encoder_.layer_dims if is_ae else None,
        "decoder_dims": model.coder_.decoder_.layer_dims if is_ae else None,
        "step_multiples": list(model.bank_.step_multiples),
        "stepper_dims": [s.body_.layer_dims for s in model.bank_.steppers],
        "stepper_activation": model.bank_.steppers[0].body_.activation,
        "plan": {"active_indices": list(model.plan_.active_indices),
                 "interpolant": model.plan_.interpolant,
                 "horizon": model.plan_.horizon},
        "normalizer": {"mode": model.normalizer_.mode,
                       "means": model.normalizer_.means_.tolist(),
                       "stds": model.normalizer_.stds_.tolist()},
        "seed": int(model.seed),
        "config_fingerprint": config_fingerprint,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    blob = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes()
                    for a in _model_arrays(model))
    payload = (MODEL_MAGIC + struct.pack("<BQ", FORMAT_VERSION, len(header_bytes))
               + header_bytes + blob)
    _atomic_write(path, payload)


def _take_mlp(buf: memoryview, offset: int, dims, activation: str):
    weights, biases = [], []
    for din, dout in zip(dims[:-1], dims[1:]):
        count = din * dout * 8
        weights.append(np.frombuffer(buf[offset:offset + count], dtype="<f8")
                       .astype(np.float64).reshape(din, dout))
        offset += count
        count = dout * 8
        biases.append(np.frombuffer(buf[offset:offset + count], dtype="<f8")
                      .astype(np.float64))
        offset += count
    return Mlp(dims, weights, biases, activation=activation), offset


def load_model(path) -> HierarchicalForecaster:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic", 0)
        if magic != MODEL_MAGIC:
            raise FormatError(f"bad magic {magic!r} at offset 0, expected {MODEL_MAGIC!r}")
        fixed = _read_exact(fh, struct.calcsize("<BQ"), "header length", 4)
        version, header_len = struct.unpack("<BQ", fixed)
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported model version {version} at offset 4")
        header_bytes = _read_exact(fh, header_len, "JSON header", 4 + len(fixed))
        blob = fh.read()
    try:
        header = json.loads(header_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable JSON header: {exc}") from exc

    expected = 0
    for dims in header["stepper_dims"]:
        expected += sum(din * dout + dout for din, dout in zip(dims[:-1], dims[1:])) * 8
    if header["coder"] == "autoencoder":
        for dims in (header["encoder_dims"], header["decoder_dims"]):
            expected += sum(din * dout + dout for din, dout in zip(dims[:-1], dims[1:])) * 8
    blob_offset = 4 + struct.calcsize("<BQ") + header_len
    if len(blob) != expected:
        raise FormatError(
            f"weight blob at offset {blob_offset} has {len(blob)} bytes but the "
            f"header dims require {expected}")

    buf = memoryview(blob)
    offset = 0
    steppers = []
    for s, dims in zip(header["step_multiples"], header["stepper_dims"]):
        body, offset = _take_mlp(buf, offset, dims, header["stepper_activation"])
        if body.input_dim != body.output_dim:
            raise FormatError(f"stepper dims {dims} are not a self-map")
        stepper = ResNetStepper(step_multiple=int(s), hidden=tuple(dims[1:-1]),
                                activation=header["stepper_activation"],
                                seed=header["seed"])
        stepper.set_body(body)
        steppers.append(stepper)
    bank = StepperBank(steppers, header["dt"])

    if header["coder"] == "autoencoder":
        encoder, offset = _take_mlp(buf, offset, header["encoder_dims"],
                                    header["activation"])
        decoder, offset = _take_mlp(buf, offset, header["decoder_dims"],
                                    header["activation"])
        coder = Autoencoder(latent_dim=encoder.output_dim,
                            hidden=tuple(header["encoder_dims"][1:-1]),
                            activation=header["activation"], seed=header["seed"])
        coder.encoder_ = encoder
        coder.decoder_ = decoder
        coder.loss_history_ = []
        coder.n_features_in_ = encoder.input_dim
        if encoder.output_dim != bank.latent_dim:
            raise FormatError(
                f"encoder latent dimension {encoder.output_dim} does not match "
                f"the stepper bank dimension {bank.latent_dim}")
    else:
        coder = IdentityCoder()
        coder.n_features_in_ = header["state_dim"]
        if header["state_dim"] != bank.latent_dim:
            raise FormatError(
                f"identity coder state dimension {header['state_dim']} does not "
                f"match the stepper bank dimension {bank.latent_dim}")

    norm_info = header["normalizer"]
    normalizer = Normalizer(mode=norm_info["mode"])
    normalizer.means_ = np.asarray(norm_info["means"], dtype=np.float64)
    normalizer.stds_ = np.asarray(norm_info["stds"], dtype=np.float64)
    normalizer.n_features_in_ = header["state_dim"]

    model = HierarchicalForecaster(
        coder=header["coder"],
        latent_dim=bank.latent_dim,
        step_multiples=tuple(header["step_multiples"]),
        interpolant=header["plan"]["interpolant"],
        seed=header["seed"])
    model.normalizer_ = normalizer
    model.coder_ = coder
    model.bank_ = bank
    model.plan_ = CouplingPlan(tuple(header["plan"]["active_indices"]),
                               interpolant=header["plan"]["interpolant"],
                               horizon=int(header["plan"]["horizon"]))
    model.state_dim_ = int(header["state_dim"])
    model.dt_ = float(header["dt"])
    model.system_ = header["system"]
    model.config_fingerprint_ = header.get("config_fingerprint", "")
    return model


# ---------------------------------------------------------------------------
# Report output: CSV with a header row plus a JSON mirror
# ---------------------------------------------------------------------------

def write_report_csv(path, rows: list[dict], columns: list[str]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in columns})
    _atomic_write(path, buf.getvalue().encode("utf-8"))


def write_report_json(path, payload) -> None:
    _atomic_write(path, (json.dumps(payload, indent=2, sort_keys=True) + "\n")
                  .encode("utf-8"))
