"""JSON (de)serialization for MPS and MPU tensors (the CLI model format)."""

import json

import numpy as np

from .errors import ConfigError
from .mps import UniformMPS
from .mpu import MPUTensor


def _pack(arr):
    return {"re": np.real(arr).tolist(), "im": np.imag(arr).tolist()}


def _unpack(d):
    return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)


def mps_to_json(mps):
    return {"kind": "mps", "phys_dim": mps.phys_dim, "bond_dim": mps.bond_dim,
            "canonical": bool(mps.canonical_flag), "tensors": _pack(mps.tensors)}


def mps_from_json(data):
    if data.get("kind") != "mps":
        raise ConfigError("not an MPS record")
    return UniformMPS(_unpack(data["tensors"]),
                      canonical_flag=bool(data.get("canonical", False)))


def mpu_to_json(mpu):
    return {"kind": "mpu", "phys_dim": mpu.phys_dim, "bond_dim": mpu.bond_dim,
            "tensors": _pack(mpu.tensors)}


def mpu_from_json(data):
    if data.get("kind") != "mpu":
        raise ConfigError("not an MPU record")
    return MPUTensor(_unpack(data["tensors"]))


def save_model(path, obj):
    if isinstance(obj, UniformMPS):
        data = mps_to_json(obj)
    elif isinstance(obj, MPUTensor):
        data = mpu_to_json(obj)
    else:
        raise ConfigError(f"cannot serialize {type(obj).__name__}")
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_model(path):
    with open(path) as fh:
        data = json.load(fh)
    kind = data.get("kind")
    if kind == "mps":
        return mps_from_json(data)
    if kind == "mpu":
        return mpu_from_json(data)
    raise ConfigError(f"unknown model kind {kind!r}")
