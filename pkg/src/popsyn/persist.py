"""Model persistence: JSON manifest plus a flat little-endian float64 weight file.

The manifest records the model kind, training config, full schema, and the
layer layout of every network. Weights are concatenated in manifest order,
per layer: weight matrix (row-major) then bias vector.
"""

import json
import os

import numpy as np

from .errors import DataFormatError, StateError
from .nn import DenseLayer, Mlp
from .schema import Schema

MANIFEST_NAME = "manifest.json"
WEIGHTS_NAME = "weights.bin"
FORMAT_VERSION = 1
_DTYPE = "<f8"


def _layer_spec(layer):
    return {
        "in_width": layer.in_width,
        "out_width": layer.out_width,
        "activation": layer.activation,
        "blocks": list(layer.blocks) if layer.blocks is not None else None,
    }


def _layer_from_spec(d):
    return DenseLayer(
        d["in_width"], d["out_width"], d["activation"], blocks=d["blocks"], rng=None
    )


def save_model(directory, kind, config, schema, networks):
    """networks: ordered dict-like of name -> Mlp."""
    os.makedirs(directory, exist_ok=True)
    chunks = []
    net_specs = []
    for name, mlp in networks.items():
        net_specs.append({"name": name, "layers": [_layer_spec(l) for l in mlp.layers]})
        for layer in mlp.layers:
            chunks.append(layer.weights.ravel())
            chunks.append(layer.bias)
    flat = np.concatenate(chunks).astype(_DTYPE)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": config,
        "schema": schema.to_json_dict(),
        "schema_hash": schema.hash(),
        "networks": net_specs,
        "weights_file": WEIGHTS_NAME,
        "dtype": _DTYPE,
        "total_values": int(flat.size),
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(directory, WEIGHTS_NAME), "wb") as fh:
        fh.write(flat.tobytes())
    return manifest


def load_manifest(directory):
    path = os.path.join(directory, MANIFEST_NAME)
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise StateError(f"no model manifest at {path}") from None
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: unsupported format_version {manifest.get('format_version')!r}"
        )
    return manifest


def load_model(directory, expected_kind=None):
    """Returns (manifest, schema, dict of name -> Mlp with weights loaded)."""
    manifest = load_manifest(directory)
    if expected_kind is not None and manifest["kind"] != expected_kind:
        raise DataFormatError(
            f"model at {directory} is {manifest['kind']!r}, expected {expected_kind!r}"
        )
    schema = Schema.from_json_dict(manifest["schema"])
    if schema.hash() != manifest["schema_hash"]:
        raise DataFormatError(f"schema hash mismatch in manifest at {directory}")
    weights_path = os.path.join(directory, manifest["weights_file"])
    flat = np.fromfile(weights_path, dtype=_DTYPE).astype(np.float64)
    if flat.size != manifest["total_values"]:
        raise DataFormatError(
            f"{weights_path}: has {flat.size} values, manifest says {manifest['total_values']}"
        )
    networks = {}
    pos = 0
    for net in manifest["networks"]:
        layers = []
        for spec in net["layers"]:
            layer = _layer_from_spec(spec)
            n_w = layer.weights.size
            layer.weights[...] = flat[pos:pos + n_w].reshape(layer.weights.shape)
            pos += n_w
            n_b = layer.bias.size
            layer.bias[...] = flat[pos:pos + n_b]
            pos += n_b
            layers.append(layer)
        networks[net["name"]] = Mlp(layers)
    if pos != flat.size:
        raise DataFormatError(f"{weights_path}: trailing values beyond network layout")
    return manifest, schema, networks
