"""JSON (de)serialization for matrices, states, and channels.

Complex matrices serialize as nested arrays of [re, im] pairs:

    {"dim": 2, "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}

Channels use the block schema

    {"dim": n, "basis": matrix-or-"identity",
     "blocks": [{"dA": int, "dB": int, "tau": matrix}, ...]}

or a named shortcut such as {"kind": "dephaser", "dim": 2}.
"""

from __future__ import annotations

import json

import numpy as np

from .channels import Block, DestructionChannel, standard_channel
from .errors import ParseError
from .linalg import check_density, check_effect

INF_TOKEN = "inf"


def matrix_to_json(m: np.ndarray) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"matrix payload is not numeric: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError(
            f"matrix payload must be square nested [re, im] pairs, got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(rho: np.ndarray) -> dict:
    return {"dim": int(rho.shape[0]), "matrix": matrix_to_json(rho)}


def state_from_json(data: dict) -> np.ndarray:
    if not isinstance(data, dict) or "matrix" not in data:
        raise ParseError("state JSON must be an object with a 'matrix' field")
    m = matrix_from_json(data["matrix"])
    if "dim" in data and int(data["dim"]) != m.shape[0]:
        raise ParseError("state 'dim' does not match the matrix size")
    return check_density(m)


def effect_from_json(data: dict) -> np.ndarray:
    if not isinstance(data, dict) or "matrix" not in data:
        raise ParseError("effect JSON must be an object with a 'matrix' field")
    return check_effect(matrix_from_json(data["matrix"]))


def channel_to_json(ch: DestructionChannel) -> dict:
    basis: object = "identity"
    if not np.allclose(ch.basis, np.eye(ch.dim), atol=1e-14):
        basis = matrix_to_json(ch.basis)
    return {
        "dim": ch.dim,
        "basis": basis,
        "blocks": [
            {"dA": b.d_a, "dB": b.d_b, "tau": matrix_to_json(b.tau)} for b in ch.blocks
        ],
    }


def channel_from_json(data: dict) -> DestructionChannel:
    if not isinstance(data, dict):
        raise ParseError("channel JSON must be an object")
    if "kind" in data:
        params = {k: v for k, v in data.items() if k != "kind"}
        for key in ("gamma", "gamma_a"):
            if key in params:
                params[key] = matrix_from_json(params[key])
        if "gamma_a" in params:
            params["gamma"] = params.pop("gamma_a")
        if "basis" in params and params["basis"] != "identity":
            params["basis"] = matrix_from_json(params["basis"])
        elif params.get("basis") == "identity":
            params.pop("basis")
        if "shape" in params:
            params["shape"] = [(int(p[0]), int(p[1])) for p in params["shape"]]
        return standard_channel(data["kind"], **params)
    for key in ("dim", "blocks"):
        if key not in data:
            raise ParseError(f"channel JSON missing field {key!r}")
    dim = int(data["dim"])
    basis = data.get("basis", "identity")
    u = np.eye(dim, dtype=complex) if basis == "identity" else matrix_from_json(basis)
    blocks = []
    for item in data["blocks"]:
        try:
            blocks.append(
                Block(int(item["dA"]), int(item["dB"]), matrix_from_json(item["tau"]))
            )
        except KeyError as exc:
            raise ParseError(f"channel block missing field {exc}") from exc
    return DestructionChannel(dim, u, tuple(blocks))


def load_json_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc


def dump_json(data, path: str | None = None) -> str:
    """Deterministic JSON emission; +-inf becomes the string "inf"."""

    def default(o):
        if isinstance(o, np.ndarray):
            return matrix_to_json(o)
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(f"cannot serialize {type(o)}")

    def sanitize(o):
        if isinstance(o, float) and np.isinf(o):
            return INF_TOKEN if o > 0 else "-" + INF_TOKEN
        if isinstance(o, dict):
            return {k: sanitize(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [sanitize(v) for v in o]
        return o

    text = json.dumps(sanitize(data), indent=2, sort_keys=True, default=default)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
