"""
Built-in models and the JSON model-file format.

A model file looks like::

    {
      "schema_version": 1,
      "states": ["C1", "C2", "O"],
      "rates": [{"from": "C1", "to": "C2", "rate": 2.0}, ...],
      "observable": ["O"]
    }

The diagonal of the generator is always derived from the listed rates.
"""
from __future__ import annotations

import json
import re

import numpy as np

from .errors import ModelFileError
from .markov import RateModel, validate_generator

__all__ = [
    "CFTR_RATES",
    "cftr",
    "chain3",
    "loop3",
    "PRESETS",
    "load_model",
    "model_from_dict",
    "model_to_dict",
]

SCHEMA_VERSION = 1

# 7-state CFTR gating scheme, column convention; states 4 and 5 conduct.
CFTR_RATES = np.array([
    [-9.9, 5.0, 0.0, 0.0, 0.0, 0.0, 1.7],
    [9.9, -12.7, 5.8, 0.0, 0.0, 0.0, 0.0],
    [0.0, 7.7, -10.7, 10.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 4.9, -17.1, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 7.1, -3.0, 7.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 3.0, -13.0, 12.8],
    [0.0, 0.0, 0.0, 0.0, 0.0, 6.0, -14.5],
])


def cftr() -> RateModel:
    return validate_generator(CFTR_RATES, [3, 4])


def chain3(a: float = 1.0, b: float = 2.0, w23: float = None) -> RateModel:
    """Chain 1 <-> 2 <-> 3 with ``w12 = w21 = a``, ``w32 = b``; state 3 observed.

    ``w23`` (rate 3 -> 2) defaults to ``b``.
    """
    c = b if w23 is None else w23
    W = np.array([
        [-a, a, 0.0],
        [a, -(a + b), c],
        [0.0, b, -c],
    ])
    return validate_generator(W, [2])


def loop3(w32: float = 1.0, w13: float = 2.0, w21: float = 1.0) -> RateModel:
    """Irreversible loop 1 -> 2 -> 3 -> 1; state 1 observed."""
    W = np.array([
        [-w21, 0.0, w13],
        [w21, -w32, 0.0],
        [0.0, w32, -w13],
    ])
    return validate_generator(W, [0])


PRESETS = {
    "cftr": (cftr, "7-state CFTR gating model, states 4 and 5 conducting"),
    "chain3": (chain3, "chain3(a,b[,w23]): symmetric 3-state chain, state 3 observed"),
    "loop3": (loop3, "loop3(w32,w13[,w21]): irreversible 3-state loop, state 1 observed"),
}

_PRESET_RE = re.compile(r"^(\w+)(?:\(([^)]*)\))?$")


def _preset(spec: str) -> RateModel:
    m = _PRESET_RE.match(spec.strip())
    if not m or m.group(1) not in PRESETS:
        raise ModelFileError(f"unknown preset {spec!r}; available: {', '.join(PRESETS)}")
    fn = PRESETS[m.group(1)][0]
    args = []
    if m.group(2):
        try:
            args = [float(x) for x in m.group(2).split(",") if x.strip()]
        except ValueError as exc:
            raise ModelFileError(f"bad preset arguments in {spec!r}") from exc
    try:
        return fn(*args)
    except TypeError as exc:
        raise ModelFileError(f"bad preset arguments in {spec!r}: {exc}") from exc


def model_from_dict(d: dict) -> RateModel:
    """Build a validated model from the parsed JSON model-file contents."""
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ModelFileError(f"unsupported schema_version {d.get('schema_version')!r}")
    try:
        states = [str(s) for s in d["states"]]
        rates = d["rates"]
        observable = [str(s) for s in d["observable"]]
    except KeyError as exc:
        raise ModelFileError(f"model file is missing {exc.args[0]!r}") from exc
    if len(set(states)) != len(states):
        raise ModelFileError("state labels must be unique")
    index = {s: i for i, s in enumerate(states)}
    W = np.zeros((len(states), len(states)))
    for r in rates:
        src, dst, k = str(r["from"]), str(r["to"]), float(r["rate"])
        if src not in index or dst not in index:
            raise ModelFileError(f"rate refers to unknown state: {r!r}")
        if src == dst:
            raise ModelFileError(f"self-transition given for {src!r}")
        if not k > 0 or not np.isfinite(k):
            raise ModelFileError(f"rates must be positive, got {k!r} for {src}->{dst}")
        if W[index[dst], index[src]] != 0:
            raise ModelFileError(f"duplicate rate {src}->{dst}")
        W[index[dst], index[src]] = k
    W -= np.diag(W.sum(axis=0))
    unknown = [s for s in observable if s not in index]
    if unknown:
        raise ModelFileError(f"observable states not declared: {unknown}")
    return validate_generator(W, [index[s] for s in observable], labels=states)


def model_to_dict(model: RateModel) -> dict:
    W = np.asarray(model.W)
    rates = [
        {"from": model.labels[i], "to": model.labels[j], "rate": float(W[j, i])}
        for i in range(model.n) for j in range(model.n)
        if i != j and W[j, i] > 0
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "states": list(model.labels),
        "rates": rates,
        "observable": [model.labels[i] for i in model.observable_set],
    }


def load_model(spec: str) -> RateModel:
    """Load ``preset:NAME[(args)]`` or a JSON model file path."""
    if spec.startswith("preset:"):
        return _preset(spec[len("preset:"):])
    try:
        with open(spec) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"cannot read model file {spec!r}: {exc}") from exc
    return model_from_dict(d)
