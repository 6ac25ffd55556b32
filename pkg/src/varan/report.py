"""Deterministic report serialization.

JSON is emitted with sorted keys and floats at 17 significant digits so
identical runs produce byte-identical files; CSV member tables round-trip
back into the exact generalized-quadratic-form set.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from typing import Optional

import numpy as np

from .errors import ReportError
from .secondorder import GeneralizedQuadraticForm

#### canonical JSON ####


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps_canonical(obj, indent: int = 0) -> str:
    """JSON text with sorted keys and 17-significant-digit floats.

    Non-finite floats become the strings "inf" / "-inf" / "nan" so the
    output stays valid JSON for any reader.
    """
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps_canonical(obj.tolist(), indent)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + dumps_canonical(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj, key=str):
            items.append(inner + json.dumps(str(key)) + ": " + dumps_canonical(obj[key], indent + 2))
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise ReportError(f"cannot serialize value of type {type(obj).__name__}")


def write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(dumps_canonical(payload) + "\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def strip_timestamps(obj):
    """Recursively drop any key named 'timestamp'."""
    if isinstance(obj, dict):
        return {k: strip_timestamps(v) for k, v in obj.items() if k != "timestamp"}
    if isinstance(obj, list):
        return [strip_timestamps(v) for v in obj]
    return obj


def reports_equal_modulo_timestamp(path_a: str, path_b: str) -> bool:
    a = strip_timestamps(read_json(path_a))
    b = strip_timestamps(read_json(path_b))
    return dumps_canonical(a) == dumps_canonical(b)


#### bundle member CSV ####

_MEMBER_FIELDS = ["member", "n", "l_dim", "a", "basis"]


def _join(values) -> str:
    return " ".join(format(float(v), ".17g") for v in np.asarray(values).ravel())


def write_bundle_members_csv(path: str, members) -> None:
    """One row per member: dimensions plus the flattened A matrix and
    domain-subspace basis at full float precision."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_MEMBER_FIELDS)
        for i, q in enumerate(members):
            w.writerow([i, q.n, q.subspace_dim, _join(q.A), _join(q.L_basis)])


def read_bundle_members_csv(path: str) -> list:
    members = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _MEMBER_FIELDS:
            raise ReportError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            n = int(row["n"])
            l_dim = int(row["l_dim"])
            a = np.fromstring(row["a"], sep=" ") if row["a"] else np.zeros(0)
            basis = np.fromstring(row["basis"], sep=" ") if row["basis"] else np.zeros(0)
            members.append(
                GeneralizedQuadraticForm(
                    A=a.reshape(n, n),
                    L_basis=basis.reshape(n, l_dim) if l_dim else np.zeros((n, 0)),
                )
            )
    return members


#### d2 sample CSV ####


def write_d2_samples_csv(path: str, directions: np.ndarray, estimates) -> None:
    """Direction rows with the estimated second subderivative value and
    its confidence flag; infinite values are written as inf."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["direction", "value", "low_confidence"])
        for d, est in zip(directions, estimates):
            val = float(est.value) if est.value.is_finite else math.inf
            w.writerow([_join(d), format(val, ".17g"), int(est.low_confidence)])


def read_d2_samples_csv(path: str) -> list:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "direction": np.fromstring(row["direction"], sep=" "),
                    "value": float(row["value"]),
                    "low_confidence": bool(int(row["low_confidence"])),
                }
            )
    return rows
