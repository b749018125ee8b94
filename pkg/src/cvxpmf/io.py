"""File formats: pmf / weight JSON, sample files and CSV helpers."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .estimator import Sample
from .pmf import MixtureWeights, Pmf


def pmf_to_json(p: Pmf) -> str:
    return json.dumps({"mass": [float(x) for x in p.mass]})


def pmf_from_json(text: str) -> Pmf:
    data = json.loads(text)
    if "mass" not in data:
        raise ValueError('pmf JSON needs a "mass" array')
    m = np.asarray(data["mass"], dtype=float)
    # decimal text may drift from an exact sum of one
    return Pmf(m / m.sum())


def weights_to_json(w: MixtureWeights) -> str:
    return json.dumps({"pi": {str(j): v for j, v in w.as_dict().items()}})


def weights_from_json(text: str) -> MixtureWeights:
    data = json.loads(text)
    if "pi" not in data:
        raise ValueError('weights JSON needs a "pi" object')
    w = MixtureWeights.from_mapping({int(k): float(v) for k, v in data["pi"].items()})
    return w


def read_sample(path) -> Sample:
    """Newline-separated nonnegative integers, or JSON ``{"counts": {"0": c0, ...}}``."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if "counts" not in data:
            raise ValueError('sample JSON needs a "counts" object')
        items = {int(k): int(v) for k, v in data["counts"].items()}
        if any(k < 0 for k in items):
            raise ValueError("observations must be nonnegative")
        counts = np.zeros(max(items) + 1, dtype=np.int64)
        for k, v in items.items():
            counts[k] = v
        return Sample(counts)
    values = [int(tok) for tok in stripped.split()]
    return Sample.from_values(values)


def write_sample(path, sample: Sample):
    Path(path).write_text("\n".join(str(v) for v in sample.values()) + "\n")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return x
