"""The toolkit wire formats, implemented adapter-side.

The adapter talks to the poisoning toolkit only through files: line-delimited
JSON corpora/predictions and the binary "REPR" representation format
(magic, u32 version, u64 N, u64 d, float32 rows, ids in a <path>.ids
sidecar). These writers must stay byte-compatible with the toolkit's readers.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

REPR_MAGIC = b"REPR"
REPR_VERSION = 1


def read_corpus(path) -> list[dict]:
    """Corpus records as dicts; requires id, code, docstring per line."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(
                {
                    "id": str(obj.get("id", lineno)),
                    "code": obj["code"],
                    "docstring": obj["docstring"],
                }
            )
    if not records:
        raise ValueError(f"{path}: empty corpus")
    return records


def write_predictions(path, records: list[tuple[str, str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample_id, output in records:
            fh.write(json.dumps({"id": sample_id, "output": output}, ensure_ascii=False))
            fh.write("\n")


def write_repr(path, rows: np.ndarray, row_ids: list[str]) -> None:
    rows = np.ascontiguousarray(rows, dtype="<f4")
    if rows.ndim != 2 or rows.shape[0] != len(row_ids):
        raise ValueError("rows must be N x d with one id per row")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(REPR_MAGIC)
        fh.write(struct.pack("<I", REPR_VERSION))
        fh.write(struct.pack("<QQ", rows.shape[0], rows.shape[1]))
        fh.write(rows.tobytes(order="C"))
    with open(str(path) + ".ids", "w", encoding="utf-8", newline="\n") as fh:
        for rid in row_ids:
            fh.write(rid)
            fh.write("\n")
