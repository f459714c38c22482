"""Self-contained .oodf writer (no dependency on the scoring tool).

Layout, little-endian throughout:

  b"OODF" | u32 version (=1) | u32 header_len | canonical JSON header
  float32 embeddings [n, e] row-major
  float32 logits [n, c] row-major, if flagged
  int32 labels [n], if flagged
  first 8 bytes of SHA-256 over all preceding bytes

The JSON header is serialized canonically (sorted keys, compact
separators) and carries {n, e, c, flags{has_logits, has_labels},
meta{dataset, role, preprocessing}} where preprocessing is null or
{method, T, eps} (T null for method "maha"). Invariants enforced before
writing, so a file is either complete and consistent or absent: n >= 1,
e >= 1; role one of id_train/id_test/ood_test; id_train must carry labels
and no preprocessing tag; c present exactly when logits or labels are;
labels within [0, c). Files are written atomically (temp + rename).
"""

import hashlib
import json
import os
import struct
import tempfile

import numpy as np

MAGIC = b"OODF"
FORMAT_VERSION = 1
ROLES = ("id_train", "id_test", "ood_test")


class HeaderConsistencyError(Exception):
    """The arrays/metadata handed to the writer violate a format invariant."""


def _check(cond, message):
    if not cond:
        raise HeaderConsistencyError(message)


def encode_feature_file(dataset, role, embeddings, logits=None, labels=None,
                        tag=None):
    """Serialize one split to .oodf bytes; validates every invariant."""
    emb = np.ascontiguousarray(embeddings, dtype="<f4")
    _check(emb.ndim == 2, "embeddings must be a 2-D [n, e] array")
    n, e = emb.shape
    _check(n >= 1 and e >= 1, "need at least one row and one column")
    _check(role in ROLES, f"role must be one of {ROLES}")
    _check(isinstance(dataset, str) and dataset, "dataset name required")

    c = None
    if logits is not None:
        logits = np.ascontiguousarray(logits, dtype="<f4")
        _check(logits.ndim == 2 and logits.shape[0] == n,
               "logits must be [n, c]")
        c = logits.shape[1]
    if labels is not None:
        labels = np.ascontiguousarray(labels, dtype="<i4")
        _check(labels.shape == (n,), "labels must be [n]")
        if c is None:
            c = int(labels.max()) + 1
        _check(0 <= int(labels.min()) and int(labels.max()) < c,
               "labels must lie in [0, c)")
    if role == "id_train":
        _check(labels is not None, "id_train requires labels")
        _check(tag is None, "id_train takes no preprocessing tag")

    if tag is not None:
        method, T, eps = tag
        _check(method in ("odin", "maha"), "tag method must be odin or maha")
        if method == "odin":
            _check(T is not None and T > 0, "odin tags need T > 0")
            T = float(T)
        else:
            _check(T is None, "maha tags carry no temperature")
        _check(eps >= 0, "tag eps must be >= 0")
        tag_json = {"method": method, "T": T, "eps": float(eps)}
    else:
        tag_json = None

    header = json.dumps(
        {
            "n": int(n),
            "e": int(e),
            "c": None if c is None else int(c),
            "flags": {
                "has_logits": logits is not None,
                "has_labels": labels is not None,
            },
            "meta": {
                "dataset": dataset,
                "role": role,
                "preprocessing": tag_json,
            },
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")

    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION),
             struct.pack("<I", len(header)), header, emb.tobytes()]
    if logits is not None:
        parts.append(logits.tobytes())
    if labels is not None:
        parts.append(labels.tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()[:8]


def atomic_write_bytes(path, blob):
    """Write via a temp file in the target directory plus rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
