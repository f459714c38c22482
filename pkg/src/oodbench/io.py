"""Bit-exact feature-file format (OODF), ingestion, and report serialization.

OODF binary layout, fully pinned so independent writers interoperate:

    magic            4 bytes  b"OODF"
    version          u32 LE   (currently 1)
    header_len       u32 LE
    header           UTF-8 JSON, header_len bytes
    embeddings       n*e float32 LE, row-major
    logits           n*c float32 LE, row-major   (iff flags.has_logits)
    labels           n int32 LE                  (iff flags.has_labels)
    checksum         8 bytes: first 8 bytes of SHA-256 over everything above
                     (equivalently a u64 LE)

Header JSON: {"n": int, "e": int, "c": int|null,
              "flags": {"has_logits": bool, "has_labels": bool},
              "meta": {"dataset": str, "role": "id_train"|"id_test"|"ood_test",
                       "preprocessing": null | {"method": "odin"|"maha",
                                                "T": float|null, "eps": float}}}

Invariants: n >= 1; labels are required for id_train and optional for test
roles; id_train is never preprocessing-tagged (fitting always uses raw
features); c is present whenever logits or labels are; odin tags carry T > 0
while maha tags carry T = null. Preprocessed variants are separate files:
input nudges cannot be applied post hoc to stored features.

Read errors, in checking order: BadMagic (wrong leading bytes),
VersionMismatch, InconsistentHeader (unparseable or invariant-violating
header), ChecksumFailure (truncated anywhere, byte-count mismatch after a
valid header, or hash mismatch). Every truncation of a valid file surfaces
as ChecksumFailure.

Ingestion wraps feature tables as a gradient-free model whose "inputs" are
one-element index vectors into the concatenated row table, so detectors and
datasets work unchanged on externally computed features.
"""

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from .datasets import LabeledDataset
from .errors import (
    BadMagic,
    ChecksumFailure,
    DimensionMismatch,
    InconsistentHeader,
    MissingLabels,
    MissingPreprocessedVariant,
    UnsupportedCapability,
    VersionMismatch,
)
from .models import ModelInterface

__all__ = [
    "FORMAT_VERSION",
    "FeatureSet",
    "Ingested",
    "IngestedModel",
    "IngestedSlot",
    "PreprocessingTag",
    "Report",
    "ingest_as_model",
    "read_feature_file",
    "report_rows_from_json",
    "write_feature_file",
    "write_report_csv",
    "write_report_json",
]

MAGIC = b"OODF"
FORMAT_VERSION = 1
ROLES = ("id_train", "id_test", "ood_test")

REPORT_COLUMNS = (
    "id", "ood", "method", "T", "eps", "scheme", "M",
    "regime", "seed", "auroc", "fnr95",
)


@dataclass(frozen=True)
class PreprocessingTag:
    """Which input nudge produced a variant file: (method, T, eps)."""

    method: str
    T: object  # float for odin, None for maha
    eps: float

    def __post_init__(self):
        if self.method not in ("odin", "maha"):
            raise ValueError(f"unknown preprocessing method {self.method!r}")
        if self.method == "odin":
            if not (isinstance(self.T, (int, float)) and self.T > 0):
                raise ValueError("odin tags need T > 0")
        elif self.T is not None:
            raise ValueError("maha tags carry no temperature (T must be None)")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")


class FeatureSet:
    """In-memory image of one OODF file. Arrays are stored at file precision
    (float32 / int32) so write-read round trips are bit-exact."""

    def __init__(self, dataset, role, embeddings, logits=None, labels=None,
                 class_count=None, preprocessing=None):
        if role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {role!r}")
        embeddings = np.ascontiguousarray(embeddings, dtype=np.float32)
        if embeddings.ndim != 2 or embeddings.shape[0] < 1 or embeddings.shape[1] < 1:
            raise ValueError("embeddings must be a non-empty (n, e) array")
        n = embeddings.shape[0]
        if logits is not None:
            logits = np.ascontiguousarray(logits, dtype=np.float32)
            if logits.ndim != 2 or logits.shape[0] != n:
                raise ValueError("logits must be (n, c)")
        if labels is not None:
            labels = np.ascontiguousarray(labels, dtype=np.int32)
            if labels.shape != (n,):
                raise ValueError("labels must have one entry per row")
        if logits is not None or labels is not None:
            if class_count is None:
                raise ValueError("class_count is required with logits or labels")
            if class_count < 1:
                raise ValueError("class_count must be >= 1")
            if logits is not None and logits.shape[1] != class_count:
                raise ValueError("logits width must equal class_count")
            if labels is not None and len(labels) and (
                labels.min() < 0 or labels.max() >= class_count
            ):
                raise ValueError("labels must lie in [0, class_count)")
        if role == "id_train":
            if labels is None:
                raise MissingLabels("id_train feature sets must carry labels")
            if preprocessing is not None:
                raise ValueError("id_train is always raw (no preprocessing tag)")
        if preprocessing is not None and not isinstance(
            preprocessing, PreprocessingTag
        ):
            raise ValueError("preprocessing must be a PreprocessingTag or None")
        self.dataset = str(dataset)
        self.role = role
        self.embeddings = embeddings
        self.logits = logits
        self.labels = labels
        self.class_count = None if class_count is None else int(class_count)
        self.preprocessing = preprocessing
        self.n = n
        self.e = embeddings.shape[1]
        for a in (embeddings, logits, labels):
            if a is not None:
                a.setflags(write=False)


def _header_dict(fs):
    tag = fs.preprocessing
    return {
        "n": fs.n,
        "e": fs.e,
        "c": fs.class_count,
        "flags": {
            "has_logits": fs.logits is not None,
            "has_labels": fs.labels is not None,
        },
        "meta": {
            "dataset": fs.dataset,
            "role": fs.role,
            "preprocessing": None if tag is None else {
                "method": tag.method, "T": tag.T, "eps": tag.eps,
            },
        },
    }


def write_feature_file(fs, path):
    """Serialize a FeatureSet; same FeatureSet -> byte-identical file."""
    header = json.dumps(
        _header_dict(fs), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION),
             struct.pack("<I", len(header)), header,
             fs.embeddings.astype("<f4", copy=False).tobytes(order="C")]
    if fs.logits is not None:
        parts.append(fs.logits.astype("<f4", copy=False).tobytes(order="C"))
    if fs.labels is not None:
        parts.append(fs.labels.astype("<i4", copy=False).tobytes(order="C"))
    body = b"".join(parts)
    digest = hashlib.sha256(body).digest()[:8]  # the u64 LE trailing checksum
    with open(path, "wb") as fh:
        fh.write(body + digest)


def _parse_tag(obj):
    if obj is None:
        return None
    if not isinstance(obj, dict) or set(obj) != {"method", "T", "eps"}:
        raise InconsistentHeader("preprocessing tag must have method/T/eps")
    try:
        return PreprocessingTag(obj["method"], obj["T"], float(obj["eps"]))
    except (ValueError, TypeError) as exc:
        raise InconsistentHeader(f"bad preprocessing tag: {exc}") from exc


def read_feature_file(path):
    """Parse and validate an OODF file; see the module docstring for the
    error taxonomy."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) >= 4 and blob[:4] != MAGIC:
        raise BadMagic(f"{path}: not an OODF file")
    if len(blob) < 12:
        raise ChecksumFailure(f"{path}: truncated before the header")
    version = struct.unpack_from("<I", blob, 4)[0]
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format version {version}, expected {FORMAT_VERSION}"
        )
    header_len = struct.unpack_from("<I", blob, 8)[0]
    if len(blob) < 12 + header_len:
        raise ChecksumFailure(f"{path}: truncated inside the header")
    try:
        header = json.loads(blob[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InconsistentHeader(f"{path}: header is not valid JSON") from exc

    try:
        n = int(header["n"])
        e = int(header["e"])
        c = header["c"]
        has_logits = bool(header["flags"]["has_logits"])
        has_labels = bool(header["flags"]["has_labels"])
        meta = header["meta"]
        dataset = str(meta["dataset"])
        role = meta["role"]
        tag = _parse_tag(meta["preprocessing"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InconsistentHeader(f"{path}: malformed header: {exc}") from exc
    if n < 1 or e < 1:
        raise InconsistentHeader(f"{path}: empty feature sets are not valid")
    if role not in ROLES:
        raise InconsistentHeader(f"{path}: unknown role {role!r}")
    if (has_logits or has_labels) and (not isinstance(c, int) or c < 1):
        raise InconsistentHeader(f"{path}: class count required but c={c!r}")
    if role == "id_train" and not has_labels:
        raise InconsistentHeader(f"{path}: id_train requires labels")
    if role == "id_train" and tag is not None:
        raise InconsistentHeader(f"{path}: id_train must be untagged")

    expected = 4 * n * e + (4 * n * c if has_logits else 0) + \
        (4 * n if has_labels else 0)
    body_len = 12 + header_len + expected
    if len(blob) != body_len + 8:
        raise ChecksumFailure(
            f"{path}: expected {body_len + 8} bytes, found {len(blob)}"
        )
    digest = hashlib.sha256(blob[:body_len]).digest()[:8]
    if digest != blob[body_len:]:
        raise ChecksumFailure(f"{path}: checksum mismatch")

    off = 12 + header_len
    embeddings = np.frombuffer(blob, "<f4", n * e, off).reshape(n, e).copy()
    off += 4 * n * e
    logits = None
    if has_logits:
        logits = np.frombuffer(blob, "<f4", n * c, off).reshape(n, c).copy()
        off += 4 * n * c
    labels = None
    if has_labels:
        labels = np.frombuffer(blob, "<i4", n, off).copy()
        if len(labels) and (labels.min() < 0 or labels.max() >= c):
            raise InconsistentHeader(f"{path}: labels outside [0, c)")
    try:
        return FeatureSet(dataset, role, embeddings, logits, labels,
                          class_count=c, preprocessing=tag)
    except (ValueError, MissingLabels) as exc:
        raise InconsistentHeader(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


class IngestedModel(ModelInterface):
    """Gradient-free model over concatenated feature tables.

    An "input" is a one-element vector [row_index]; embed and logits are
    table lookups, so fitted detectors, exemplar banks, and datasets all
    operate on indices without noticing.
    """

    supports_input_gradient = False

    def __init__(self, embeddings, logits, class_count):
        self._embeddings = np.asarray(embeddings, dtype=np.float64)
        self._logits = None if logits is None else np.asarray(logits, np.float64)
        self.embed_dim = self._embeddings.shape[1]
        self.class_count = class_count

    def _row(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (1,):
            raise DimensionMismatch(
                f"ingested inputs are [row_index] vectors, got shape {x.shape}"
            )
        return int(x[0])

    def embed(self, x):
        return self._embeddings[self._row(x)]

    def logits(self, x):
        if self._logits is None:
            raise UnsupportedCapability(
                "feature files carry no logits; softmax scores unavailable"
            )
        return self._logits[self._row(x)]


class IngestedSlot:
    """One test split: its base index view plus preprocessed variants."""

    def __init__(self, dataset, role, base_view, labels, variants):
        self.dataset = dataset
        self.role = role
        self._base = base_view
        self.labels = labels
        self._variants = variants

    def view(self, tag=None):
        """Index vectors for the raw split (tag None) or a tagged variant."""
        if tag is None:
            return self._base
        if tag not in self._variants:
            have = sorted(
                f"({t.method}, T={t.T}, eps={t.eps})" for t in self._variants
            )
            raise MissingPreprocessedVariant(
                f"{self.dataset}/{self.role} has no variant ({tag.method}, "
                f"T={tag.T}, eps={tag.eps}); available: {have or 'none'}"
            )
        return self._variants[tag]


class Ingested:
    """Bundle returned by ingest_as_model: model + train view + test slots."""

    def __init__(self, model, train, slots):
        self.model = model
        self.train = train
        self.slots = slots  # {(dataset, role): IngestedSlot}

    def slot(self, dataset, role):
        return self.slots[(dataset, role)]


def _index_view(start, n):
    return np.arange(start, start + n, dtype=np.float64).reshape(n, 1)


def ingest_as_model(train, test_sets):
    """Wrap feature sets as a scoreable model plus dataset views.

    train must be an untagged id_train set; test_sets may mix untagged
    splits and their preprocessing-tagged variants. All sets must agree on
    embedding width (and class count where declared).
    """
    if train.role != "id_train":
        raise ValueError(f"train set has role {train.role!r}, need id_train")
    if train.labels is None:
        raise MissingLabels("ingestion requires labels on the training set")
    if train.preprocessing is not None:
        raise ValueError("the training set must be raw (untagged)")
    e = train.e
    c = train.class_count
    for fs in test_sets:
        if fs.e != e:
            raise DimensionMismatch(
                f"{fs.dataset}/{fs.role}: embedding dim {fs.e} != train's {e}"
            )
        if fs.class_count is not None and fs.class_count != c:
            raise DimensionMismatch(
                f"{fs.dataset}/{fs.role}: class count {fs.class_count} != {c}"
            )

    tables_emb = [train.embeddings.astype(np.float64)]
    have_logits = all(fs.logits is not None for fs in [train] + list(test_sets))
    tables_log = [train.logits.astype(np.float64)] if have_logits else None

    offset = train.n
    bases = {}      # (dataset, role) -> (view, labels, n)
    variants = {}   # (dataset, role) -> {tag: view}
    for fs in test_sets:
        key = (fs.dataset, fs.role)
        view = _index_view(offset, fs.n)
        tables_emb.append(fs.embeddings.astype(np.float64))
        if have_logits:
            tables_log.append(fs.logits.astype(np.float64))
        offset += fs.n
        if fs.preprocessing is None:
            if key in bases:
                raise ValueError(f"duplicate untagged set for {key}")
            bases[key] = (view, fs.labels, fs.n)
        else:
            slot_variants = variants.setdefault(key, {})
            if fs.preprocessing in slot_variants:
                raise ValueError(f"duplicate variant {fs.preprocessing} for {key}")
            slot_variants[fs.preprocessing] = view
    for key, tagged in variants.items():
        if key not in bases:
            raise ValueError(f"variants for {key} but no untagged base set")
        base_n = bases[key][2]
        for tag, view in tagged.items():
            if len(view) != base_n:
                raise DimensionMismatch(
                    f"variant {tag} of {key} has {len(view)} rows, base {base_n}"
                )

    model = IngestedModel(
        np.vstack(tables_emb),
        np.vstack(tables_log) if have_logits else None,
        c,
    )
    train_view = LabeledDataset(
        _index_view(0, train.n), train.labels.astype(np.int64), c
    )
    slots = {
        key: IngestedSlot(key[0], key[1], view, labels, variants.get(key, {}))
        for key, (view, labels, _) in bases.items()
    }
    return Ingested(model, train_view, slots)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


class Report:
    """Per-cell metric rows plus per-regime win matrices."""

    def __init__(self, rows, win_matrices):
        seen = set()
        for row in rows:
            key = tuple(row.get(k) for k in REPORT_COLUMNS[:9])
            if key in seen:
                raise ValueError(f"duplicate report row for {key}")
            seen.add(key)
        self.rows = list(rows)
        self.win_matrices = dict(win_matrices)  # regime -> WinMatrix


def write_report_json(report, path):
    payload = {
        "rows": report.rows,
        "win_matrices": {
            regime: {
                "methods": wm.methods,
                "wins": wm.wins.tolist(),
                "pair_total": wm.pair_total,
            }
            for regime, wm in report.win_matrices.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csv(report, path):
    def cell(v):
        return "" if v is None else str(v)

    lines = [",".join(REPORT_COLUMNS)]
    for row in report.rows:
        lines.append(",".join(cell(row.get(k)) for k in REPORT_COLUMNS))
    for regime, wm in sorted(report.win_matrices.items()):
        lines.append("")
        lines.append(f"# win matrix ({regime}); wins[row beats column] "
                     f"out of {wm.pair_total}")
        lines.append(",".join(["method"] + wm.methods))
        for i, name in enumerate(wm.methods):
            lines.append(",".join(
                [name] + [str(int(w)) for w in wm.wins[i]]
            ))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def report_rows_from_json(path):
    """Rows of a report JSON written by this tool (for compare/assembly)."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = payload["rows"] if isinstance(payload, dict) else payload
    if not isinstance(rows, list):
        raise ValueError(f"{path}: expected a report with a 'rows' list")
    return rows
