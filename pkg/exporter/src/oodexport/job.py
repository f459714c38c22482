"""Export jobs: which checkpoint, which splits, which preprocessing grid.

An ExportJob names a model checkpoint, the three dataset splits (ID train,
ID test, OOD test), an output directory, and a preprocessing grid — a list
of (method, T, eps) entries. export() writes one untagged .oodf per split,
plus one tagged .oodf per (test split, grid entry). The train split is
never tagged: it is the raw reference the scoring tool fits on, and the
format rejects tagged id_train files. Grid entries with eps = 0 are
skipped as redundant — the nudge is the identity there, so the untagged
export already carries those arrays byte-for-byte.

Grid entries must stay within the published search ranges: temperatures in
[1, 1000] (odin only; maha has no temperature) and eps in [0, 0.2].
"""

import os
from dataclasses import dataclass

from .data import DatasetError, make_split, parse_split
from .extract import extract, fit_embedding_stats, maha_preprocess, odin_preprocess
from .net import load_checkpoint
from .writer import atomic_write_bytes, encode_feature_file

T_RANGE = (1.0, 1000.0)
EPS_RANGE = (0.0, 0.2)


@dataclass(frozen=True)
class GridEntry:
    method: str
    T: float  # None for maha
    eps: float

    def __post_init__(self):
        if self.method not in ("odin", "maha"):
            raise ValueError(f"grid method must be odin or maha, "
                             f"got {self.method!r}")
        if self.method == "odin":
            if self.T is None or not T_RANGE[0] <= self.T <= T_RANGE[1]:
                raise ValueError(f"odin temperature must lie in {T_RANGE}")
        elif self.T is not None:
            raise ValueError("maha entries carry no temperature")
        if not EPS_RANGE[0] <= self.eps <= EPS_RANGE[1]:
            raise ValueError(f"eps must lie in {EPS_RANGE}")

    @property
    def tag(self):
        return (self.method, self.T, self.eps)

    def suffix(self):
        if self.method == "odin":
            return f"odin_T{self.T:g}_eps{self.eps:g}"
        return f"maha_eps{self.eps:g}"


def parse_grid_entry(text):
    """Parse 'odin,T=1000,eps=0.0014' or 'maha,eps=0.01'."""
    parts = [p.strip() for p in text.split(",")]
    method = parts[0]
    fields = {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        if key not in ("T", "eps") or not value:
            raise ValueError(f"bad grid entry field {part!r}")
        try:
            fields[key] = float(value)
        except ValueError as exc:
            raise ValueError(f"bad grid entry field {part!r}") from exc
    if "eps" not in fields:
        raise ValueError(f"grid entry {text!r} needs eps=")
    return GridEntry(method, fields.get("T"), fields["eps"])


@dataclass(frozen=True)
class ExportJob:
    checkpoint: str
    id_train: object  # SplitSpec
    id_test: object
    ood_test: object
    out_dir: str
    grid: tuple

    def __post_init__(self):
        for name in ("id_train", "id_test"):
            if not getattr(self, name).labeled:
                raise DatasetError(f"{name} must be a labeled dataset kind")
        object.__setattr__(self, "grid", tuple(self.grid))


def job_from_args(checkpoint, id_train, id_test, ood_test, out_dir, grid):
    """Build an ExportJob from descriptor/entry strings."""
    return ExportJob(
        checkpoint,
        parse_split(id_train),
        parse_split(id_test),
        parse_split(ood_test),
        out_dir,
        tuple(parse_grid_entry(g) for g in grid),
    )


def _write(out_dir, dataset, role, images, labels, net, tag=None,
           suffix=None):
    emb, logits = extract(net, images)
    blob = encode_feature_file(
        dataset, role, emb, logits,
        None if labels is None else labels.numpy(), tag,
    )
    name = f"{dataset}_{role}.oodf" if suffix is None \
        else f"{dataset}_{role}__{suffix}.oodf"
    path = os.path.join(out_dir, name)
    atomic_write_bytes(path, blob)
    return path


def export(job):
    """Run the job; returns (written paths, skipped eps-0 entries)."""
    net = load_checkpoint(job.checkpoint)
    os.makedirs(job.out_dir, exist_ok=True)
    splits = {
        "id_train": (job.id_train, *make_split(job.id_train)),
        "id_test": (job.id_test, *make_split(job.id_test)),
        "ood_test": (job.ood_test, *make_split(job.ood_test)),
    }
    written = []
    for role, (spec, images, labels) in splits.items():
        written.append(_write(job.out_dir, spec.kind, role, images, labels,
                              net))

    live = [g for g in job.grid if g.eps > 0]
    skipped = [g for g in job.grid if g.eps == 0]
    stats = None
    if any(g.method == "maha" for g in live):
        _, train_images, train_labels = splits["id_train"]
        stats = fit_embedding_stats(net, train_images, train_labels)
    for entry in live:
        for role in ("id_test", "ood_test"):
            spec, images, labels = splits[role]
            if entry.method == "odin":
                nudged = odin_preprocess(net, images, entry.T, entry.eps)
            else:
                nudged = maha_preprocess(net, images, stats, entry.eps)
            written.append(_write(job.out_dir, spec.kind, role, nudged,
                                  labels, net, entry.tag, entry.suffix()))
    return written, skipped
