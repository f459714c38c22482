"""Synthetic image splits for exercising the export pipeline end to end.

Two generators over 1x8x8 float images:

  blobs    two-class ID distribution: a bright 3x3 block in the top-left
           corner (class 0) or bottom-right corner (class 1) over Gaussian
           pixel noise; labeled.
  stripes  OOD distribution: a diagonal stripe pattern over the same noise;
           unlabeled.

Both are deterministic functions of (seed, n). A split descriptor string
"kind,seed=S,n=N" names one split, e.g. "blobs,seed=0,n=64".
"""

from dataclasses import dataclass

import torch

IMAGE_SHAPE = (1, 8, 8)
N_CLASSES = 2
NOISE_SD = 0.10

LABELED_KINDS = ("blobs",)
KINDS = ("blobs", "stripes")


class DatasetError(Exception):
    """A split descriptor does not resolve to usable data."""


@dataclass(frozen=True)
class SplitSpec:
    kind: str
    seed: int
    n: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DatasetError(f"unknown dataset kind {self.kind!r}; "
                               f"known: {', '.join(KINDS)}")
        if self.n < 1:
            raise DatasetError("split size n must be >= 1")

    @property
    def labeled(self):
        return self.kind in LABELED_KINDS


def parse_split(text):
    """Parse 'kind,seed=S,n=N' into a SplitSpec."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise DatasetError(
            f"bad split descriptor {text!r}; expected 'kind,seed=S,n=N'"
        )
    kind = parts[0]
    fields = {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        if key not in ("seed", "n") or not value:
            raise DatasetError(f"bad split descriptor field {part!r}")
        try:
            fields[key] = int(value)
        except ValueError as exc:
            raise DatasetError(f"bad split descriptor field {part!r}") from exc
    if set(fields) != {"seed", "n"}:
        raise DatasetError(f"split descriptor {text!r} needs seed= and n=")
    return SplitSpec(kind, fields["seed"], fields["n"])


def make_split(spec):
    """Materialize (images [n,1,8,8] float32, labels [n] int64 or None)."""
    g = torch.Generator().manual_seed(spec.seed)
    noise = torch.randn((spec.n,) + IMAGE_SHAPE, generator=g) * NOISE_SD
    if spec.kind == "blobs":
        labels = torch.randint(0, N_CLASSES, (spec.n,), generator=g)
        images = noise
        for i, y in enumerate(labels):
            if int(y) == 0:
                images[i, 0, 0:3, 0:3] += 1.0
            else:
                images[i, 0, 5:8, 5:8] += 1.0
        return images, labels
    # stripes: ((row + col) mod 2) checker-like diagonal pattern
    row = torch.arange(8).reshape(8, 1)
    col = torch.arange(8).reshape(1, 8)
    pattern = ((row + col) % 2).float() * 0.8
    images = noise + pattern.reshape(IMAGE_SHAPE)
    return images, None
