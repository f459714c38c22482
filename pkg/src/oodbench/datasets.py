"""Toy data generation, train/test splitting, subsetting, and exemplar banks.

Two synthetic 2-D benchmarks are built from Gaussian clusters and evenly
spaced rings:

* dataset 1: two well-separated ID clusters at (-10,-10) and (-2,-2)
  (sigma 0.5, 100 points each) plus an OOD cluster at (6.5,6.5) (40 points);
  ID points get a pooled random 80/20 train/test split.
* dataset 2: ID class 0 = a 9-point ring around (-5,-5) of radius 2.5 plus a
  tight 6-point cluster at (-0.8,-0.8); ID class 1 = a 15-point ring around
  (8,8); OOD = a 10-point cluster at the origin; pooled random 50/50 split.

The split permutation uses a dedicated generator seeded from a value drawn
*after* all points are sampled, so point coordinates for a given seed are
independent of the split policy. The permutation is redrawn in the (astro-
nomically unlikely) event a training class would come out empty. Everything
is a pure function of the seed.
"""

import numpy as np

from .errors import EmptyClass, InsufficientExamples
from .numkit import Prng, gaussian

__all__ = [
    "ExemplarBank",
    "LabeledDataset",
    "ToyBundle",
    "bank_of_all",
    "generate_toy_dataset1",
    "generate_toy_dataset2",
    "low_data_subset",
    "produce_cluster",
    "produce_ring",
    "select_exemplars",
]


class LabeledDataset:
    """Immutable (points, labels) table with a fixed class count."""

    def __init__(self, points, labels, class_count):
        points = np.asarray(points, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        if points.ndim != 2:
            raise ValueError(f"points must be a 2-D array, got shape {points.shape}")
        if labels.shape != (points.shape[0],):
            raise ValueError("labels length must match number of points")
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")
        if class_count < 1:
            raise ValueError("class_count must be >= 1")
        if len(labels) and (labels.min() < 0 or labels.max() >= class_count):
            raise ValueError("labels must lie in [0, class_count)")
        self.points = points
        self.labels = labels
        self.class_count = int(class_count)
        self.dim = points.shape[1]
        points.setflags(write=False)
        labels.setflags(write=False)

    def __len__(self):
        return self.points.shape[0]

    def class_indices(self, i):
        """Indices of class i in stored order."""
        return np.flatnonzero(self.labels == i)

    def class_points(self, i):
        return self.points[self.class_indices(i)]

    def require_all_classes(self):
        """Raise EmptyClass unless every class id occurs at least once."""
        present = np.bincount(self.labels, minlength=self.class_count) > 0
        if not present.all():
            missing = int(np.flatnonzero(~present)[0])
            raise EmptyClass(f"class {missing} has no examples")
        return self


class ToyBundle:
    """A generated benchmark: labeled ID train/test splits plus unlabeled OOD."""

    def __init__(self, id_train, id_test, ood_test):
        self.id_train = id_train
        self.id_test = id_test
        self.ood_test = np.asarray(ood_test, dtype=np.float64)
        self.ood_test.setflags(write=False)


class ExemplarBank:
    """Per-class reference points for pairwise scoring.

    Banks built by select_exemplars hold exactly m entries per class; a
    whole-train bank (bank_of_all) may be ragged, in which case m is None.
    """

    def __init__(self, per_class):
        if not per_class:
            raise ValueError("bank needs at least one class")
        arrays = [np.asarray(a, dtype=np.float64) for a in per_class]
        dim = arrays[0].shape[1] if arrays[0].ndim == 2 else -1
        for i, a in enumerate(arrays):
            if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] != dim:
                raise ValueError(f"class {i} exemplar array has bad shape {a.shape}")
            a.setflags(write=False)
        self.per_class = arrays
        self.class_count = len(arrays)
        self.dim = dim
        sizes = {a.shape[0] for a in arrays}
        self.m = sizes.pop() if len(sizes) == 1 else None


def produce_cluster(p, mu, sigma, n):
    """n points around mu, coordinates drawn independently (x then y)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma[0] < 0 or sigma[1] < 0:
        raise ValueError("sigma components must be >= 0")
    pts = np.empty((n, 2))
    for i in range(n):
        pts[i, 0] = gaussian(p, mu[0], sigma[0])
        pts[i, 1] = gaussian(p, mu[1], sigma[1])
    return pts


def produce_ring(center, radius, n):
    """n points evenly spaced on a circle; point k (1-based) at angle 2*pi*k/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    pts = np.empty((n, 2))
    for k in range(1, n + 1):
        theta = 2.0 * np.pi * k / n
        pts[k - 1, 0] = center[0] + radius * np.cos(theta)
        pts[k - 1, 1] = center[1] + radius * np.sin(theta)
    return pts


def _split_id_points(points, labels, n_train, p):
    """Pooled random partition into (train, test); no training class empty."""
    n = points.shape[0]
    class_count = int(labels.max()) + 1
    while True:
        order = list(range(n))
        p.shuffle(order)
        train_idx = order[:n_train]
        counts = np.bincount(labels[train_idx], minlength=class_count)
        if counts.min() > 0:
            break
    test_idx = order[n_train:]
    train = LabeledDataset(points[train_idx], labels[train_idx], class_count)
    test = LabeledDataset(points[test_idx], labels[test_idx], class_count)
    return train, test


def generate_toy_dataset1(p):
    """Two separated ID clusters plus one distant OOD cluster; 80/20 split."""
    class1 = produce_cluster(p, (-10.0, -10.0), (0.5, 0.5), 100)
    class2 = produce_cluster(p, (-2.0, -2.0), (0.5, 0.5), 100)
    ood = produce_cluster(p, (6.5, 6.5), (0.5, 0.5), 40)
    points = np.vstack([class1, class2])
    labels = np.repeat([0, 1], [100, 100])
    split_p = Prng(p.next_u64())
    train, test = _split_id_points(points, labels, 160, split_p)
    return ToyBundle(train, test, ood)


def generate_toy_dataset2(p):
    """Ring-plus-cluster ID classes with OOD between them; 50/50 split."""
    ring1 = produce_ring((-5.0, -5.0), 2.5, 9)
    cluster1 = produce_cluster(p, (-0.8, -0.8), (0.2, 0.2), 6)
    class1 = np.vstack([ring1, cluster1])
    class2 = produce_ring((8.0, 8.0), 2.5, 15)
    ood = produce_cluster(p, (0.0, 0.0), (0.3, 0.3), 10)
    points = np.vstack([class1, class2])
    labels = np.repeat([0, 1], [15, 15])
    split_p = Prng(p.next_u64())
    train, test = _split_id_points(points, labels, 15, split_p)
    return ToyBundle(train, test, ood)


def low_data_subset(d, fraction):
    """Keep the first floor(fraction * class_size) examples of each class.

    Selection is by stored order and the surviving examples keep their
    original relative order, so fraction 1.0 returns an identical dataset.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    keep = np.zeros(len(d), dtype=bool)
    for i in range(d.class_count):
        idx = d.class_indices(i)
        # tiny nudge so e.g. 0.3 * 10 (= 2.999... in floats) floors to 3
        k = int(np.floor(fraction * len(idx) + 1e-9))
        if k == 0:
            raise EmptyClass(f"fraction {fraction} empties class {i}")
        keep[idx[:k]] = True
    return LabeledDataset(d.points[keep], d.labels[keep], d.class_count)


def select_exemplars(d, m):
    """First m stored examples of every class, as a uniform bank."""
    if m < 1:
        raise ValueError("m must be >= 1")
    per_class = []
    for i in range(d.class_count):
        idx = d.class_indices(i)
        if len(idx) < m:
            raise InsufficientExamples(
                f"class {i} has {len(idx)} examples, need {m}"
            )
        per_class.append(d.points[idx[:m]])
    return ExemplarBank(per_class)


def bank_of_all(d):
    """The whole training set as an exemplar bank (possibly ragged)."""
    d.require_all_classes()
    return ExemplarBank([d.class_points(i) for i in range(d.class_count)])
