"""The six detection scores and the class-prediction rules.

Every score follows one sign convention: higher means more in-distribution.
The two distance-family scores are therefore negated distances, and the
weighted-pairwise score negates its class-average at this boundary so all
detectors share the convention.

Methods:

* msp: maximum softmax probability at temperature 1.
* odin: maximum softmax probability at temperature T after an optional
  input nudge of size eps against the gradient of the log-score.
* maha: negative Mahalanobis distance to the nearest class mean under a
  shared (ridged) covariance, with an optional input nudge toward the
  closest class.
* pod: per-class accumulation (g_ex) of squared embedding distances to
  exemplars, then accumulation across classes (g_cls), negated. The default
  scheme is (g_cls=min, g_ex=average).
* podft: like pod with (average, average) but with learnable per-coordinate
  weights in the distance.
* min_distance: negative Euclidean distance to the nearest training point.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedCapability
from .models import grad_log_msp, grad_maha_distance
from .numkit import cholesky, default_ridge, quad_form

__all__ = [
    "DEFAULT_SCHEME",
    "DetectorReport",
    "MahalanobisState",
    "Scheme",
    "fit_mahalanobis",
    "maha_score",
    "min_distance_score",
    "msp_score",
    "odin_score",
    "pod_score",
    "podft_score",
    "predict_class",
    "softmax_score",
]

_ACCUMULATORS = {"min": np.min, "average": np.mean, "max": np.max}


@dataclass(frozen=True)
class Scheme:
    """Accumulator pair: g_cls across classes, g_ex across exemplars."""

    g_cls: str
    g_ex: str

    def __post_init__(self):
        for name in (self.g_cls, self.g_ex):
            if name not in _ACCUMULATORS:
                raise ValueError(
                    f"unknown accumulator {name!r}; use min/average/max"
                )


DEFAULT_SCHEME = Scheme("min", "average")


@dataclass(frozen=True)
class DetectorReport:
    """Score vector a detector produced over one test set."""

    method: str
    params: dict = field(compare=False)
    scores: np.ndarray = field(compare=False)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1:
            raise ValueError("scores must be a vector")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)


class MahalanobisState:
    """Fitted class means and shared covariance factor, plus the nudge size."""

    def __init__(self, means, factor, eps):
        means = np.asarray(means, dtype=np.float64)
        if means.ndim != 2 or means.shape[1] != factor.dim:
            raise ValueError("means must be (classes, dim) matching the factor")
        if eps < 0:
            raise ValueError("eps must be >= 0")
        self.means = means
        self.factor = factor
        self.eps = float(eps)
        self.class_count = means.shape[0]
        means.setflags(write=False)


def softmax_score(logits, T, i):
    """Temperature-scaled softmax probability of class i, overflow-safe."""
    if T <= 0:
        raise ValueError("T must be > 0")
    z = np.asarray(logits, dtype=np.float64) / T
    e = np.exp(z - z.max())
    return float(e[i] / e.sum())


def _max_softmax(logits, T):
    z = np.asarray(logits, dtype=np.float64) / T
    e = np.exp(z - z.max())
    return float(e.max() / e.sum())


def msp_score(m, x):
    """Maximum softmax probability at T = 1."""
    return _max_softmax(m.logits(x), 1.0)


def odin_score(m, x, T, eps):
    """Max softmax at temperature T of the nudged input.

    The nudge moves x against the sign of -grad log(max softmax), i.e. up
    the score surface; eps = 0 scores the raw input and needs no gradients.
    """
    if T <= 0:
        raise ValueError("T must be > 0")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    if eps > 0:
        if not m.supports_input_gradient:
            raise UnsupportedCapability(
                "eps > 0 needs input gradients; ingested feature sets must "
                "carry pre-nudged variants instead"
            )
        x = x - eps * np.sign(-grad_log_msp(m, x, T))
    return _max_softmax(m.logits(x), T)


def fit_mahalanobis(m, train, eps):
    """Class means and shared covariance of the training embeddings.

    The covariance pools within-class scatter over all N points and gets a
    scale-aware ridge before factorization.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    train.require_all_classes()
    embeds = np.array([m.embed(x) for x in train.points])
    dim = embeds.shape[1]
    means = np.empty((train.class_count, dim))
    sigma = np.zeros((dim, dim))
    for i in range(train.class_count):
        rows = embeds[train.class_indices(i)]
        means[i] = rows.mean(axis=0)
        centered = rows - means[i]
        sigma += centered.T @ centered
    sigma /= len(train)
    factor = cholesky(sigma, default_ridge(sigma))
    return MahalanobisState(means, factor, eps)


def _closest_class(s, h):
    quads = [quad_form(s.factor, h - s.means[i]) for i in range(s.class_count)]
    return int(np.argmin(quads))  # ties: lowest index


def maha_score(s, m, x):
    """Negative squared Mahalanobis distance to the nearest class mean."""
    x = np.asarray(x, dtype=np.float64)
    if s.eps > 0:
        if not m.supports_input_gradient:
            raise UnsupportedCapability(
                "eps > 0 needs input gradients; ingested feature sets must "
                "carry pre-nudged variants instead"
            )
        c = _closest_class(s, m.embed(x))
        g = grad_maha_distance(m, x, s.means[c], s.factor)
        x = x - s.eps * np.sign(g)
    h = m.embed(x)
    return max(
        -quad_form(s.factor, h - s.means[i]) for i in range(s.class_count)
    )


def _sq_dists(hx, exemplar_points, m):
    d = np.empty(len(exemplar_points))
    for j, z in enumerate(exemplar_points):
        diff = hx - m.embed(z)
        d[j] = np.sum(diff * diff)
    return d


def pod_score(bank, m, x, scheme=DEFAULT_SCHEME):
    """Negative accumulated squared embedding distance to the exemplars."""
    hx = m.embed(np.asarray(x, dtype=np.float64))
    g_ex = _ACCUMULATORS[scheme.g_ex]
    g_cls = _ACCUMULATORS[scheme.g_cls]
    class_scores = [g_ex(_sq_dists(hx, zs, m)) for zs in bank.per_class]
    return float(-g_cls(class_scores))


def min_distance_score(train, x):
    """Negative Euclidean distance to the nearest training point (raw space)."""
    if len(train) == 0:
        raise ValueError("training set is empty")
    x = np.asarray(x, dtype=np.float64)
    return float(-np.min(np.linalg.norm(train.points - x, axis=1)))


def _podft_class_scores(bank, m, head, x):
    hx = m.embed(np.asarray(x, dtype=np.float64))
    scores = np.empty(bank.class_count)
    for i, zs in enumerate(bank.per_class):
        per_ex = np.empty(len(zs))
        for j, z in enumerate(zs):
            diff = hx - m.embed(z)
            per_ex[j] = np.sum(head.w * diff * diff)
        scores[i] = np.mean(per_ex)
    return scores


def podft_score(bank, m, head, x):
    """Negative class-averaged weighted pairwise distance to the exemplars."""
    return float(-np.mean(_podft_class_scores(bank, m, head, x)))


def predict_class(method, m, x, bank=None, head=None):
    """Class prediction: argmax softmax for msp, argmin class distance for
    the pairwise methods. Ties break to the lowest class index."""
    if method == "msp":
        return int(np.argmax(m.logits(x)))
    if method == "pod":
        hx = m.embed(np.asarray(x, dtype=np.float64))
        class_scores = [np.mean(_sq_dists(hx, zs, m)) for zs in bank.per_class]
        return int(np.argmin(class_scores))
    if method == "podft":
        return int(np.argmin(_podft_class_scores(bank, m, head, x)))
    raise ValueError(f"unknown prediction method {method!r}")
