"""Pair sampling and training of the weighted pairwise distance head.

An epoch draws a fresh batch of example pairs from the training set,
alternating by position: even batch indices are same-class pairs (y_p = 0,
two distinct examples of one randomly chosen class), odd indices are
different-class pairs (y_p = 1, one example from each of two distinct
classes). The head weights w and a scalar bias beta are trained by
full-batch gradient descent on BCE(y_p, sigmoid(Pairwise(x1, x2) - beta)).

The logistic link with learned bias turns the nonnegative, unbounded
pairwise distance into a probability so binary cross-entropy is
well-defined; beta is reported but plays no role at scoring time, which
uses raw weighted distances. The classifier's own parameters receive
gradients too, but with the identity embedding the objective does not
depend on them, so those gradients are identically zero and the model
comes back unchanged.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientClassSize, NonFinite
from .models import LinearSoftmaxModel, PairwiseHead

__all__ = [
    "FinetuneConfig",
    "PairBatch",
    "pair_gradients",
    "pair_objective",
    "pairwise_logit",
    "sample_pairs",
    "train_pairwise",
]


@dataclass(frozen=True)
class FinetuneConfig:
    n_epochs: int = 200
    n_pairs_per_epoch: int = 50
    lr: float = 0.01
    head_init: str = "ones"  # "ones" resets w before training, "keep" trains as-is

    def __post_init__(self):
        if self.n_epochs < 1 or self.n_pairs_per_epoch < 1:
            raise ValueError("epoch and pair counts must be positive")
        if self.lr < 0:
            raise ValueError("lr must be >= 0")
        if self.head_init not in ("ones", "keep"):
            raise ValueError("head_init must be 'ones' or 'keep'")


class PairBatch:
    """Sampled pairs ((x1, x2), y_p) plus their dataset indices."""

    def __init__(self, pairs, index_pairs):
        self.pairs = pairs
        self.index_pairs = index_pairs

    def __len__(self):
        return len(self.pairs)


def sample_pairs(p, train, n_pairs):
    """Alternating same/different-class pairs per the even/odd position rule."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if train.class_count < 2:
        raise ValueError("need at least 2 classes to form different-class pairs")
    class_indices = [train.class_indices(c) for c in range(train.class_count)]
    for c, idx in enumerate(class_indices):
        if len(idx) < 2:
            raise InsufficientClassSize(
                f"class {c} has {len(idx)} examples; same-class pairs need 2"
            )
    C = train.class_count
    pairs, index_pairs = [], []
    for j in range(n_pairs):
        if j % 2 == 0:  # same class, two distinct examples
            c = p.next_below(C)
            members = class_indices[c]
            a = members[p.next_below(len(members))]
            b = a
            while b == a:
                b = members[p.next_below(len(members))]
            y = 0
        else:  # different classes, one example each
            c1 = p.next_below(C)
            c2 = c1
            while c2 == c1:
                c2 = p.next_below(C)
            a = class_indices[c1][p.next_below(len(class_indices[c1]))]
            b = class_indices[c2][p.next_below(len(class_indices[c2]))]
            y = 1
        pairs.append(((train.points[a], train.points[b]), y))
        index_pairs.append((int(a), int(b)))
    return PairBatch(pairs, index_pairs)


def pairwise_logit(m, head, x1, x2):
    """Sum_j w_j (h(x1)_j - h(x2)_j)^2 — the raw weighted pairwise distance."""
    diff = m.embed(x1) - m.embed(x2)
    return float(np.sum(head.w * diff * diff))


def _bce_from_logit(z, y):
    # BCE(y, sigmoid(z)) = y*softplus(-z) + (1-y)*softplus(z), overflow-safe
    return y * np.logaddexp(0.0, -z) + (1 - y) * np.logaddexp(0.0, z)


def pair_objective(m, head, beta, batch):
    """Mean BCE(y_p, sigmoid(Pairwise - beta)) over the batch."""
    losses = [
        _bce_from_logit(pairwise_logit(m, head, x1, x2) - beta, y)
        for (x1, x2), y in batch.pairs
    ]
    return float(np.mean(losses))


def pair_gradients(m, head, beta, batch):
    """Full-batch loss and gradients w.r.t. (w, beta, W, b)."""
    n = len(batch)
    grad_w = np.zeros_like(head.w)
    grad_beta = 0.0
    loss = 0.0
    for (x1, x2), y in batch.pairs:
        diff = m.embed(x1) - m.embed(x2)
        sq = diff * diff
        z = float(np.sum(head.w * sq)) - beta
        loss += _bce_from_logit(z, y)
        r = 1.0 / (1.0 + np.exp(-z)) - y  # dBCE/dz
        grad_w += r * sq
        grad_beta += -r
    out = {
        "loss": loss / n,
        "grad_w": grad_w / n,
        "grad_beta": grad_beta / n,
    }
    if hasattr(m, "W"):
        # identity embedding: the objective is constant in the classifier's
        # parameters, so their gradients vanish exactly
        out["grad_W"] = np.zeros_like(m.W)
        out["grad_b"] = np.zeros_like(m.b)
    return out


def train_pairwise(m, head, train, cfg, p, loss_log=None, stats=None):
    """Gradient-train the pairwise head (and, formally, the classifier).

    Each epoch samples a fresh batch and takes one full-batch step; the
    epoch's pre-step loss is appended to loss_log when given. The learned
    bias beta lands in stats["beta"] when a dict is passed. Returns
    (model, head) with a freshly constructed head; models without trainable
    classifier parameters (e.g. frozen feature tables) pass through as-is.
    """
    w = np.ones(m.embed_dim) if cfg.head_init == "ones" else head.w.copy()
    beta = 0.0
    trainable = hasattr(m, "W")
    if trainable:
        W_param, b_param = m.W.copy(), m.b.copy()
    for _ in range(cfg.n_epochs):
        batch = sample_pairs(p, train, cfg.n_pairs_per_epoch)
        g = pair_gradients(m, PairwiseHead(w), beta, batch)
        if not np.isfinite(g["loss"]):
            raise NonFinite("pairwise training loss diverged; lower the lr")
        if loss_log is not None:
            loss_log.append(g["loss"])
        w = w - cfg.lr * g["grad_w"]
        beta = beta - cfg.lr * g["grad_beta"]
        if trainable:
            W_param = W_param - cfg.lr * g["grad_W"]
            b_param = b_param - cfg.lr * g["grad_b"]
        if not (np.all(np.isfinite(w)) and np.isfinite(beta)):
            raise NonFinite("pairwise head diverged; lower the lr")
    if stats is not None:
        stats["beta"] = float(beta)
    refit = LinearSoftmaxModel(W_param, b_param) if trainable else m
    return refit, PairwiseHead(w)
