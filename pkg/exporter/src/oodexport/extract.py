"""Feature extraction and network-level input preprocessing.

Plain extraction runs the splits through the network and returns
penultimate-layer embeddings plus logits as float32 arrays. Preprocessed
variants apply one signed-gradient step to the *inputs* before extraction:

  odin  x' = x - eps * sign(-d/dx log max_i softmax(z(x)/T))
        (a step up the temperature-scaled confidence)
  maha  x' = x - eps * sign(d/dx D(x))
        where D is the squared Mahalanobis distance from the embedding to
        the closest class mean under the shared within-class covariance
        fitted on the ID training embeddings
        (a step down the distance)

Gradients flow through the network via autograd, which is why variants
must be produced here rather than from stored features. At eps = 0 both
maps are the identity. Everything is batched internally and deterministic
for a fixed network and input ordering.
"""

import numpy as np
import torch

BATCH = 256


def _batches(images):
    for start in range(0, images.shape[0], BATCH):
        yield images[start:start + BATCH]


def extract(net, images):
    """(embeddings [n,d], logits [n,C]) as float32 numpy arrays."""
    embs, logits = [], []
    with torch.no_grad():
        for x in _batches(images):
            h = net.embed(x)
            embs.append(h.numpy())
            logits.append(net.head(h).numpy())
    return (np.concatenate(embs).astype(np.float32),
            np.concatenate(logits).astype(np.float32))


def odin_preprocess(net, images, T, eps):
    """Inputs nudged one signed-gradient step up the T-scaled confidence."""
    out = []
    for x in _batches(images):
        x = x.clone().requires_grad_(True)
        log_conf = (net(x) / T).log_softmax(dim=1).max(dim=1).values
        (grad,) = torch.autograd.grad(log_conf.sum(), x)
        out.append((x - eps * (-grad).sign()).detach())
    return torch.cat(out)


def fit_embedding_stats(net, images, labels):
    """Class means and inverse shared covariance of the train embeddings."""
    with torch.no_grad():
        h = torch.cat([net.embed(x) for x in _batches(images)])
    classes = int(labels.max()) + 1
    d = h.shape[1]
    means = torch.stack([h[labels == c].mean(dim=0) for c in range(classes)])
    sigma = torch.zeros(d, d, dtype=h.dtype)
    for c in range(classes):
        diff = h[labels == c] - means[c]
        sigma += diff.T @ diff
    sigma /= h.shape[0]
    ridge = 1e-8 * float(sigma.diagonal().mean()) + 1e-12
    inv = torch.linalg.inv(sigma + ridge * torch.eye(d, dtype=h.dtype))
    return means, inv


def maha_preprocess(net, images, stats, eps):
    """Inputs nudged one signed-gradient step down the class distance."""
    means, inv = stats
    out = []
    for x in _batches(images):
        x = x.clone().requires_grad_(True)
        h = net.embed(x)
        with torch.no_grad():  # class choice is made at the unperturbed x
            diffs = h.unsqueeze(1) - means.unsqueeze(0)  # [n, C, d]
            dists = torch.einsum("ncd,de,nce->nc", diffs, inv, diffs)
            closest = dists.argmin(dim=1)
        diff = h - means[closest]
        dist = torch.einsum("nd,de,ne->n", diff, inv, diff)
        (grad,) = torch.autograd.grad(dist.sum(), x)
        out.append((x - eps * grad.sign()).detach())
    return torch.cat(out)
