"""oodexport: extract classifier features and write .oodf feature files.

The exporter is a pure feature faucet: it loads (or trains) a small image
classifier, runs the ID train/test and OOD test splits through it, and
writes penultimate-layer embeddings plus logits as .oodf files for the
downstream scoring tool. It computes no detection scores and no metrics.
For grid entries (method, T, eps) it additionally writes
preprocessing-tagged variants of the test splits whose inputs were nudged
by one signed-gradient step at the network level — the one thing that
cannot be reconstructed from stored features.
"""

__version__ = "0.1.0"
