"""The classifier whose features get exported, plus checkpoint handling.

A deliberately small two-layer network: flatten, a hidden linear layer with
ReLU (the penultimate embedding), and a linear classification head. embed()
exposes the penultimate activations; forward() the logits. Checkpoints
carry the architecture sizes alongside the weights so loading needs only
the path.
"""

import torch
from torch import nn

from .data import IMAGE_SHAPE, N_CLASSES

HIDDEN_DIM = 16
DEFAULT_EPOCHS = 200
DEFAULT_LR = 0.05


class CheckpointError(Exception):
    """A checkpoint reference does not resolve to a loadable model."""


class SmallNet(nn.Module):
    def __init__(self, in_pixels, hidden, classes):
        super().__init__()
        self.hidden = nn.Linear(in_pixels, hidden)
        self.head = nn.Linear(hidden, classes)
        self.in_pixels = in_pixels

    def embed(self, x):
        return torch.relu(self.hidden(x.reshape(x.shape[0], -1)))

    def forward(self, x):
        return self.head(self.embed(x))


def train_net(images, labels, epochs=DEFAULT_EPOCHS, lr=DEFAULT_LR, seed=0):
    """Full-batch cross-entropy training of a fresh SmallNet."""
    torch.manual_seed(seed)
    in_pixels = int(torch.tensor(IMAGE_SHAPE).prod())
    net = SmallNet(in_pixels, HIDDEN_DIM, N_CLASSES)
    opt = torch.optim.SGD(net.parameters(), lr=lr)
    losses = []
    for _ in range(epochs):
        opt.zero_grad()
        loss = nn.functional.cross_entropy(net(images), labels)
        loss.backward()
        opt.step()
        losses.append(float(loss.detach()))
    net.eval()
    return net, losses


def save_checkpoint(net, path):
    torch.save(
        {
            "state_dict": net.state_dict(),
            "in_pixels": net.in_pixels,
            "hidden": net.hidden.out_features,
            "classes": net.head.out_features,
        },
        path,
    )


def load_checkpoint(path):
    try:
        blob = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError as exc:
        raise CheckpointError(f"checkpoint not found: {path}") from exc
    except Exception as exc:
        raise CheckpointError(f"cannot load checkpoint {path}: {exc}") from exc
    try:
        net = SmallNet(blob["in_pixels"], blob["hidden"], blob["classes"])
        net.load_state_dict(blob["state_dict"])
    except (KeyError, TypeError, RuntimeError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    net.eval()
    return net
