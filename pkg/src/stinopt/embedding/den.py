"""Distance encoder network: a small dense autoencoder trained per graph so its
output coordinates minimise the embedding loss.

Written directly in numpy (forward, backward and AdamW) because the network is
tiny and trained for thousands of single-sample epochs, where framework call
overhead would dominate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..graph import WeightedGraph
from .elf import ELF, flatten, unflatten
from .geometry import HardwareGeometry, Layout

HIDDEN = (64, 36, 18, 9, 18, 36, 64)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class DENConfig:
    epochs: int = 5000
    learning_rate: float = 1e-2
    weight_decay: float = 1e-2
    dropout_p: float = 0.3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    patience: int = 200
    min_delta: float = 1e-8

    def __post_init__(self):
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")

    def widths(self, n: int) -> tuple[int, ...]:
        return (2 * n, *HIDDEN, 2 * n)


class DistanceEncoder:
    """Dense layers with ReLU hidden activations and a per-axis (L/2)·tanh head."""

    def __init__(self, n: int, geo: HardwareGeometry, cfg: DENConfig, rng: np.random.Generator):
        self.widths = cfg.widths(n)
        shapes = []
        for fan_in, fan_out in zip(self.widths[:-1], self.widths[1:]):
            shapes += [(fan_out, fan_in), (fan_out,)]
        # every tensor is a view into one flat buffer so the optimiser step
        # is a handful of vector operations
        self.flat = np.empty(sum(math.prod(sh) for sh in shapes))
        self.grad_flat = np.zeros_like(self.flat)
        self.params = self._views(self.flat, shapes)
        self.grads = self._views(self.grad_flat, shapes)
        for k, p in enumerate(self.params):
            bound = 1.0 / math.sqrt(self.widths[k // 2])
            p[...] = rng.uniform(-bound, bound, size=p.shape)
        self.scale = np.concatenate([np.full(n, geo.width / 2.0), np.full(n, geo.height / 2.0)])
        self.p = cfg.dropout_p

    @staticmethod
    def _views(buf: np.ndarray, shapes) -> list[np.ndarray]:
        out, at = [], 0
        for sh in shapes:
            size = math.prod(sh)
            out.append(buf[at:at + size].reshape(sh))
            at += size
        return out

    def forward(self, x: np.ndarray, rng: np.random.Generator | None = None):
        """Output coordinates; ``rng`` given means training mode (dropout on)."""
        cache = []
        h = x
        n_layers = len(self.params) // 2
        for layer in range(n_layers):
            w, b = self.params[2 * layer], self.params[2 * layer + 1]
            z = w @ h + b
            if layer == n_layers - 1:
                t = np.tanh(z)
                cache.append((h, None, t))
                return self.scale * t, cache
            a = np.maximum(z, 0.0)
            mask = None
            if rng is not None and self.p > 0:
                mask = (rng.random(a.shape) >= self.p) / (1.0 - self.p)
                a = a * mask
            cache.append((h, z, mask))
            h = a
        raise AssertionError("unreachable")

    def backward(self, g_out: np.ndarray, cache) -> np.ndarray:
        """Flat gradient aligned with ``self.flat`` (overwritten each call)."""
        grads = self.grads
        n_layers = len(self.params) // 2
        h, _, t = cache[-1]
        g_z = g_out * self.scale * (1.0 - t * t)
        for layer in range(n_layers - 1, -1, -1):
            h = cache[layer][0]
            w = self.params[2 * layer]
            np.multiply(g_z[:, None], h[None, :], out=grads[2 * layer])
            grads[2 * layer + 1][...] = g_z
            if layer == 0:
                break
            g_h = w.T @ g_z
            _, z_prev, mask_prev = cache[layer - 1]
            if mask_prev is not None:
                g_h = g_h * mask_prev
            g_z = g_h * (z_prev > 0)
        return self.grad_flat


class AdamW:
    """Decoupled weight decay Adam over one flat parameter vector (in place)."""

    def __init__(self, param: np.ndarray, lr, betas, eps, weight_decay):
        self.param = param
        self.lr, self.b1, self.b2 = lr, betas[0], betas[1]
        self.eps, self.wd = eps, weight_decay
        self.m = np.zeros_like(param)
        self.v = np.zeros_like(param)
        self.t = 0

    def step(self, grad: np.ndarray) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        p, m, v = self.param, self.m, self.v
        p *= 1.0 - self.lr * self.wd
        m *= self.b1
        m += (1.0 - self.b1) * grad
        v *= self.b2
        v += (1.0 - self.b2) * grad * grad
        p -= (self.lr / c1) * m / (np.sqrt(v / c2) + self.eps)


def den_train(g: WeightedGraph, init: Layout, cfg: DENConfig | None = None, seed: int = 0,
              geo: HardwareGeometry | None = None) -> tuple[Layout, list[float]]:
    """Train the encoder on one graph; return the best inference layout and the
    per-epoch inference loss trace.

    Output coordinates lie in (-L/2, L/2) per axis; the refinement step moves
    them into the register.
    """
    cfg = cfg or DENConfig()
    geo = geo or HardwareGeometry()
    n = g.n
    if init.n != n:
        raise ValueError("initial layout size does not match the graph")
    if not np.isfinite(init.coords).all():
        raise TrainingError("initial layout has non-finite coordinates")
    if n <= 1:
        return Layout(np.zeros((n, 2))), []
    rng = np.random.default_rng(seed)
    net = DistanceEncoder(n, geo, cfg, rng)
    opt = AdamW(net.flat, cfg.learning_rate, cfg.betas, cfg.eps, cfg.weight_decay)
    loss = ELF(g, geo)
    x = flatten(init.coords - geo.extent / 2.0)

    best_loss, best_out = math.inf, None
    trace: list[float] = []
    prev, still = math.inf, 0
    for epoch in range(cfg.epochs):
        out, cache = net.forward(x, rng)
        total, _, g_out = loss(out, grad=True)
        if not math.isfinite(total):
            raise TrainingError(f"non-finite training loss at epoch {epoch}")
        opt.step(net.backward(g_out, cache))
        out, _ = net.forward(x)
        total, _ = loss(out)
        if not math.isfinite(total):
            raise TrainingError(f"non-finite inference loss at epoch {epoch}")
        trace.append(total)
        if total < best_loss:
            best_loss, best_out = total, out
        still = still + 1 if abs(prev - total) < cfg.min_delta else 0
        prev = total
        if still >= cfg.patience:
            break
    if best_out is None:
        best_out, _ = net.forward(x)
    return Layout(unflatten(best_out)), trace
