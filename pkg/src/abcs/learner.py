"""AdaHedge: exponential weights on the simplex with a data-dependent
learning rate. No horizon, range, or rate parameters; the learning rate
ln(dim)/Delta adapts through the cumulative mixability gap Delta."""
from __future__ import annotations

import numpy as np


class AdaHedge:
    """Single learner over ``dim`` experts for linear losses."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.cum_loss = np.zeros(dim)
        self.mix_gap = 0.0

    def propose(self) -> np.ndarray:
        """Current exponential-weights distribution (uniform over the
        argmin of the cumulative loss while the gap is still zero)."""
        L = self.cum_loss
        if self.mix_gap <= 0.0:
            mask = L <= L.min()
            return mask / mask.sum()
        eta = np.log(self.dim) / self.mix_gap
        z = -eta * (L - L.min())
        w = np.exp(z)
        return w / w.sum()

    def update(self, loss: np.ndarray) -> None:
        loss = np.asarray(loss, dtype=float)
        if loss.shape != (self.dim,):
            raise ValueError("loss vector has the wrong dimension")
        if not np.all(np.isfinite(loss)):
            raise ValueError("loss vector must be finite")
        w = self.propose()
        expected = float(w @ loss)
        if self.mix_gap <= 0.0:
            mix = float(loss[w > 0.0].min())
        else:
            eta = np.log(self.dim) / self.mix_gap
            lo = loss.min()
            mix = lo - np.log(w @ np.exp(-eta * (loss - lo))) / eta
        self.mix_gap += max(0.0, expected - mix)
        self.cum_loss += loss


class AdaHedgeBank:
    """A row-vectorized bank of independent AdaHedge learners (one per
    subpopulation in the proportional mode)."""

    def __init__(self, n: int, dim: int):
        self.n = n
        self.dim = dim
        self.cum_loss = np.zeros((n, dim))
        self.mix_gap = np.zeros(n)

    def propose(self) -> np.ndarray:
        L = self.cum_loss
        lo = L.min(axis=1, keepdims=True)
        w = np.empty_like(L)
        cold = self.mix_gap <= 0.0
        if np.any(cold):
            mask = (L[cold] <= lo[cold]).astype(float)
            w[cold] = mask / mask.sum(axis=1, keepdims=True)
        hot = ~cold
        if np.any(hot):
            eta = np.log(self.dim) / self.mix_gap[hot]
            z = np.exp(-eta[:, None] * (L[hot] - lo[hot]))
            w[hot] = z / z.sum(axis=1, keepdims=True)
        return w

    def update(self, loss: np.ndarray) -> None:
        loss = np.asarray(loss, dtype=float)
        if not np.all(np.isfinite(loss)):
            raise ValueError("loss matrix must be finite")
        w = self.propose()
        expected = np.einsum("ij,ij->i", w, loss)
        mix = np.empty(self.n)
        cold = self.mix_gap <= 0.0
        if np.any(cold):
            masked = np.where(w[cold] > 0.0, loss[cold], np.inf)
            mix[cold] = masked.min(axis=1)
        hot = ~cold
        if np.any(hot):
            eta = np.log(self.dim) / self.mix_gap[hot]
            lo = loss[hot].min(axis=1, keepdims=True)
            z = np.exp(-eta[:, None] * (loss[hot] - lo))
            mix[hot] = lo[:, 0] - np.log(
                np.einsum("ij,ij->i", w[hot], z)) / eta
        self.mix_gap += np.maximum(0.0, expected - mix)
        self.cum_loss += loss
