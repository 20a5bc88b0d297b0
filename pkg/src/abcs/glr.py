"""Pairwise transport costs and the GLR statistic with minimizer/subgradient.

Shared by the stopping rule (counts as weights), the online learner losses,
and the characteristic-time oracle (simplex weights): the statistic is
positively homogeneous in the weights, so both usages go through the same
solvers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .expfam import Family
from .model import Instance


@dataclass
class TransportResult:
    """Value and minimizer of the inner GLR problem at given weights."""

    value: float
    pair_arm: int
    lam: np.ndarray          # (2, J): alternative means for arms (0, pair_arm)
    subgradient: np.ndarray  # (K+1, J): d(mu, lam) on rows {0, pair_arm}

    def alternative(self, means: np.ndarray) -> np.ndarray:
        """Full (K+1) x J alternative: means with rows 0 and b* replaced."""
        alt = np.array(means, dtype=float)
        alt[0] = self.lam[0]
        alt[self.pair_arm] = self.lam[1]
        return alt


def pair_transport(w0, mu0, wb, mub, beta, family: Family,
                   arm_b: int = 1):
    """Exact infimum of the two-row weighted transport under the
    beta-weighted equality constraint; returns (value, lam0, lamb).

    ``arm_b`` selects the variance rows for a heteroscedastic Gaussian
    family.
    """
    w0 = np.ascontiguousarray(w0, dtype=float)
    wb = np.ascontiguousarray(wb, dtype=float)
    mu0 = np.ascontiguousarray(mu0, dtype=float)
    mub = np.ascontiguousarray(mub, dtype=float)
    beta = np.ascontiguousarray(beta, dtype=float)
    if family.is_bernoulli:
        return _kernels.pair_bernoulli(w0, mu0, wb, mub, beta)
    J = len(beta)
    n_rows = family.sigma2.shape[0] if family.sigma2.shape[0] > 1 else arm_b + 1
    s2 = family.sigma2_matrix(n_rows, J)
    return _kernels.pair_gaussian(w0, mu0, wb, mub, beta,
                                  np.ascontiguousarray(s2[0]),
                                  np.ascontiguousarray(s2[arm_b]))


def _glr(w: np.ndarray, means: np.ndarray, beta: np.ndarray,
         family: Family) -> TransportResult:
    w = np.ascontiguousarray(w, dtype=float)
    means = np.ascontiguousarray(means, dtype=float)
    beta = np.ascontiguousarray(beta, dtype=float)
    sub = np.empty_like(means)
    if family.is_bernoulli:
        val, b, lam0, lamb = _kernels.glr_min_bernoulli(w, means, beta)
        _kernels.subgradient_bernoulli(means, b, lam0, lamb, sub)
    else:
        s2 = np.ascontiguousarray(family.sigma2_matrix(*means.shape))
        val, b, lam0, lamb = _kernels.glr_min_gaussian(w, means, beta, s2)
        _kernels.subgradient_gaussian(means, b, lam0, lamb, s2, sub)
    return TransportResult(float(val), int(b), np.vstack((lam0, lamb)), sub)


def glr_value(w: np.ndarray, instance: Instance) -> TransportResult:
    """Lambda(w, mu): minimum over non-control arms of the pair transport."""
    return _glr(w, instance.means, instance.beta, instance.family)


def pair_divergences(w: np.ndarray, instance: Instance):
    """Transport value and cell divergence matrix for every challenger.

    Returns (values, mats) where values[b-1] is the pair cost against arm b
    at weights ``w`` and mats[b-1][a, i] = d(mu_{a,i}, lambda_{a,i}) for the
    minimizing alternative (zero outside rows 0 and b).
    """
    means, beta, family = instance.means, instance.beta, instance.family
    w = np.ascontiguousarray(w, dtype=float)
    values = []
    mats = []
    for b in range(1, means.shape[0]):
        val, lam0, lamb = pair_transport(w[0], means[0], w[b], means[b],
                                         beta, family, arm_b=b)
        sub = np.empty_like(means)
        if family.is_bernoulli:
            _kernels.subgradient_bernoulli(means, b, lam0, lamb, sub)
        else:
            s2 = np.ascontiguousarray(family.sigma2_matrix(*means.shape))
            _kernels.subgradient_gaussian(means, b, lam0, lamb, s2, sub)
        values.append(float(val))
        mats.append(sub)
    return np.array(values), mats


def glr_statistic(counts: np.ndarray, empirical_means: np.ndarray,
                  beta: np.ndarray, family: Family) -> TransportResult:
    """Count-weighted GLR statistic Lambda(t); zero-count cells contribute
    zero and pin the value to 0 until all relevant cells are observed."""
    return _glr(counts, empirical_means, beta, family)


def dmid(w0: float, mu0: float, wb: float, mub: float, family: Family):
    """Single-population minimum weighted transport cost and its minimizer
    (the weighted average of the two means)."""
    from .expfam import kl
    if w0 + wb <= 0.0:
        return 0.0, mu0
    v = (w0 * mu0 + wb * mub) / (w0 + wb)
    value = 0.0
    if w0 > 0.0:
        value += w0 * kl(family, mu0, v) if mu0 != v else 0.0
    if wb > 0.0:
        value += wb * kl(family, mub, v) if mub != v else 0.0
    return value, v
