"""One-parameter exponential family kernel (Bernoulli, Gaussian with known variance).

Distributions are identified by their mean. Divergences are written in
Bregman form d(mu, lam); for Bernoulli this is the binary relative entropy
and for Gaussian (mu - lam)^2 / (2 sigma^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"

# Interior clamp for Bernoulli second arguments produced by solvers;
# boundary lam has infinite divergence and never minimizes.
EPS = 1e-12


class DomainError(ValueError):
    """Mean outside the family's admissible domain."""


@dataclass(frozen=True)
class Family:
    """Exponential family spec shared by all (arm, subpopulation) cells.

    For Gaussian, ``sigma2`` holds the known per-cell variances,
    shape (K+1, J); a scalar is broadcast at construction time.
    """

    kind: str
    sigma2: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.kind not in (BERNOULLI, GAUSSIAN):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == GAUSSIAN:
            s2 = np.atleast_2d(np.asarray(
                1.0 if self.sigma2 is None else self.sigma2, dtype=float))
            if np.any(s2 <= 0):
                raise ValueError("Gaussian variances must be strictly positive")
            object.__setattr__(self, "sigma2", s2)
        elif self.sigma2 is not None:
            raise ValueError("sigma2 is only meaningful for the Gaussian family")

    @property
    def is_bernoulli(self) -> bool:
        return self.kind == BERNOULLI

    def cell_sigma2(self, arm: int, subpop: int) -> float:
        """Known variance of one cell (Gaussian only); broadcasts scalars."""
        s2 = self.sigma2
        return float(s2[arm % s2.shape[0], subpop % s2.shape[1]])

    def sigma2_matrix(self, n_arms: int, n_subpops: int) -> np.ndarray:
        """Variance matrix broadcast to (n_arms, n_subpops)."""
        return np.ascontiguousarray(
            np.broadcast_to(self.sigma2, (n_arms, n_subpops)), dtype=float)


def bernoulli() -> Family:
    return Family(BERNOULLI)


def gaussian(sigma2=1.0) -> Family:
    return Family(GAUSSIAN, sigma2=np.asarray(sigma2, dtype=float))


def _check_bernoulli_lambda(lam: float) -> None:
    if not (0.0 < lam < 1.0):
        raise DomainError(f"Bernoulli second argument {lam} outside (0, 1)")


def kl(family: Family, mu: float, lam: float, arm: int = 0, subpop: int = 0) -> float:
    """Bregman divergence d(mu, lam) between the means mu and lam.

    mu may sit on the closed domain boundary (Bernoulli 0 or 1: the
    divergence stays finite there); lam must be interior.
    """
    if family.is_bernoulli:
        _check_bernoulli_lambda(lam)
        if not (0.0 <= mu <= 1.0):
            raise DomainError(f"Bernoulli mean {mu} outside [0, 1]")
        out = 0.0
        if mu > 0.0:
            out += mu * math.log(mu / lam)
        if mu < 1.0:
            out += (1.0 - mu) * math.log((1.0 - mu) / (1.0 - lam))
        return out
    s2 = family.cell_sigma2(arm, subpop)
    return (mu - lam) ** 2 / (2.0 * s2)


def variance(family: Family, lam: float, arm: int = 0, subpop: int = 0) -> float:
    """Variance function V(lam) of the family at mean lam."""
    if family.is_bernoulli:
        return lam * (1.0 - lam)
    return family.cell_sigma2(arm, subpop)


def kl_deriv2(family: Family, mu: float, lam: float,
              arm: int = 0, subpop: int = 0) -> float:
    """Derivative of d(mu, lam) in its second argument: (lam - mu) / V(lam)."""
    if family.is_bernoulli:
        _check_bernoulli_lambda(lam)
    return (lam - mu) / variance(family, lam, arm, subpop)


def sample(family: Family, mu: float, rng: np.random.Generator,
           arm: int = 0, subpop: int = 0) -> float:
    """One draw from the cell's distribution with mean mu."""
    if family.is_bernoulli:
        if not (0.0 <= mu <= 1.0):
            raise DomainError(f"Bernoulli mean {mu} outside [0, 1]")
        return float(rng.random() < mu)
    return float(rng.normal(mu, math.sqrt(family.cell_sigma2(arm, subpop))))
