"""Bandit instance representation, interaction modes, and constraint sets."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import expfam
from .expfam import Family

IDENT_HARD_TOL = 1e-12
IDENT_WARN_TOL = 1e-9
SIMPLEX_TOL = 1e-12


class Mode(enum.Enum):
    ACTIVE = "active"
    PROPORTIONAL = "proportional"
    AGNOSTIC = "agnostic"
    OBLIVIOUS = "oblivious"

    @classmethod
    def parse(cls, name: str) -> "Mode":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown mode {name!r}") from None


@dataclass(frozen=True)
class Instance:
    """A bandit model: means matrix over (K+1) arms x J subpopulations.

    Row 0 of ``means`` is the control arm. ``alpha`` are the exogenous
    subpopulation frequencies, ``beta`` the importance weights defining
    each arm's quality as the beta-weighted combination of its cell means.
    """

    means: np.ndarray
    family: Family
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        if means.ndim != 2 or means.shape[0] < 2:
            raise ValueError("means must be (K+1) x J with K >= 1")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        if self.alpha.shape != (self.J,) or self.beta.shape != (self.J,):
            raise ValueError("alpha and beta must have length J")

    @property
    def K(self) -> int:
        return self.means.shape[0] - 1

    @property
    def J(self) -> int:
        return self.means.shape[1]

    @property
    def n_arms(self) -> int:
        return self.means.shape[0]

    def sigma2(self) -> np.ndarray:
        """Per-cell variance matrix (Gaussian family only)."""
        return self.family.sigma2_matrix(self.n_arms, self.J)


def weighted_mean(instance: Instance, arm: int) -> float:
    """Quality of an arm: beta-weighted combination of its cell means."""
    return float(instance.beta @ instance.means[arm])


def weighted_means(instance: Instance) -> np.ndarray:
    return instance.means @ instance.beta


def answer_set(instance: Instance) -> frozenset[int]:
    """Arms whose weighted mean strictly exceeds the control's."""
    wm = weighted_means(instance)
    return frozenset(a for a in range(1, instance.n_arms) if wm[a] > wm[0])


def answer_set_of_means(means: np.ndarray, beta: np.ndarray) -> frozenset[int]:
    wm = np.asarray(means) @ np.asarray(beta)
    return frozenset(a for a in range(1, len(wm)) if wm[a] > wm[0])


def gaps(instance: Instance) -> np.ndarray:
    """Per-arm gap with the control: control quality minus arm quality."""
    wm = weighted_means(instance)
    return wm[0] - wm[1:]


def abc_to_bai(instance: Instance) -> Instance:
    """Reflect above-control arms across the control (Gaussian, J=1).

    The output instance has the control as unique best arm and the same
    characteristic time as the input's better-than-control problem.
    """
    if instance.family.is_bernoulli or instance.J != 1:
        raise ValueError("transform requires a Gaussian family with J=1")
    s2 = instance.sigma2()
    if not np.allclose(s2, s2.flat[0]):
        raise ValueError("transform requires a common known variance")
    mu = instance.means.copy()
    mu0 = mu[0, 0]
    above = mu[1:, 0] > mu0
    mu[1:, 0][above] = 2.0 * mu0 - mu[1:, 0][above]
    return Instance(mu, instance.family, instance.alpha, instance.beta)


@dataclass
class Diagnostics:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(instance: Instance) -> Diagnostics:
    """Check simplex, identifiability, and domain conditions.

    Hard errors make the instance unusable; warnings flag near-boundary
    instances (practically infinite characteristic time).
    """
    diag = Diagnostics()
    alpha, beta = instance.alpha, instance.beta
    if np.any(alpha < 0) or abs(alpha.sum() - 1.0) > SIMPLEX_TOL:
        diag.errors.append("alpha not on simplex")
    if np.all(beta == 0):
        diag.errors.append("beta has no nonzero entry")
    for i in range(instance.J):
        if alpha[i] == 0 and beta[i] != 0:
            diag.errors.append(
                f"subpopulation {i} has alpha=0 but beta!=0 (unestimable)")
    if instance.family.is_bernoulli:
        if np.any(instance.means < 0) or np.any(instance.means > 1):
            diag.errors.append("Bernoulli means outside [0, 1]")
    wm = weighted_means(instance)
    for a in range(1, instance.n_arms):
        d = abs(wm[a] - wm[0])
        if d <= IDENT_HARD_TOL:
            diag.warnings.append(
                f"arm {a} has the control's weighted mean (not identifiable)")
        elif d < IDENT_WARN_TOL:
            diag.warnings.append(f"arm {a} nearly ties the control (gap {d:.2e})")
    return diag


# ---------------------------------------------------------------------------
# Weight-matrix feasibility per mode

def is_feasible(w: np.ndarray, mode: Mode, alpha: np.ndarray,
                tol: float = 1e-9) -> bool:
    """Whether a (K+1) x J weight matrix satisfies the mode's constraints."""
    w = np.asarray(w, dtype=float)
    if np.any(w < -tol) or abs(w.sum() - 1.0) > tol:
        return False
    if mode == Mode.ACTIVE:
        return True
    col = w.sum(axis=0)
    if mode == Mode.PROPORTIONAL:
        return bool(np.all(np.abs(col - alpha) <= tol))
    # agnostic (and oblivious): independent product of arm marginal and alpha
    u = w.sum(axis=1)
    return bool(np.all(np.abs(w - np.outer(u, alpha)) <= tol))


def project_agnostic(u: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Weight matrix alpha_i * u_a from an arm marginal u."""
    return np.outer(np.asarray(u, dtype=float), np.asarray(alpha, dtype=float))


# ---------------------------------------------------------------------------
# JSON schema

def instance_to_dict(instance: Instance) -> dict:
    fam: object
    if instance.family.is_bernoulli:
        fam = "bernoulli"
    else:
        s2 = instance.family.sigma2
        fam = {"gaussian": {"sigma2": s2.tolist() if s2.size > 1
                            else float(s2.flat[0])}}
    return {
        "K": instance.K,
        "J": instance.J,
        "family": fam,
        "means": instance.means.tolist(),
        "alpha": instance.alpha.tolist(),
        "beta": instance.beta.tolist(),
    }


def instance_from_dict(data: dict) -> Instance:
    means = np.asarray(data["means"], dtype=float)
    fam_spec = data.get("family", "bernoulli")
    if fam_spec == "bernoulli":
        family = expfam.bernoulli()
    elif isinstance(fam_spec, dict) and "gaussian" in fam_spec:
        family = expfam.gaussian(fam_spec["gaussian"].get("sigma2", 1.0))
    else:
        raise ValueError(f"unknown family spec {fam_spec!r}")
    alpha = np.asarray(data["alpha"], dtype=float)
    beta = np.asarray(data.get("beta", alpha), dtype=float)
    inst = Instance(means, family, alpha, beta)
    if "K" in data and data["K"] != inst.K:
        raise ValueError("K does not match the means matrix")
    if "J" in data and data["J"] != inst.J:
        raise ValueError("J does not match the means matrix")
    return inst


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
