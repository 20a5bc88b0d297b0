"""Characteristic times T*(mu) and oracle weights w*(mu) for every mode.

The generic route is an AdaHedge-vs-best-response saddle solver with a
certified bracket: the lower value is the GLR at the running average of
the proposed weights (feasible by convexity), the upper value the best
mode-constrained response against any visited alternative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scipy.optimize import linprog, minimize

from . import glr
from .learner import AdaHedge, AdaHedgeBank
from .model import Instance, Mode, project_agnostic

TSTAR_CAP = 1e12
DEFAULT_TOL = 1e-4
DEFAULT_MAX_ITERS = 50_000


@dataclass
class OracleResult:
    mode: Mode
    tstar: float
    wstar: np.ndarray
    lower_value: float
    upper_value: float
    iterations: int

    @property
    def gap(self) -> float:
        if self.lower_value <= 0.0:
            return math.inf
        return (self.upper_value - self.lower_value) / self.lower_value

    @property
    def practically_infinite(self) -> bool:
        return self.tstar >= TSTAR_CAP

    def arm_marginals(self) -> np.ndarray:
        return self.wstar.sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "tstar": self.tstar,
            "wstar": self.wstar.tolist(),
            "gap": self.gap,
            "iterations": self.iterations,
        }


def _upper_response(d_matrix: np.ndarray, mode: Mode,
                    alpha: np.ndarray) -> float:
    """max over mode-feasible w of <w, d_matrix> (closed form per mode)."""
    if mode == Mode.ACTIVE:
        return float(d_matrix.max())
    if mode == Mode.PROPORTIONAL:
        return float(alpha @ d_matrix.max(axis=0))
    return float((d_matrix @ alpha).max())


def _upper_certificate(pool: list[np.ndarray], mode: Mode,
                       alpha: np.ndarray, n_arms: int, J: int) -> float:
    """max over mode-feasible w of the min over pooled divergence matrices.

    Mixing several visited alternatives gives a much tighter upper bound
    than any single best response once the optimum equalizes pairs.
    Solved as a small linear program; the matrices come from feasible
    alternatives, so the value always upper-bounds the saddle value.
    Returns (value, maximizing weights) for cutting-plane refinement.
    """
    if mode == Mode.AGNOSTIC:
        rows = [d @ alpha for d in pool]
        dim = n_arms
    else:
        rows = [d.reshape(-1) for d in pool]
        dim = n_arms * J
    # variables: (w, z); maximize z subject to z <= <w, D_m> and w feasible
    a_ub = np.hstack([-np.array(rows), np.ones((len(rows), 1))])
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    if mode == Mode.PROPORTIONAL:
        a_eq = np.zeros((J, dim + 1))
        for i in range(J):
            a_eq[i, i:dim:J] = 1.0
        b_eq = alpha
    else:
        a_eq = np.ones((1, dim + 1))
        a_eq[0, -1] = 0.0
        b_eq = np.array([1.0])
    bounds = [(0.0, None)] * dim + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(rows)), A_eq=a_eq,
                  b_eq=b_eq, bounds=bounds, method="highs")
    if not res.success:
        return math.inf, None
    x = np.clip(res.x[:dim], 0.0, None)
    if mode == Mode.AGNOSTIC:
        w = project_agnostic(x / max(x.sum(), 1e-300), alpha)
    else:
        w = x.reshape(n_arms, J)
    return float(-res.fun), w


def _params_to_w(x: np.ndarray, mode: Mode, alpha: np.ndarray,
                 n_arms: int, J: int) -> np.ndarray:
    if mode == Mode.ACTIVE:
        return x.reshape(n_arms, J)
    if mode == Mode.PROPORTIONAL:
        return x.reshape(n_arms, J) * alpha
    return project_agnostic(x, alpha)


def _polish(w_init: np.ndarray, instance: Instance, mode: Mode,
            alpha: np.ndarray) -> np.ndarray:
    """Refine saddle weights by direct max-min programming from a warm
    start (maximize z subject to every pair cost >= z)."""
    n_arms, J = instance.n_arms, instance.J
    if mode == Mode.AGNOSTIC:
        x0 = w_init.sum(axis=1)
        dim = n_arms
        def feas_eq(x):
            return np.array([np.sum(x[:dim]) - 1.0])
    elif mode == Mode.PROPORTIONAL:
        x0 = (w_init / alpha).reshape(-1)
        dim = n_arms * J
        def feas_eq(x):
            return x[:dim].reshape(n_arms, J).sum(axis=0) - 1.0
    else:
        x0 = w_init.reshape(-1)
        dim = n_arms * J
        def feas_eq(x):
            return np.array([np.sum(x[:dim]) - 1.0])

    def values(x):
        w = _params_to_w(np.clip(x[:dim], 0.0, None), mode, alpha, n_arms, J)
        vals, _ = glr.pair_divergences(w, instance)
        return vals

    scale = float(values(x0).min())
    if scale <= 0.0:
        return w_init
    x0 = np.append(x0, 1.0)
    res = minimize(
        lambda x: -x[-1], x0, method="SLSQP",
        bounds=[(0.0, 1.0)] * dim + [(None, None)],
        constraints=[{"type": "eq", "fun": feas_eq},
                     {"type": "ineq",
                      "fun": lambda x: values(x) / scale - x[-1]}],
        options={"maxiter": 300, "ftol": 1e-12})
    x = np.clip(res.x[:dim], 0.0, None)
    if mode == Mode.AGNOSTIC:
        w = project_agnostic(x / x.sum(), alpha)
    elif mode == Mode.PROPORTIONAL:
        v = x.reshape(n_arms, J)
        w = (v / v.sum(axis=0)) * alpha
    else:
        w = x.reshape(n_arms, J) / x.sum()
    return w


def solve_saddle(instance: Instance, mode: Mode, tol: float = DEFAULT_TOL,
                 max_iters: int = DEFAULT_MAX_ITERS,
                 check_every: int = 50,
                 initial_loss: np.ndarray | None = None) -> OracleResult:
    """Iterate learner proposals against exact best responses until the
    relative bracket gap drops below ``tol`` (or max_iters is reached).

    ``initial_loss`` optionally perturbs the learner's first update; used
    to probe uniqueness of the oracle weights.
    """
    if mode == Mode.OBLIVIOUS:
        return oblivious_oracle(instance, tol=tol, max_iters=max_iters)
    n_arms, J = instance.n_arms, instance.J
    alpha = instance.alpha

    if mode == Mode.ACTIVE:
        learner = AdaHedge(n_arms * J)
    elif mode == Mode.PROPORTIONAL:
        learner = AdaHedgeBank(J, n_arms)
    else:
        learner = AdaHedge(n_arms)
    if initial_loss is not None:
        learner.update(initial_loss)

    wsum = np.zeros((n_arms, J))
    lower = 0.0
    upper = math.inf
    wstar = np.full((n_arms, J), 1.0 / (n_arms * J))
    pool: list[np.ndarray] = []
    pool_cap = 512
    next_polish = 500
    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        if mode == Mode.ACTIVE:
            w = learner.propose().reshape(n_arms, J)
        elif mode == Mode.PROPORTIONAL:
            w = learner.propose().T * alpha  # w[a, i] = alpha_i * w^(i)(a)
        else:
            w = project_agnostic(learner.propose(), alpha)

        best = glr.glr_value(w, instance)
        d = best.subgradient
        upper = min(upper, _upper_response(d, mode, alpha))
        wsum += w

        if mode == Mode.ACTIVE:
            learner.update(-d.reshape(-1))
        elif mode == Mode.PROPORTIONAL:
            learner.update(-(alpha[:, None] * d.T))
        else:
            learner.update(-(d @ alpha))

        if it % check_every == 0 or it == max_iters:
            candidates = [wsum / it]
            polish_now = it >= next_polish or it == max_iters
            if polish_now:
                next_polish *= 8
                candidates.append(_polish(wstar if lower > 0.0
                                          else candidates[0],
                                          instance, mode, alpha))

            def absorb(cand):
                nonlocal lower, wstar
                values, mats = glr.pair_divergences(cand, instance)
                if values.min() > lower:
                    lower = float(values.min())
                    wstar = cand
                # degenerate zero-cost transports certify nothing: skip
                pool.extend(m for v, m in zip(values, mats) if v > 0.0)

            for cand in candidates:
                absorb(cand)
            del pool[:-pool_cap]

            if pool and polish_now:
                # cutting planes: evaluate near the certificate's
                # maximizer, add the binding alternatives there, repeat
                # until the envelope hugs the concave game value; cuts
                # are taken at interior mixtures because the maximizer
                # itself may sit on a zero-weight face where transports
                # degenerate
                for _ in range(100):
                    cert, w_lp = _upper_certificate(
                        pool, mode, alpha, n_arms, J)
                    upper = min(upper, cert)
                    if w_lp is None or (
                            lower > 0.0 and (upper - lower) / lower <= tol):
                        break
                    for g in (0.5, 0.1, 0.02):
                        absorb((1.0 - g) * w_lp + g * wstar)
                    del pool[:-pool_cap]
            elif pool:
                cert, _ = _upper_certificate(pool, mode, alpha, n_arms, J)
                upper = min(upper, cert)
            if lower > 0.0 and (upper - lower) / lower <= tol:
                break

    tstar = min(TSTAR_CAP, 1.0 / lower) if lower > 0.0 else TSTAR_CAP
    return OracleResult(mode, tstar, wstar, lower, upper, iters)


def oblivious_oracle(instance: Instance, tol: float = DEFAULT_TOL,
                     max_iters: int = DEFAULT_MAX_ITERS) -> OracleResult:
    """Oblivious-mode oracle via the Bernoulli mixture collapse to J=1."""
    if not instance.family.is_bernoulli:
        raise ValueError("oblivious oracle is only supported for Bernoulli")
    if not np.allclose(instance.alpha, instance.beta):
        raise ValueError("oblivious mode requires alpha == beta")
    collapsed = collapse_oblivious(instance)
    res = solve_saddle(collapsed, Mode.AGNOSTIC, tol=tol, max_iters=max_iters)
    return OracleResult(Mode.OBLIVIOUS, res.tstar, res.wstar,
                        res.lower_value, res.upper_value, res.iterations)


def collapse_oblivious(instance: Instance) -> Instance:
    """J=1 view with arm means alpha-mixed (Bernoulli mixtures stay
    Bernoulli)."""
    means = (instance.means @ instance.alpha)[:, None]
    return Instance(means, instance.family,
                    np.array([1.0]), np.array([1.0]))


# ---------------------------------------------------------------------------
# Closed forms: A/B testing with K=1, Gaussian

def tstar_ab_gaussian(instance: Instance, mode: Mode) -> OracleResult:
    """Closed-form characteristic time and weights for K=1 Gaussian."""
    if instance.family.is_bernoulli:
        raise ValueError("closed form requires the Gaussian family")
    if instance.K != 1:
        raise ValueError("closed form requires K=1")
    alpha, beta = instance.alpha, instance.beta
    sigma = np.sqrt(instance.sigma2())  # (2, J) std devs
    delta = float(beta @ (instance.means[0] - instance.means[1]))
    J = instance.J

    w = np.zeros((2, J))
    if mode == Mode.AGNOSTIC:
        c = np.array([float(np.sum(beta**2 * sigma[a] ** 2 / alpha))
                      for a in (0, 1)])
        tstar = 2.0 * (math.sqrt(c[0]) + math.sqrt(c[1])) ** 2
        for a in (0, 1):
            w[a] = alpha * math.sqrt(c[a]) / (math.sqrt(c[0]) + math.sqrt(c[1]))
    elif mode == Mode.PROPORTIONAL:
        tstar = 2.0 * float(np.sum(beta**2 / alpha
                                   * (sigma[0] + sigma[1]) ** 2))
        for a in (0, 1):
            w[a] = alpha * sigma[a] / (sigma[0] + sigma[1])
    elif mode == Mode.ACTIVE:
        denom = float(np.sum(np.abs(beta) * (sigma[0] + sigma[1])))
        tstar = 2.0 * denom**2
        for a in (0, 1):
            w[a] = np.abs(beta) * sigma[a] / denom
    else:
        raise ValueError("no closed form for the oblivious mode")
    if delta == 0.0:
        return OracleResult(mode, TSTAR_CAP, w, 0.0, math.inf, 0)
    tstar = min(TSTAR_CAP, tstar / delta**2)
    value = 1.0 / tstar
    return OracleResult(mode, tstar, w, value, value, 0)


# ---------------------------------------------------------------------------
# Homoscedastic Gaussian (any K): scalar equalization of the pairwise game

def _equalized_value(u0: float, deltas_sq: np.ndarray) -> np.ndarray:
    """Arm shares u_b solving Delta_b^2 / (2 (1/u0 + 1/u_b)) = c with the
    common value c chosen so the shares sum to 1 - u0."""
    target = 1.0 - u0
    cmax = float(deltas_sq.min()) * u0 / 2.0

    def total(c: float) -> float:
        inv = deltas_sq / (2.0 * c) - 1.0 / u0
        return float(np.sum(1.0 / inv))

    lo, hi = 0.0, cmax
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= 0.0 or mid >= cmax:
            break
        if total(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * cmax:
            break
    c = 0.5 * (lo + hi)
    return 1.0 / (deltas_sq / (2.0 * c) - 1.0 / u0)


def homoscedastic_oracle(instance: Instance, mode: Mode) -> OracleResult:
    """Efficient oracle for common-variance Gaussian cells.

    Reduces the weight computation to arm shares u* equalizing the K
    pairwise terms Delta_b^2 / (2 (1/u_0 + 1/u_b)), found by bisection on
    u_0 against the stationarity condition sum_b (u_b/u_0)^2 = 1.
    """
    if instance.family.is_bernoulli:
        raise ValueError("homoscedastic oracle requires the Gaussian family")
    s2 = instance.sigma2()
    if not np.allclose(s2, s2.flat[0]):
        raise ValueError("heteroscedastic variances: use solve_saddle")
    if mode in (Mode.AGNOSTIC, Mode.PROPORTIONAL) and not np.allclose(
            instance.alpha, instance.beta):
        raise ValueError("agnostic/proportional closed form needs alpha == beta")
    if mode == Mode.OBLIVIOUS:
        raise ValueError("no closed form for the oblivious mode")
    sigma2 = float(s2.flat[0])
    deltas = np.asarray(
        instance.means[0] @ instance.beta
        - instance.means[1:] @ instance.beta)
    deltas_sq = deltas**2
    if np.any(deltas_sq == 0.0):
        w = project_agnostic(np.full(instance.n_arms, 1.0 / instance.n_arms),
                             np.abs(instance.beta) / np.abs(instance.beta).sum())
        return OracleResult(mode, TSTAR_CAP, w, 0.0, math.inf, 0)

    lo, hi = 1e-12, 1.0 - 1e-12
    iters = 0
    for _ in range(200):
        iters += 1
        u0 = 0.5 * (lo + hi)
        ub = _equalized_value(u0, deltas_sq)
        stat = float(np.sum((ub / u0) ** 2))
        if stat > 1.0:
            lo = u0
        else:
            hi = u0
        if hi - lo <= 1e-12:
            break
    u0 = 0.5 * (lo + hi)
    ub = _equalized_value(u0, deltas_sq)
    u = np.concatenate(([u0], ub))
    u = u / u.sum()

    babs = np.abs(instance.beta)
    w = np.outer(u, babs / babs.sum())
    game = float(np.min(deltas_sq / (2.0 * (1.0 / u[0] + 1.0 / u[1:]))))
    value = game / (sigma2 * babs.sum() ** 2)
    tstar = 1.0 / value
    return OracleResult(mode, tstar, w, value, value, iters)
