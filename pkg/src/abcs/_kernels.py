"""Numba kernels for the weighted transport problems on the hot paths.

These back both the GLR statistic (counts as weights) and the saddle-point
oracle solver (simplex weights). Edge conventions:
  * cells with beta == 0 are inactive: their minimizer is the mean itself;
  * if any active cell of the candidate pair has zero weight, the equality
    constraint is absorbed there at zero cost and the pair value is 0.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_EPS = 1e-12


@njit(cache=True)
def bern_kl(mu, lam):
    if lam < _EPS:
        lam = _EPS
    elif lam > 1.0 - _EPS:
        lam = 1.0 - _EPS
    out = 0.0
    if mu > 0.0:
        out += mu * np.log(mu / lam)
    if mu < 1.0:
        out += (1.0 - mu) * np.log((1.0 - mu) / (1.0 - lam))
    return out


@njit(cache=True)
def bern_lambda(mu, c):
    """Solve (lam - mu) / (lam (1 - lam)) = c for lam in [0, 1].

    This is the stationarity condition of lam -> w d(mu, lam) + q beta lam
    at c = -q beta / w. Boundary mu admits boundary minimizers.
    """
    if c == 0.0:
        return mu
    if mu <= 0.0:
        return 1.0 - 1.0 / c if c > 1.0 else 0.0
    if mu >= 1.0:
        return -1.0 / c if c < -1.0 else 1.0
    # interior mu: unique root of c lam^2 + (1-c) lam - mu in (0, 1)
    b = 1.0 - c
    disc = b * b + 4.0 * c * mu
    if disc < 0.0:
        disc = 0.0
    sq = np.sqrt(disc)
    if b >= 0.0:
        qq = -0.5 * (b + sq)
    else:
        qq = -0.5 * (b - sq)
    r1 = qq / c
    r2 = -mu / qq
    if 0.0 < r2 < 1.0:
        return r2
    return r1


@njit(cache=True)
def _bern_constraint(q, w0, mu0, wb, mub, beta, lam0, lamb):
    """Residual sum_i beta_i (lam0_i - lamb_i) at multiplier q; fills lam."""
    g = 0.0
    for i in range(beta.shape[0]):
        bi = beta[i]
        if bi == 0.0:
            lam0[i] = mu0[i]
            lamb[i] = mub[i]
            continue
        lam0[i] = bern_lambda(mu0[i], -q * bi / w0[i])
        lamb[i] = bern_lambda(mub[i], q * bi / wb[i])
        g += bi * (lam0[i] - lamb[i])
    return g


@njit(cache=True)
def pair_bernoulli(w0, mu0, wb, mub, beta):
    """Minimum transport cost for a Bernoulli pair under the weighted
    equality constraint; returns (value, lam0, lamb)."""
    J = beta.shape[0]
    lam0 = mu0.copy()
    lamb = mub.copy()
    dhat = 0.0
    n_active = 0
    last = -1
    for i in range(J):
        if beta[i] != 0.0:
            if w0[i] <= 0.0 or wb[i] <= 0.0:
                return 0.0, lam0, lamb
            dhat += beta[i] * (mu0[i] - mub[i])
            n_active += 1
            last = i
    if dhat == 0.0 or n_active == 0:
        return 0.0, lam0, lamb

    if n_active == 1:
        # single active cell: common location is the weighted average
        i = last
        v = (w0[i] * mu0[i] + wb[i] * mub[i]) / (w0[i] + wb[i])
        lam0[i] = v
        lamb[i] = v
        return w0[i] * bern_kl(mu0[i], v) + wb[i] * bern_kl(mub[i], v), lam0, lamb

    scale = 1.0 + abs(np.sum(beta * mu0))
    tol = 1e-10 * scale

    # g is strictly decreasing in q with g(0) = dhat; the root has dhat's sign
    qlo = 0.0
    glo = dhat
    qhi = 1e-8 if dhat > 0.0 else -1e-8
    ghi = _bern_constraint(qhi, w0, mu0, wb, mub, beta, lam0, lamb)
    n_doubling = 0
    while glo * ghi > 0.0 and n_doubling < 200:
        qlo = qhi
        glo = ghi
        qhi *= 2.0
        ghi = _bern_constraint(qhi, w0, mu0, wb, mub, beta, lam0, lamb)
        n_doubling += 1

    # Illinois-damped regula falsi on the bracket
    q = qhi
    g = ghi
    side = 0
    converged = abs(g) <= tol
    for _ in range(200):
        if converged:
            break
        if glo == ghi:
            q = 0.5 * (qlo + qhi)
        else:
            q = (qlo * ghi - qhi * glo) / (ghi - glo)
        g = _bern_constraint(q, w0, mu0, wb, mub, beta, lam0, lamb)
        if abs(g) <= tol:
            converged = True
            continue
        if g * glo > 0.0:
            qlo = q
            glo = g
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            qhi = q
            ghi = g
            if side == 1:
                glo *= 0.5
            side = 1
    if not converged:
        q = 0.5 * (qlo + qhi)
        _bern_constraint(q, w0, mu0, wb, mub, beta, lam0, lamb)

    value = 0.0
    for i in range(J):
        if beta[i] != 0.0:
            value += w0[i] * bern_kl(mu0[i], lam0[i])
            value += wb[i] * bern_kl(mub[i], lamb[i])
    return value, lam0, lamb


@njit(cache=True)
def pair_gaussian(w0, mu0, wb, mub, beta, s20, s2b):
    """Closed-form Gaussian pair transport; returns (value, lam0, lamb)."""
    J = beta.shape[0]
    lam0 = mu0.copy()
    lamb = mub.copy()
    dhat = 0.0
    S = 0.0
    for i in range(J):
        if beta[i] != 0.0:
            if w0[i] <= 0.0 or wb[i] <= 0.0:
                return 0.0, lam0, lamb
            dhat += beta[i] * (mu0[i] - mub[i])
            S += beta[i] * beta[i] * (s20[i] / w0[i] + s2b[i] / wb[i])
    if dhat == 0.0 or S == 0.0:
        return 0.0, lam0, lamb
    q = dhat / S
    for i in range(J):
        if beta[i] != 0.0:
            lam0[i] = mu0[i] - q * beta[i] * s20[i] / w0[i]
            lamb[i] = mub[i] + q * beta[i] * s2b[i] / wb[i]
    return dhat * dhat / (2.0 * S), lam0, lamb


@njit(cache=True)
def glr_min_bernoulli(w, mu, beta):
    """min_b pair transport over rows (0, b); ties to the smallest index.

    Returns (value, bstar, lam0, lamb).
    """
    n_arms = mu.shape[0]
    best = np.inf
    bstar = 1
    best0 = mu[0].copy()
    bestb = mu[1].copy()
    for b in range(1, n_arms):
        val, l0, lb = pair_bernoulli(w[0], mu[0], w[b], mu[b], beta)
        if val < best:
            best = val
            bstar = b
            best0 = l0
            bestb = lb
    return best, bstar, best0, bestb


@njit(cache=True)
def glr_min_gaussian(w, mu, beta, s2):
    n_arms = mu.shape[0]
    best = np.inf
    bstar = 1
    best0 = mu[0].copy()
    bestb = mu[1].copy()
    for b in range(1, n_arms):
        val, l0, lb = pair_gaussian(w[0], mu[0], w[b], mu[b], beta,
                                    s2[0], s2[b])
        if val < best:
            best = val
            bstar = b
            best0 = l0
            bestb = lb
    return best, bstar, best0, bestb


@njit(cache=True)
def subgradient_bernoulli(mu, bstar, lam0, lamb, out):
    """Fill out with d(mu_{a,i}, lam_{a,i}) on rows {0, bstar}, zero elsewhere."""
    out[:] = 0.0
    for i in range(mu.shape[1]):
        out[0, i] = bern_kl(mu[0, i], lam0[i])
        out[bstar, i] = bern_kl(mu[bstar, i], lamb[i])


@njit(cache=True)
def subgradient_gaussian(mu, bstar, lam0, lamb, s2, out):
    out[:] = 0.0
    for i in range(mu.shape[1]):
        d0 = mu[0, i] - lam0[i]
        db = mu[bstar, i] - lamb[i]
        out[0, i] = d0 * d0 / (2.0 * s2[0, i])
        out[bstar, i] = db * db / (2.0 * s2[bstar, i])
