"""Sequential sampling policies: Track-and-Stop per interaction mode,
the best-challenger heuristic, uniform sampling, plus anytime risk
assessment and stopping.

All policies share the same round-trip: ``step()`` returns a Decision,
the environment produces an outcome, ``record()`` folds it in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expfam import Family, bernoulli
from .glr import glr_statistic
from .learner import AdaHedge, AdaHedgeBank
from .model import Instance, Mode, answer_set_of_means

THRESHOLD_STYLIZED = "stylized"
THRESHOLD_THEORY = "theory"


@dataclass(frozen=True)
class ProblemMeta:
    """What a policy is allowed to know about the problem: shape,
    frequencies, importance weights and the observation family — never
    the true means."""
    n_arms: int
    J: int
    alpha: np.ndarray
    beta: np.ndarray
    family: Family

    @classmethod
    def from_instance(cls, instance: Instance) -> "ProblemMeta":
        return cls(instance.n_arms, instance.J, instance.alpha,
                   instance.beta, instance.family)

    def collapsed(self) -> "ProblemMeta":
        return ProblemMeta(self.n_arms, 1, np.array([1.0]),
                           np.array([1.0]), self.family)


@dataclass
class PolicyState:
    counts: np.ndarray          # (n_arms, J) observations per cell
    sums: np.ndarray            # (n_arms, J) summed outcomes
    t: int = 0
    last_lambda: float = 0.0
    last_delta: float = 1.0

    @classmethod
    def fresh(cls, n_arms: int, J: int) -> "PolicyState":
        return cls(np.zeros((n_arms, J)), np.zeros((n_arms, J)))


@dataclass(frozen=True)
class Decision:
    action: int
    requested_subpopulation: int | None = None
    phase: str = "tracking"


@dataclass(frozen=True)
class RiskReport:
    recommended_set: tuple
    delta_hat: float
    lambda_: float
    t: int


def invert_threshold(lambda_: float, t: int,
                     kind: str = THRESHOLD_STYLIZED) -> float:
    """Smallest certifiable risk at GLR value ``lambda_`` and round t."""
    if t < 1:
        return 1.0
    if kind == THRESHOLD_STYLIZED:
        return min(1.0, (1.0 + math.log(t)) * math.exp(-lambda_))
    if kind == THRESHOLD_THEORY:
        return min(1.0, t * t * math.exp(2.0 - lambda_))
    raise ValueError(f"unknown threshold kind: {kind!r}")


def risk_report(state: PolicyState, meta: ProblemMeta,
                threshold: str = THRESHOLD_STYLIZED) -> RiskReport:
    """Anytime recommendation plus its certified risk level.

    Cells carrying importance weight but no observations contribute zero
    to the GLR, which pins the risk at 1 until coverage is reached.
    """
    means = empirical_means(state, meta)
    res = glr_statistic(state.counts, means, meta.beta, meta.family)
    lam = res.value
    delta_hat = invert_threshold(lam, state.t, threshold)
    rec = tuple(sorted(answer_set_of_means(means, meta.beta)))
    state.last_lambda = lam
    state.last_delta = delta_hat
    return RiskReport(rec, delta_hat, lam, state.t)


def empirical_means(state: PolicyState, meta: ProblemMeta) -> np.ndarray:
    """Per-cell averages; unobserved cells get the domain midpoint, which
    never influences the GLR (their weight there is zero)."""
    mid = 0.5 if meta.family.is_bernoulli else 0.0
    counts = np.maximum(state.counts, 1.0)
    return np.where(state.counts > 0, state.sums / counts, mid)


def stopping_time(delta_trace, delta: float) -> int | None:
    """First round (1-based) at which the risk trace crosses delta."""
    for k, d in enumerate(delta_trace):
        if d <= delta:
            return k + 1
    return None


class _Policy:
    """Shared bookkeeping for all sampling rules."""

    mode: Mode

    def __init__(self, meta: ProblemMeta, mode: Mode | str,
                 threshold: str = THRESHOLD_STYLIZED):
        mode = Mode.parse(mode) if isinstance(mode, str) else mode
        if mode == Mode.OBLIVIOUS:
            if not meta.family.is_bernoulli:
                raise ValueError("oblivious policies require Bernoulli data")
            if not np.allclose(meta.alpha, meta.beta):
                raise ValueError("oblivious mode requires alpha == beta")
            meta = meta.collapsed()
        self.mode = mode
        self.meta = meta
        self.threshold = threshold
        self.state = PolicyState.fresh(meta.n_arms, meta.J)

    def record(self, arm: int, subpopulation: int | None, outcome: float):
        i = 0 if subpopulation is None or self.meta.J == 1 else subpopulation
        self.state.counts[arm, i] += 1
        self.state.sums[arm, i] += outcome
        self.state.t += 1

    def risk(self) -> RiskReport:
        return risk_report(self.state, self.meta, self.threshold)

    def step(self, subpopulation: int | None = None) -> Decision:
        raise NotImplementedError


class TrackAndStop(_Policy):
    """Forced exploration + D-tracking of lazily updated oracle weights.

    The online learner is refreshed once per tracking round with the
    loss at the current empirical means; there is no inner solve to
    convergence. ``tracking="c"`` switches the deficit target from
    t·w_t to the cumulative sum of proposed weights.
    """

    def __init__(self, meta: ProblemMeta, mode: Mode | str,
                 threshold: str = THRESHOLD_STYLIZED, tracking: str = "d"):
        super().__init__(meta, mode, threshold)
        if tracking not in ("d", "c"):
            raise ValueError(f"unknown tracking variant: {tracking!r}")
        self.tracking = tracking
        n, J = self.meta.n_arms, self.meta.J
        core = self.mode if self.mode != Mode.OBLIVIOUS else Mode.AGNOSTIC
        self._core = core
        if core == Mode.ACTIVE:
            self._wsum = np.zeros((n, J))
        elif core == Mode.PROPORTIONAL:
            self._wsum = np.zeros((n, J))
        else:
            self._wsum = np.zeros(n)
        if core == Mode.ACTIVE:
            self.learner = AdaHedge(n * J)
        elif core == Mode.PROPORTIONAL:
            self.learner = AdaHedgeBank(J, n)
        else:
            self.learner = AdaHedge(n)
        self._pending = None  # w proposed last tracking round

    def _refresh(self):
        """Send the loss for the previously proposed weights, computed at
        the means as estimated now."""
        if self._pending is None:
            return
        w = self._pending
        self._pending = None
        means = empirical_means(self.state, self.meta)
        if self._core == Mode.PROPORTIONAL:
            full = w.T * self.meta.alpha
        elif self._core == Mode.ACTIVE:
            full = w
        else:
            full = np.outer(w, self.meta.alpha)
        res = glr_statistic(full, means, self.meta.beta, self.meta.family)
        d = res.subgradient
        if self._core == Mode.ACTIVE:
            self.learner.update(-d.reshape(-1))
        elif self._core == Mode.PROPORTIONAL:
            self.learner.update(-(self.meta.alpha[:, None] * d.T))
        else:
            self.learner.update(-(d @ self.meta.alpha))

    def step(self, subpopulation: int | None = None) -> Decision:
        t = self.state.t + 1
        counts = self.state.counts
        if self._core == Mode.ACTIVE:
            lagging = np.argwhere(counts <= math.sqrt(t))
            if len(lagging):
                a, i = lagging[0]
                return Decision(int(a), int(i), "forced")
            self._refresh()
            w = self.learner.propose().reshape(counts.shape)
            self._pending = w
            self._wsum += w
            target = self._wsum if self.tracking == "c" else t * w
            a, i = np.unravel_index(np.argmin(counts - target), counts.shape)
            return Decision(int(a), int(i), "tracking")

        if self._core == Mode.PROPORTIONAL:
            if subpopulation is None:
                raise ValueError("proportional policies need the revealed "
                                 "subpopulation")
            j = subpopulation
            column = counts[:, j]
            tj = column.sum()
            lagging = np.flatnonzero(column <= math.sqrt(tj))
            if len(lagging):
                return Decision(int(lagging[0]), None, "forced")
            self._refresh()
            v = self.learner.propose()  # (J, n_arms) conditional weights
            self._pending = v
            self._wsum += (v.T * self.meta.alpha)
            if self.tracking == "c":
                target = self._wsum[:, j]
            else:
                # deficit against the conditional target within this
                # subpopulation's own clock
                target = tj * v[j]
            return Decision(int(np.argmin(column - target)), None, "tracking")

        # agnostic core (also drives the oblivious collapse)
        totals = counts.sum(axis=1)
        lagging = np.flatnonzero(totals <= math.sqrt(t))
        if len(lagging):
            return Decision(int(lagging[0]), None, "forced")
        self._refresh()
        w = self.learner.propose()
        self._pending = w
        self._wsum += w
        target = self._wsum if self.tracking == "c" else t * w
        return Decision(int(np.argmin(totals - target)), None, "tracking")


class BestChallenger(_Policy):
    """Samples the control or the arm currently minimizing the GLR,
    whichever lags in counts; agnostic interaction only."""

    def __init__(self, meta: ProblemMeta, mode: Mode | str = Mode.AGNOSTIC,
                 threshold: str = THRESHOLD_STYLIZED):
        mode = Mode.parse(mode) if isinstance(mode, str) else mode
        if mode not in (Mode.AGNOSTIC, Mode.OBLIVIOUS):
            raise ValueError("the best-challenger rule needs the "
                             "subpopulation-independent GLR (agnostic or "
                             "oblivious interaction)")
        super().__init__(meta, mode, threshold)

    def step(self, subpopulation: int | None = None) -> Decision:
        t = self.state.t + 1
        totals = self.state.counts.sum(axis=1)
        lagging = np.flatnonzero(totals <= math.sqrt(t))
        if len(lagging):
            return Decision(int(lagging[0]), None, "forced")
        means = empirical_means(self.state, self.meta)
        res = glr_statistic(self.state.counts, means, self.meta.beta,
                            self.meta.family)
        b = res.pair_arm
        a = 0 if totals[0] < totals[b] else b
        return Decision(int(a), None, "tracking")


class UniformPolicy(_Policy):
    """Round-robin over arms (over cells in the active mode)."""

    def step(self, subpopulation: int | None = None) -> Decision:
        t = self.state.t
        n, J = self.meta.n_arms, self.meta.J
        if self.mode == Mode.ACTIVE:
            cell = t % (n * J)
            return Decision(cell // J, cell % J, "tracking")
        return Decision(t % n, None, "tracking")


def make_policy(name: str, meta: ProblemMeta, mode: Mode | str,
                threshold: str = THRESHOLD_STYLIZED,
                tracking: str = "d") -> _Policy:
    """Factory used by the simulator and the command line."""
    if name == "tas":
        return TrackAndStop(meta, mode, threshold, tracking)
    if name == "bc":
        return BestChallenger(meta, mode, threshold)
    if name == "uniform":
        return UniformPolicy(meta, mode, threshold)
    raise ValueError(f"unknown policy: {name!r}")
