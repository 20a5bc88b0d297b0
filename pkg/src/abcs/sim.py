"""Environments, the per-mode episode runner, instance generators, and
the experiment drivers behind the command line.

Episodes honor the interaction order of each mode exactly: in the
active mode the policy picks both the arm and the subpopulation; in the
proportional mode the subpopulation is revealed before the arm choice;
in the agnostic mode after; in the oblivious mode never.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import expfam
from .expfam import Family, bernoulli, kl
from .model import Instance, Mode, answer_set, answer_set_of_means
from .policy import ProblemMeta, make_policy, _Policy

DEFAULT_HORIZON = 10_000_000


class ExhaustedError(RuntimeError):
    """A replay pool ran dry for a requested cell."""


class SyntheticEnv:
    """Samples outcomes from a known instance; subpopulations i.i.d. α."""

    def __init__(self, instance: Instance, rng: np.random.Generator):
        self.instance = instance
        self.rng = rng
        self._cum = np.cumsum(instance.alpha)

    @property
    def alpha(self) -> np.ndarray:
        return self.instance.alpha

    def meta(self) -> ProblemMeta:
        return ProblemMeta.from_instance(self.instance)

    def draw_subpopulation(self) -> int:
        return int(np.searchsorted(self._cum, self.rng.random()))

    def sample(self, arm: int, subpop: int) -> float:
        return expfam.sample(self.instance.family,
                             self.instance.means[arm, subpop],
                             self.rng, arm, subpop)

    def truth(self) -> tuple:
        return tuple(sorted(answer_set(self.instance)))


class ReplayEnv:
    """Replays a recorded event log, consuming each observation at most
    once within per-cell shuffles; signals exhaustion when a needed pool
    runs dry."""

    def __init__(self, pools: dict, family: Family,
                 rng: np.random.Generator, bootstrap: bool = False):
        arms = 1 + max(a for a, _ in pools)
        J = 1 + max(i for _, i in pools)
        self.n_arms, self.J = arms, J
        self.family = family
        self.rng = rng
        self.bootstrap = bootstrap
        self.pools = {}
        self.pos = {}
        counts = np.zeros((arms, J))
        sums = np.zeros((arms, J))
        for (a, i), outcomes in pools.items():
            arr = np.asarray(outcomes, dtype=float)
            rng.shuffle(arr)
            self.pools[(a, i)] = arr
            self.pos[(a, i)] = 0
            counts[a, i] = len(arr)
            sums[a, i] = arr.sum()
        self.capacity = int(counts.sum())
        col = counts.sum(axis=0)
        self.alpha = col / col.sum()
        self.means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        self.exhausted = False

    def meta(self) -> ProblemMeta:
        return ProblemMeta(self.n_arms, self.J, self.alpha, self.alpha,
                           self.family)

    def draw_subpopulation(self) -> int:
        return int(np.searchsorted(np.cumsum(self.alpha), self.rng.random()))

    def sample(self, arm: int, subpop: int) -> float:
        pool = self.pools.get((arm, subpop))
        if pool is None or (not self.bootstrap
                            and self.pos[(arm, subpop)] >= len(pool)):
            self.exhausted = True
            raise ExhaustedError(f"no samples left for cell ({arm}, {subpop})")
        if self.bootstrap:
            return float(pool[self.rng.integers(len(pool))])
        k = self.pos[(arm, subpop)]
        self.pos[(arm, subpop)] = k + 1
        return float(pool[k])

    def truth(self) -> tuple:
        return tuple(sorted(answer_set_of_means(self.means, self.alpha)))


def load_event_log(path, seed: int = 0, family: Family | None = None,
                   bootstrap: bool = False) -> ReplayEnv:
    """Build a replay environment from a `subpopulation,arm,outcome` CSV."""
    family = family or bernoulli()
    pools: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != [
                "subpopulation", "arm", "outcome"]:
            raise ValueError(f"{path}: expected header subpopulation,arm,outcome")
        for lineno, row in enumerate(reader, start=2):
            try:
                i, a, x = int(row[0]), int(row[1]), float(row[2])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: bad row {row!r}") from exc
            if i < 0 or a < 0:
                raise ValueError(f"{path}:{lineno}: negative arm or "
                                 "subpopulation id")
            if family.is_bernoulli and x not in (0.0, 1.0):
                raise ValueError(f"{path}:{lineno}: outcome {x} is not "
                                 "binary")
            pools.setdefault((a, i), []).append(x)
    if not pools:
        raise ValueError(f"{path}: empty event log")
    return ReplayEnv(pools, family, np.random.default_rng(seed),
                     bootstrap=bootstrap)


@dataclass
class RunRecord:
    policy: str
    mode: str
    seed: int
    stop_time: int | None
    censored: bool
    recommendation: tuple
    correct: bool
    delta_final: float
    instance_id: int = 0
    trace: list | None = None


def run_episode(env, policy: _Policy, mode: Mode | str, delta: float,
                horizon: int = DEFAULT_HORIZON, seed: int = 0,
                policy_name: str = "tas", keep_trace: bool = False,
                risk_every: int = 1, instance_id: int = 0) -> RunRecord:
    """Play one episode until the risk crosses delta, the horizon is hit,
    or a replay pool is exhausted."""
    mode = Mode.parse(mode) if isinstance(mode, str) else mode
    if policy.mode != mode:
        raise ValueError(f"policy built for mode {policy.mode.value!r}, "
                         f"episode requested {mode.value!r}")
    trace = [] if keep_trace else None
    stop_time = None
    report = None
    exhausted = False
    for t in range(1, horizon + 1):
        try:
            if mode == Mode.ACTIVE:
                d = policy.step()
                a, i = d.action, d.requested_subpopulation
                x = env.sample(a, i)
                policy.record(a, i, x)
            elif mode == Mode.PROPORTIONAL:
                i = env.draw_subpopulation()
                d = policy.step(i)
                a = d.action
                x = env.sample(a, i)
                policy.record(a, i, x)
            elif mode == Mode.AGNOSTIC:
                d = policy.step()
                a = d.action
                i = env.draw_subpopulation()
                x = env.sample(a, i)
                policy.record(a, i, x)
            else:  # oblivious: the subpopulation stays hidden
                d = policy.step()
                a = d.action
                i = env.draw_subpopulation()
                x = env.sample(a, i)
                policy.record(a, None, x)
        except ExhaustedError:
            exhausted = True
            break
        if t % risk_every == 0 or t == horizon:
            report = policy.risk()
            if trace is not None:
                shown = "" if mode == Mode.OBLIVIOUS else i
                trace.append((t, report.lambda_, report.delta_hat,
                              ";".join(map(str, report.recommended_set)),
                              d.phase, a, shown))
            if report.delta_hat <= delta:
                stop_time = t
                break
    if report is None:
        report = policy.risk()
    truth = env.truth()
    return RunRecord(
        policy=policy_name, mode=mode.value, seed=seed,
        stop_time=stop_time, censored=stop_time is None or exhausted,
        recommendation=report.recommended_set,
        correct=tuple(report.recommended_set) == tuple(truth),
        delta_final=report.delta_hat, instance_id=instance_id, trace=trace)


# ---------------------------------------------------------------------------
# Random instance generation

def gen_instance_uniform(K: int, J: int, rng: np.random.Generator,
                         alpha=None, beta=None) -> Instance:
    """Bernoulli instance with i.i.d. Uniform(0,1) cell means; resamples
    (up to 100 times) draws that are borderline unidentifiable."""
    alpha = np.full(J, 1.0 / J) if alpha is None else np.asarray(alpha, float)
    beta = alpha if beta is None else np.asarray(beta, float)
    inst = None
    for _ in range(100):
        means = rng.random((K + 1, J))
        inst = Instance(means, bernoulli(), alpha, beta)
        gaps = means[1:] @ beta - means[0] @ beta
        if np.all(np.abs(gaps) > 1e-9):
            return inst
    return inst


def gen_alpha_dirichlet(J: int, concentration: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Symmetric Dirichlet draw on the J-simplex."""
    return rng.dirichlet(np.full(J, float(concentration)))


# ---------------------------------------------------------------------------
# Experiment drivers

def practical_bound(tstar: float, delta: float) -> float:
    """Fixed point of t = T* ln((1 + ln t)/delta), reached by monotone
    iteration from T* ln(1/delta)."""
    t = tstar * math.log(1.0 / delta)
    for _ in range(100):
        nxt = tstar * math.log((1.0 + math.log(max(t, 1.0))) / delta)
        if abs(nxt - t) <= 1.0:
            return nxt
        t = nxt
    return t


def lower_bound(tstar: float, delta: float) -> float:
    """Information bound kl(delta, 1-delta) * T*."""
    return kl(bernoulli(), delta, 1.0 - delta) * tstar


def experiment_calibrate(n_instances: int, K: int, delta_grid,
                         seed: int = 0, horizon: int = 1_000_000,
                         threshold: str = "stylized") -> list[dict]:
    """Risk-calibration study: single-population instances, one episode
    each; records the first crossing of every risk level and whether the
    recommendation was correct at that moment."""
    delta_grid = sorted(delta_grid, reverse=True)
    rows = []
    master = np.random.SeedSequence(seed)
    for idx, child in enumerate(master.spawn(n_instances)):
        rng = np.random.default_rng(child)
        inst = gen_instance_uniform(K, 1, rng)
        truth = tuple(sorted(answer_set(inst)))
        env = SyntheticEnv(inst, rng)
        policy = make_policy("tas", env.meta(), Mode.AGNOSTIC,
                             threshold=threshold)
        pending = list(delta_grid)  # levels not yet crossed
        for t in range(1, horizon + 1):
            d = policy.step()
            a = d.action
            i = env.draw_subpopulation()
            policy.record(a, i, env.sample(a, i))
            report = policy.risk()
            while pending and report.delta_hat <= pending[0]:
                rows.append({"instance_id": idx,
                             "delta_level": pending.pop(0),
                             "t_cross": t,
                             "correct": tuple(report.recommended_set)
                             == truth})
            if not pending:
                break
        for level in pending:
            rows.append({"instance_id": idx, "delta_level": level,
                         "t_cross": None, "correct": None})
    return rows


SWEEP_POLICIES = (("tas", "active"), ("tas", "proportional"),
                  ("tas", "agnostic"), ("bc", "agnostic"),
                  ("uniform", "agnostic"))


def experiment_sweep(n_instances: int, seed: int = 0, delta: float = 0.1,
                     horizon: int = DEFAULT_HORIZON,
                     K: int = 2) -> list[RunRecord]:
    """Stopping-time sweep over random instances with random J in 2..10
    and Dirichlet(10) frequencies, one episode per policy."""
    records = []
    master = np.random.SeedSequence(seed)
    for idx, child in enumerate(master.spawn(n_instances)):
        setup_rng = np.random.default_rng(child)
        J = int(setup_rng.integers(2, 11))
        alpha = gen_alpha_dirichlet(J, 10.0, setup_rng)
        inst = gen_instance_uniform(K, J, setup_rng, alpha=alpha)
        for arm_idx, (pol_name, mode) in enumerate(SWEEP_POLICIES):
            run_rng = np.random.default_rng(
                np.random.SeedSequence((seed, idx, arm_idx)))
            env = SyntheticEnv(inst, run_rng)
            policy = make_policy(pol_name, env.meta(), mode)
            records.append(run_episode(
                env, policy, mode, delta, horizon, seed=idx,
                policy_name=pol_name, instance_id=idx))
    return records


def experiment_fixed_instance(instance: Instance, policies, delta: float,
                              reps: int, seed: int = 0,
                              horizon: int = DEFAULT_HORIZON):
    """Repeated episodes on one instance plus the per-mode information
    and practical bounds; feeds the stopping-time boxplot."""
    from .oracle import solve_saddle

    records = []
    bounds = {}
    for arm_idx, (pol_name, mode) in enumerate(policies):
        mode = Mode.parse(mode) if isinstance(mode, str) else mode
        if mode.value not in bounds:
            tstar = solve_saddle(instance, mode).tstar
            bounds[mode.value] = {
                "tstar": tstar,
                "lower": lower_bound(tstar, delta),
                "practical": practical_bound(tstar, delta),
            }
        for rep in range(reps):
            rng = np.random.default_rng(
                np.random.SeedSequence((seed, rep, arm_idx)))
            env = SyntheticEnv(instance, rng)
            policy = make_policy(pol_name, env.meta(), mode)
            records.append(run_episode(env, policy, mode, delta, horizon,
                                       seed=rep, policy_name=pol_name,
                                       instance_id=0))
    return records, bounds


# ---------------------------------------------------------------------------
# CSV emission (the tabular contract consumed by the plotting package)

RUNS_COLUMNS = ("policy", "mode", "instance_id", "seed", "stop_time",
                "censored", "correct", "delta_final")


def write_runs_csv(path, records: list[RunRecord]):
    records = sorted(records, key=lambda r: (r.instance_id, r.seed,
                                             r.policy, r.mode))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNS_COLUMNS)
        for r in records:
            writer.writerow([r.policy, r.mode, r.instance_id, r.seed,
                             "" if r.stop_time is None else r.stop_time,
                             int(r.censored), int(r.correct),
                             f"{r.delta_final:.6g}"])


def write_calibration_csv(path, rows: list[dict]):
    rows = sorted(rows, key=lambda r: (r["instance_id"], -r["delta_level"]))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("instance_id", "delta_level", "t_cross", "correct"))
        for r in rows:
            writer.writerow([r["instance_id"], f"{r['delta_level']:.6g}",
                             "" if r["t_cross"] is None else r["t_cross"],
                             "" if r["correct"] is None
                             else int(r["correct"])])


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "Lambda", "delta_hat", "recommended_set",
                         "phase", "A_t", "I_t"))
        for row in trace:
            t, lam, dh, rec, phase, a, i = row
            writer.writerow([t, f"{lam:.8g}", f"{dh:.8g}", rec, phase, a, i])
