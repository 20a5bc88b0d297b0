import math

import numpy as np
import pytest

from abcs import Instance, Mode, bernoulli, gaussian
from abcs import policy as pol
from abcs.policy import (BestChallenger, Decision, ProblemMeta, TrackAndStop,
                         UniformPolicy, invert_threshold, make_policy,
                         risk_report, stopping_time)


def meta_of(instance):
    return ProblemMeta.from_instance(instance)


def drive(policy, instance, mode, n_rounds, seed=0):
    """Run a policy against the true means for n_rounds."""
    rng = np.random.default_rng(seed)
    from abcs import expfam
    for _ in range(n_rounds):
        if mode == Mode.PROPORTIONAL:
            i = int(rng.choice(instance.J, p=instance.alpha))
            d = policy.step(subpopulation=i)
        else:
            d = policy.step()
            if mode == Mode.ACTIVE:
                i = d.requested_subpopulation
            else:
                i = int(rng.choice(instance.J, p=instance.alpha))
        x = expfam.sample(instance.family, instance.means[d.action, i], rng,
                          d.action, i)
        if mode == Mode.OBLIVIOUS:
            policy.record(d.action, None, x)
        else:
            policy.record(d.action, i, x)
    return policy


def test_invert_threshold_values():
    assert invert_threshold(math.log(20.0), 1) == pytest.approx(0.05)
    assert invert_threshold(0.0, 10) == 1.0
    assert invert_threshold(0.0, 0) == 1.0
    assert invert_threshold(10.0, 3, "theory") == pytest.approx(
        min(1.0, 9.0 * math.exp(2.0 - 10.0)))
    with pytest.raises(ValueError):
        invert_threshold(1.0, 1, "exotic")


def test_threshold_theory_more_conservative():
    for lam in (5.0, 9.0, 14.0):
        assert invert_threshold(lam, 100, "theory") >= invert_threshold(
            lam, 100, "stylized")


def test_stopping_time():
    assert stopping_time([1.0, 0.5, 0.09, 0.01], 0.1) == 3
    assert stopping_time([1.0, 0.5], 0.1) is None
    assert stopping_time([], 0.1) is None


def test_risk_starts_uninformative(booking_instance):
    policy = UniformPolicy(meta_of(booking_instance), Mode.AGNOSTIC)
    report = policy.risk()
    assert report.delta_hat == 1.0
    assert report.lambda_ == 0.0
    assert report.t == 0


def test_risk_report_recommends_sorted_tuple(boxplot_instance):
    policy = drive(UniformPolicy(meta_of(boxplot_instance), Mode.AGNOSTIC),
                   boxplot_instance, Mode.AGNOSTIC, 4000, seed=4)
    report = policy.risk()
    assert report.recommended_set == tuple(sorted(report.recommended_set))
    assert 0.0 <= report.delta_hat <= 1.0
    assert report.lambda_ > 0.0


def test_oblivious_requires_bernoulli_and_matched_weights():
    inst = Instance(np.array([[0.0], [1.0]]), gaussian(1.0),
                    np.array([1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        UniformPolicy(meta_of(inst), Mode.OBLIVIOUS)
    inst2 = Instance(np.array([[0.1, 0.2], [0.3, 0.4]]), bernoulli(),
                     np.array([0.5, 0.5]), np.array([0.2, 0.8]))
    with pytest.raises(ValueError):
        UniformPolicy(meta_of(inst2), Mode.OBLIVIOUS)


def test_oblivious_collapses_state(booking_instance):
    policy = UniformPolicy(meta_of(booking_instance), Mode.OBLIVIOUS)
    assert policy.state.counts.shape == (3, 1)
    policy.record(1, None, 1.0)
    assert policy.state.counts[1, 0] == 1.0


def test_uniform_policy_cycles(boxplot_instance):
    meta = meta_of(boxplot_instance)
    agn = UniformPolicy(meta, Mode.AGNOSTIC)
    arms = []
    for _ in range(6):
        d = agn.step()
        arms.append(d.action)
        agn.record(d.action, 0, 0.0)
    assert arms == [0, 1, 2, 0, 1, 2]

    act = UniformPolicy(meta, Mode.ACTIVE)
    cells = []
    for _ in range(9):
        d = act.step()
        cells.append((d.action, d.requested_subpopulation))
        act.record(d.action, d.requested_subpopulation, 0.0)
    assert cells == [(a, i) for a in range(3) for i in range(3)]


def test_tas_forced_exploration_covers_cells(boxplot_instance):
    policy = drive(TrackAndStop(meta_of(boxplot_instance), Mode.ACTIVE),
                   boxplot_instance, Mode.ACTIVE, 400, seed=1)
    # every cell must be sampled at least sqrt(t) times
    assert policy.state.counts.min() >= math.sqrt(400) - 1


def test_tas_forced_exploration_agnostic(boxplot_instance):
    policy = drive(TrackAndStop(meta_of(boxplot_instance), Mode.AGNOSTIC),
                   boxplot_instance, Mode.AGNOSTIC, 400, seed=2)
    assert policy.state.counts.sum(axis=1).min() >= math.sqrt(400) - 1


def test_tas_proportional_needs_subpopulation(boxplot_instance):
    policy = TrackAndStop(meta_of(boxplot_instance), Mode.PROPORTIONAL)
    with pytest.raises(ValueError):
        policy.step()


def test_tas_tracking_variants(boxplot_instance):
    for tracking in ("d", "c"):
        policy = drive(
            TrackAndStop(meta_of(boxplot_instance), Mode.AGNOSTIC,
                         tracking=tracking),
            boxplot_instance, Mode.AGNOSTIC, 2000, seed=3)
        assert policy.state.t == 2000
    with pytest.raises(ValueError):
        TrackAndStop(meta_of(boxplot_instance), Mode.AGNOSTIC, tracking="e")


def test_tas_risk_improves_with_data(boxplot_instance):
    # the instance's characteristic time is ~2800 rounds, so by 30000
    # rounds the certified risk must be far below its early value
    policy = TrackAndStop(meta_of(boxplot_instance), Mode.AGNOSTIC)
    policy = drive(policy, boxplot_instance, Mode.AGNOSTIC, 500, seed=5)
    early = policy.risk().delta_hat
    policy = drive(policy, boxplot_instance, Mode.AGNOSTIC, 29_500, seed=6)
    late = policy.risk()
    assert late.delta_hat < 0.2
    assert late.delta_hat < early
    assert late.recommended_set == (1,)


def test_best_challenger_balances_control(boxplot_instance):
    policy = drive(BestChallenger(meta_of(boxplot_instance)),
                   boxplot_instance, Mode.AGNOSTIC, 3000, seed=7)
    totals = policy.state.counts.sum(axis=1)
    challenger = totals[1:].max()
    # the control is kept level with the most-sampled challenger
    assert totals[0] >= challenger - math.sqrt(3000) - 1


def test_best_challenger_rejects_dependent_modes(boxplot_instance):
    for mode in (Mode.ACTIVE, Mode.PROPORTIONAL):
        with pytest.raises(ValueError):
            BestChallenger(meta_of(boxplot_instance), mode)


def test_make_policy(boxplot_instance):
    meta = meta_of(boxplot_instance)
    assert isinstance(make_policy("tas", meta, "active"), TrackAndStop)
    assert isinstance(make_policy("bc", meta, "agnostic"), BestChallenger)
    assert isinstance(make_policy("uniform", meta, "active"), UniformPolicy)
    with pytest.raises(ValueError):
        make_policy("thompson", meta, "active")


def test_empirical_means_midpoint_default(booking_instance):
    state = pol.PolicyState.fresh(3, 4)
    means = pol.empirical_means(state, meta_of(booking_instance))
    assert np.all(means == 0.5)
    state.counts[1, 2] = 2.0
    state.sums[1, 2] = 1.0
    means = pol.empirical_means(state, meta_of(booking_instance))
    assert means[1, 2] == 0.5  # observed average, coincidentally midpoint
    state.sums[1, 2] = 2.0
    means = pol.empirical_means(state, meta_of(booking_instance))
    assert means[1, 2] == 1.0
