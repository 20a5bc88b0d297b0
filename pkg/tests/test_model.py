import numpy as np
import pytest

from abcs import Instance, Mode, bernoulli, gaussian
from abcs import model


def small_instance(means, alpha=None, beta=None, family=None):
    means = np.asarray(means, dtype=float)
    J = means.shape[1]
    alpha = np.full(J, 1.0 / J) if alpha is None else np.asarray(alpha, float)
    beta = alpha if beta is None else np.asarray(beta, float)
    return Instance(means, family or bernoulli(), alpha, beta)


def test_mode_parse():
    assert Mode.parse("Active") is Mode.ACTIVE
    assert Mode.parse("oblivious") is Mode.OBLIVIOUS
    with pytest.raises(ValueError):
        Mode.parse("passive")


def test_instance_shape_checks():
    with pytest.raises(ValueError):
        Instance(np.array([[0.5, 0.5]]), bernoulli(),
                 np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        Instance(np.array([[0.5], [0.5]]), bernoulli(),
                 np.array([0.5, 0.5]), np.array([0.5, 0.5]))


def test_dimensions(boxplot_instance):
    assert boxplot_instance.K == 2
    assert boxplot_instance.J == 3
    assert boxplot_instance.n_arms == 3


def test_weighted_means_and_answer(boxplot_instance):
    wm = model.weighted_means(boxplot_instance)
    np.testing.assert_allclose(wm, [0.8 / 3, 0.9 / 3, 0.7 / 3])
    assert model.answer_set(boxplot_instance) == frozenset({1})
    assert model.weighted_mean(boxplot_instance, 1) == pytest.approx(0.3)
    np.testing.assert_allclose(model.gaps(boxplot_instance),
                               [-0.1 / 3, 0.1 / 3])


def test_answer_set_booking(booking_instance):
    assert model.answer_set(booking_instance) == frozenset({1, 2})


def test_answer_set_of_means():
    means = np.array([[0.5], [0.4], [0.6]])
    assert model.answer_set_of_means(means, np.array([1.0])) == frozenset({2})


def test_abc_to_bai_reflection():
    inst = small_instance([[0.0], [1.0], [-0.5]], alpha=[1.0],
                          family=gaussian(1.0))
    out = model.abc_to_bai(inst)
    np.testing.assert_allclose(out.means[:, 0], [0.0, -1.0, -0.5])
    assert model.answer_set(out) == frozenset()


def test_abc_to_bai_requires_gaussian_scalar_j1():
    with pytest.raises(ValueError):
        model.abc_to_bai(small_instance([[0.1], [0.2]], alpha=[1.0]))
    het = small_instance([[0.0], [1.0]], alpha=[1.0],
                         family=gaussian(np.array([[1.0], [2.0]])))
    with pytest.raises(ValueError):
        model.abc_to_bai(het)


def test_validate_clean(booking_instance):
    diag = model.validate(booking_instance)
    assert diag.ok
    assert diag.warnings == []


def test_validate_errors():
    inst = small_instance([[0.1, 0.2], [0.3, 0.4]],
                          alpha=[0.7, 0.7], beta=[0.0, 0.0])
    diag = model.validate(inst)
    assert not diag.ok
    assert any("alpha" in e for e in diag.errors)
    assert any("beta" in e for e in diag.errors)


def test_validate_unestimable_subpopulation():
    inst = small_instance([[0.1, 0.2], [0.3, 0.4]],
                          alpha=[1.0, 0.0], beta=[0.5, 0.5])
    diag = model.validate(inst)
    assert any("unestimable" in e for e in diag.errors)


def test_validate_bernoulli_domain():
    inst = small_instance([[0.1], [1.3]], alpha=[1.0])
    diag = model.validate(inst)
    assert any("[0, 1]" in e for e in diag.errors)


def test_validate_identifiability_warning():
    inst = small_instance([[0.3], [0.3]], alpha=[1.0])
    diag = model.validate(inst)
    assert diag.ok
    assert any("not identifiable" in w for w in diag.warnings)
    near = small_instance([[0.3], [0.3 + 1e-10]], alpha=[1.0])
    assert any("nearly ties" in w for w in model.validate(near).warnings)


def test_feasibility_nesting():
    alpha = np.array([0.4, 0.6])
    u = np.array([0.2, 0.3, 0.5])
    w_agn = model.project_agnostic(u, alpha)
    assert model.is_feasible(w_agn, Mode.AGNOSTIC, alpha)
    assert model.is_feasible(w_agn, Mode.PROPORTIONAL, alpha)
    assert model.is_feasible(w_agn, Mode.ACTIVE, alpha)

    w_prop = np.array([[0.4, 0.1], [0.0, 0.3], [0.0, 0.2]])
    assert model.is_feasible(w_prop, Mode.PROPORTIONAL, alpha)
    assert not model.is_feasible(w_prop, Mode.AGNOSTIC, alpha)

    w_act = np.array([[0.9, 0.0], [0.0, 0.05], [0.0, 0.05]])
    assert model.is_feasible(w_act, Mode.ACTIVE, alpha)
    assert not model.is_feasible(w_act, Mode.PROPORTIONAL, alpha)


def test_feasibility_rejects_bad_simplex():
    alpha = np.array([1.0])
    assert not model.is_feasible(np.array([[0.6], [0.6]]), Mode.ACTIVE, alpha)
    assert not model.is_feasible(np.array([[1.2], [-0.2]]), Mode.ACTIVE, alpha)


def test_json_round_trip(booking_instance, tmp_path):
    path = tmp_path / "inst.json"
    model.save_instance(booking_instance, path)
    back = model.load_instance(path)
    np.testing.assert_array_equal(back.means, booking_instance.means)
    np.testing.assert_array_equal(back.alpha, booking_instance.alpha)
    assert back.family.is_bernoulli


def test_json_round_trip_gaussian(tmp_path):
    inst = small_instance([[0.0, 1.0], [2.0, 3.0]],
                          family=gaussian(np.array([[1.0, 2.0], [3.0, 4.0]])))
    path = tmp_path / "inst.json"
    model.save_instance(inst, path)
    back = model.load_instance(path)
    np.testing.assert_array_equal(back.sigma2(), inst.sigma2())


def test_instance_from_dict_defaults_and_checks():
    data = {"means": [[0.1], [0.2]], "alpha": [1.0]}
    inst = model.instance_from_dict(data)
    np.testing.assert_array_equal(inst.beta, inst.alpha)
    with pytest.raises(ValueError):
        model.instance_from_dict({**data, "K": 3})
    with pytest.raises(ValueError):
        model.instance_from_dict({**data, "J": 2})
    with pytest.raises(ValueError):
        model.instance_from_dict({**data, "family": "poisson"})
