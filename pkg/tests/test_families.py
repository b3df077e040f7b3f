import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from glmm import get_family
from glmm.families import POISSON_FLOOR, PROB_CLIP
from utils.errors import ValidationError

FAMILIES = [
    get_family("gaussian"),
    get_family("bernoulli"),
    get_family("binomial", trials=np.full(1, 10.0)),
    get_family("poisson"),
]

etas = st.floats(min_value=-6.0, max_value=6.0, allow_nan=False)


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
@given(eta=etas)
def test_link_inverts_inverse_link(family, eta):
    mu = family.inverse_link(np.array([eta]))
    np.testing.assert_allclose(family.link(mu), [eta], atol=1e-8)


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
@given(eta=etas)
def test_link_derivative_matches_finite_difference(family, eta):
    step = 1e-6
    mu = family.inverse_link(np.array([eta]))
    slope = (family.inverse_link(np.array([eta + step])) - family.inverse_link(np.array([eta - step]))) / (2 * step)

    np.testing.assert_allclose(1.0 / family.link_derivative(mu), slope, rtol=1e-5)
    np.testing.assert_allclose(family.mean_derivative(np.array([eta])), slope, rtol=1e-5)


def test_canonical_variance_equals_mean_derivative():
    eta = np.linspace(-3.0, 3.0, 13)
    for family in FAMILIES[1:]:
        mu = family.inverse_link(eta)
        np.testing.assert_allclose(family.variance(mu), family.mean_derivative(eta), rtol=1e-10)


def test_link_names():
    assert [f.link_name for f in FAMILIES] == ["identity", "logit", "logit", "log"]
    assert FAMILIES[0].has_dispersion
    assert not FAMILIES[1].has_dispersion


def test_clipping_keeps_means_inside_the_mean_space():
    bernoulli, binomial, poisson = FAMILIES[1], FAMILIES[2], FAMILIES[3]

    p = bernoulli.clip_mean(np.array([0.0, 1.0, 0.5]))
    np.testing.assert_allclose(p, [PROB_CLIP, 1.0 - PROB_CLIP, 0.5])
    assert binomial.clip_mean(np.array([10.0]))[0] == pytest.approx(10.0 * (1.0 - PROB_CLIP))
    assert poisson.clip_mean(np.array([0.0]))[0] == POISSON_FLOOR

    assert bernoulli.at_clip_bound(np.array([40.0, 0.0])).tolist() == [True, False]
    assert poisson.at_clip_bound(np.array([-30.0, 0.0])).tolist() == [True, False]


@pytest.mark.parametrize("name, trials, y", [
    ("bernoulli", None, [0.0, 2.0]),
    ("binomial", [5.0, 5.0], [1.0, 6.0]),
    ("binomial", [5.0, 5.0], [1.5, 2.0]),
    ("poisson", None, [-1.0, 2.0]),
    ("gaussian", None, [np.inf, 0.0]),
])
def test_invalid_responses(name, trials, y):
    with pytest.raises(ValidationError):
        get_family(name, trials).validate_response(np.array(y))


def test_binomial_needs_trials():
    with pytest.raises(ValidationError):
        get_family("binomial")


def test_unknown_family():
    with pytest.raises(ValidationError):
        get_family("gamma")


def test_sampling_matches_the_mean(rng):
    eta = np.full(20000, 0.4)
    for family in (get_family("bernoulli"), get_family("poisson"), get_family("binomial", np.full(20000, 10.0))):
        draws = family.sample(eta, rng)
        mu = family.inverse_link(eta)
        assert abs(draws.mean() - mu.mean()) < 4.0 * np.sqrt(family.variance(mu).mean() / eta.size)
        family.validate_response(draws)
