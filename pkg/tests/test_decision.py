import pytest
from hypothesis import given, settings, strategies as st

from decision_market.decision import (DecisionParams, TraderState, evolve_estimate,
                                      evolve_estimate_lagged, flip_probability, mispricing,
                                      reset_estimate, step_agent)

prices = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)
estimates = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)
alphas = st.floats(min_value=0.0, max_value=1.0)
betas = st.floats(min_value=0.0, max_value=50.0)
sides = st.sampled_from([-1, 1])


@pytest.mark.parametrize("price,m,expected", [(100, -1, 0), (100, 1, 200), (37.5, 1, 75)])
def test_reset_estimate(price, m, expected):
    assert reset_estimate(price, m) == expected


@pytest.mark.parametrize("price", [0.0, -5.0])
def test_reset_estimate_rejects_nonpositive_price(price):
    with pytest.raises(ValueError):
        reset_estimate(price, 1)


def test_reset_estimate_rejects_neutral_expectation():
    with pytest.raises(ValueError):
        reset_estimate(100, 0)


@pytest.mark.parametrize("s,p,a,expected", [(0, 100, 0, 0), (40, 100, 1, 100), (40, 100, 0.5, 70)])
def test_evolve_estimate(s, p, a, expected):
    assert evolve_estimate(s, p, a) == expected


@pytest.mark.parametrize("a", [-0.1, 1.5])
def test_evolve_estimate_rejects_alpha(a):
    with pytest.raises(ValueError):
        evolve_estimate(1.0, 1.0, a)


def test_evolve_estimate_lagged_examples():
    assert evolve_estimate_lagged(40, 100, 0.5, 1) == 70
    # oracle: two explicit single steps at a fixed price of 100
    twice = evolve_estimate(evolve_estimate(40, 100, 0.5), 100, 0.5)
    assert twice == 85
    assert evolve_estimate_lagged(40, 100, 0.5, 2) == pytest.approx(twice, rel=1e-15)
    assert evolve_estimate_lagged(40, 100, 0.0, 9) == 40


def test_evolve_estimate_lagged_rejects_zero_lag():
    with pytest.raises(ValueError):
        evolve_estimate_lagged(40, 100, 0.5, 0)


@pytest.mark.parametrize("s,p,expected", [(0, 100, -1), (200, 100, 1), (110, 100, 0.1)])
def test_mispricing(s, p, expected):
    assert mispricing(s, p) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("mh,beta,expected", [(0.3, 0.5, 0.0), (-1.0, 0.5, 0.5),
                                              (-3.0, 0.5, 1.0), (-5.0, 0.0, 0.0)])
def test_flip_probability_examples(mh, beta, expected):
    assert flip_probability(1, mh, beta) == expected
    assert flip_probability(-1, -mh, beta) == expected


def test_step_agent_alpha_one_freezes():
    out = step_agent(TraderState(m=1, s=200), 100, DecisionParams(alpha=1.0, beta=0.5), u=0.0)
    assert out.m == 1 and out.s == 100


def test_step_agent_fresh_seller_keeps_side():
    for beta in (0.0, 0.5, 10.0):
        out = step_agent(TraderState(m=-1, s=0), 100, DecisionParams(alpha=0.0, beta=beta), u=0.0)
        assert out.m == -1 and out.s == 0


def test_step_agent_flip_and_reset():
    # h = -0.2, w = 0.1, u = 0.05 < w
    out = step_agent(TraderState(m=1, s=80), 100, DecisionParams(alpha=0.0, beta=0.5), u=0.05)
    assert out.m == -1 and out.s == 0
    kept = step_agent(TraderState(m=1, s=80), 100, DecisionParams(alpha=0.0, beta=0.5), u=0.15)
    assert kept.m == 1 and kept.s == 80


def test_params_validation():
    with pytest.raises(ValueError):
        DecisionParams(alpha=1.2)
    with pytest.raises(ValueError):
        DecisionParams(beta=-1)
    with pytest.raises(ValueError):
        DecisionParams(dt=0)


@given(sides, st.floats(min_value=-1e3, max_value=1e3), betas)
def test_flip_probability_bounds_and_zero_region(m, h, beta):
    w = flip_probability(m, h, beta)
    assert 0.0 <= w <= 1.0
    if m * h >= 0:
        assert w == 0.0
    if beta > 0 and m * h <= -1.0 / beta:
        assert w == 1.0
    if beta == 0:
        assert w == 0.0


@given(sides, st.floats(min_value=-10, max_value=10), st.floats(min_value=-10, max_value=10), betas)
def test_flip_probability_nonincreasing(m, x1, x2, beta):
    lo, hi = sorted((x1, x2))
    assert flip_probability(1, lo, beta) >= flip_probability(1, hi, beta)


@given(estimates, prices, alphas)
def test_evolve_estimate_is_convex_combination(s, p, a):
    r = evolve_estimate(s, p, a)
    tol = 1e-12 * max(s, p)
    assert min(s, p) - tol <= r <= max(s, p) + tol


@settings(max_examples=60)
@given(estimates, prices, alphas, st.integers(min_value=1, max_value=10_000))
def test_lagged_update_matches_iteration(s, p, a, k):
    x = s
    for _ in range(k):
        x = evolve_estimate(x, p, a)
    closed = evolve_estimate_lagged(s, p, a, k)
    assert closed == pytest.approx(x, rel=1e-12, abs=1e-12 * p)


@given(sides, estimates, st.lists(prices, min_size=2, max_size=30),
       st.lists(st.floats(min_value=0, max_value=0.999), min_size=30, max_size=30), betas)
def test_alpha_one_never_flips_after_first_step(m, s, path, us, beta):
    state = TraderState(m=m, s=s)
    params = DecisionParams(alpha=1.0, beta=beta)
    state = step_agent(state, path[0], params, us[0])
    for p, u in zip(path[1:], us[1:]):
        nxt = step_agent(state, p, params, u)
        assert nxt.m == state.m
        assert mispricing(nxt.s, p) == 0.0
        state = nxt


@given(sides, estimates, st.lists(prices, min_size=1, max_size=30),
       st.lists(st.floats(min_value=0, max_value=0.999), min_size=30, max_size=30), alphas)
def test_beta_zero_never_flips(m, s, path, us, a):
    state = TraderState(m=m, s=s)
    params = DecisionParams(alpha=a, beta=0.0)
    for p, u in zip(path, us):
        state = step_agent(state, p, params, u)
        assert state.m == m


@given(sides, estimates, prices, alphas, st.floats(min_value=0.01, max_value=50))
def test_after_flip_mispricing_is_plus_minus_one(m, s, p, a, beta):
    before = TraderState(m=m, s=s)
    after = step_agent(before, p, DecisionParams(alpha=a, beta=beta), u=0.0)
    if after.m != before.m:
        assert mispricing(after.s, p) == after.m
