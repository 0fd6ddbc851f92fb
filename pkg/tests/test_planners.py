"""Planner criteria: Monte-Carlo lookahead oracles and selection rules."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from ste import kernels
from ste.belief import BeliefConfig, ParticleBelief
from ste.env import ConfigError, EnvConfig, Position, SourceTerm
from ste.planners import (LookaheadConfig, PlannerKind, dcee_cost,
                          expected_posterior_variance, predictive_entropy,
                          predictive_samples, select_action)

from helpers import plume_mean_theta

ENV = EnvConfig()
BOX = {"x": (0.0, 30.0), "y": (0.0, 30.0)}
LOOK = LookaheadConfig()


def make_theta(x, y, rate=200.0):
    return SourceTerm(x=x, y=y, rate=rate, wind_speed=0.0, wind_angle=0.0,
                      diffusivity=3.0, lifetime=10.0)


def belief_at(xys, weights=None, env=ENV):
    cfg = BeliefConfig(n_particles=max(len(xys), 2), resample_fraction=0.01,
                       mcmc_move=False, prior_box=BOX)
    thetas = np.stack([make_theta(x, y).as_array() for x, y in xys])
    if weights is None:
        weights = np.full(len(xys), 1.0 / len(xys))
    return ParticleBelief(cfg, env, thetas, np.asarray(weights, dtype=float))


def point_mass(x, y, n=16):
    return belief_at([(x, y)] * n)


def test_lookahead_config_validation():
    with pytest.raises(ConfigError):
        LookaheadConfig(n_hypothetical=0)
    with pytest.raises(ConfigError):
        LookaheadConfig(entropy_bins=1)
    with pytest.raises(ConfigError):
        LookaheadConfig(entropy_cell=0.0)


def test_predictive_samples_collapse_for_point_mass_and_tiny_noise():
    env = EnvConfig(noise_scale=0.0, noise_floor=1e-12)
    belief = point_mass(20.0, 20.0)
    cand = Position(15.0, 15.0)
    samples = predictive_samples(belief, cand, LOOK, env, np.random.default_rng(0))
    want = plume_mean_theta(cand.x, cand.y, make_theta(20.0, 20.0))
    np.testing.assert_allclose(samples, want, atol=1e-9)


def test_predictive_sample_mean_matches_mixture_mean():
    # noise kept well below the signal so clipping at zero stays negligible
    env = EnvConfig(noise_scale=0.1, noise_floor=1e-9)
    rng = np.random.default_rng(1)
    xys = [(float(x), float(y)) for x, y in rng.uniform(5, 25, (50, 2))]
    weights = rng.dirichlet(np.ones(50))
    belief = belief_at(xys, weights, env=env)
    cand = Position(10.0, 12.0)
    cfg = LookaheadConfig(n_hypothetical=10_000)
    samples = predictive_samples(belief, cand, cfg, env, np.random.default_rng(2))
    mixture_mean = sum(w * plume_mean_theta(cand.x, cand.y, make_theta(x, y))
                       for (x, y), w in zip(xys, weights))
    stderr = samples.std(ddof=1) / math.sqrt(len(samples))
    assert abs(samples.mean() - mixture_mean) < 3 * stderr


def test_predictive_samples_deterministic():
    belief = belief_at([(8.0, 8.0), (20.0, 22.0)])
    a = predictive_samples(belief, Position(5, 5), LOOK, ENV,
                           np.random.default_rng(7))
    b = predictive_samples(belief, Position(5, 5), LOOK, ENV,
                           np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_expected_posterior_variance_zero_for_point_mass():
    belief = point_mass(18.0, 9.0)
    for cand in (Position(5, 5), Position(17, 9), Position(25, 25)):
        v = expected_posterior_variance(belief, cand, LOOK, ENV,
                                        np.random.default_rng(3))
        assert v == pytest.approx(0.0, abs=1e-12)


def two_hypothesis_toy():
    # hypothesis plumes differ strongly at x=12, identically at the bisector
    return belief_at([(10.0, 15.0), (20.0, 15.0)])


def closed_form_epv(belief, cand, env):
    """Quadrature over the censored predictive density of the candidate."""
    m = np.array([plume_mean_theta(cand.x, cand.y, SourceTerm.from_array(t))
                  for t in belief.thetas])
    sigma = env.noise_scale * m + env.noise_floor
    w = belief.weights
    xs, ys = belief.thetas[:, 0], belief.thetas[:, 1]

    def trace_after(c):
        post = w * norm.pdf(c, loc=m, scale=sigma)
        post = post / post.sum()
        mx, my = post @ xs, post @ ys
        return post @ (xs - mx) ** 2 + post @ (ys - my) ** 2

    hi = float(np.max(m + 10 * sigma))
    grid = np.linspace(1e-9, hi, 40_001)
    density = np.sum([wi * norm.pdf(grid, loc=mi, scale=si)
                      for wi, mi, si in zip(w, m, sigma)], axis=0)
    values = np.array([trace_after(c) for c in grid])
    below_zero = float(np.sum(w * norm.cdf(0.0, loc=m, scale=sigma)))
    return float(np.trapezoid(density * values, grid)) + below_zero * trace_after(0.0)


def test_epv_matches_quadrature_on_two_hypothesis_toy():
    belief = two_hypothesis_toy()
    cand = Position(12.0, 15.0)
    cfg = LookaheadConfig(n_hypothetical=200_000)
    got = expected_posterior_variance(belief, cand, cfg, ENV,
                                      np.random.default_rng(4))
    want = closed_form_epv(belief, cand, ENV)
    assert got == pytest.approx(want, rel=0.01)


def test_information_never_hurts_in_expectation():
    belief = two_hypothesis_toy()
    current = (np.var(belief.thetas[:, 0] * 1.0) + np.var(belief.thetas[:, 1]))
    cfg = LookaheadConfig(n_hypothetical=20_000)
    for cand in (Position(12, 15), Position(15, 10), Position(2, 2)):
        v = expected_posterior_variance(belief, cand, cfg, ENV,
                                        np.random.default_rng(5))
        assert v <= current * (1 + 1e-9) + 0.5  # Monte-Carlo slack


def test_predictive_entropy_values():
    cfg8 = LookaheadConfig(entropy_bins=8)
    assert predictive_entropy(np.full(40, 1.23), cfg8) == 0.0
    spread = np.repeat(np.arange(8.0), 5)  # 8 equally filled bins
    assert predictive_entropy(spread, cfg8) == pytest.approx(math.log(8.0),
                                                             rel=1e-12)
    rng = np.random.default_rng(6)
    for _ in range(25):
        samples = rng.uniform(0, 3, 64)
        assert predictive_entropy(samples, LOOK) <= math.log(LOOK.entropy_bins) + 1e-12


def test_dcee_cost_point_mass_is_squared_distance():
    belief = point_mass(0.0, 0.0)
    env = EnvConfig(domain_min=(-10.0, -10.0), start_region=((-10, -5), (-10, -5)))
    cost = dcee_cost(belief, Position(3.0, 4.0), LOOK, env, np.random.default_rng(7))
    assert cost == pytest.approx(25.0, abs=1e-9)
    at_estimate = dcee_cost(belief, Position(0.0, 0.0), LOOK, env,
                            np.random.default_rng(8))
    assert at_estimate == pytest.approx(0.0, abs=1e-9)


def test_dcee_cost_decomposes_for_equidistant_candidates():
    belief = two_hypothesis_toy()  # estimate at (15, 15)
    a, b = Position(15.0, 18.0), Position(15.0, 12.0)  # both 3 m from estimate
    cost_a = dcee_cost(belief, a, LOOK, ENV, np.random.default_rng(9))
    cost_b = dcee_cost(belief, b, LOOK, ENV, np.random.default_rng(10))
    epv_a = expected_posterior_variance(belief, a, LOOK, ENV,
                                        np.random.default_rng(9))
    epv_b = expected_posterior_variance(belief, b, LOOK, ENV,
                                        np.random.default_rng(10))
    assert cost_a - cost_b == pytest.approx(epv_a - epv_b, abs=1e-12)


def test_random_planner_is_uniform():
    belief = point_mass(10.0, 10.0)
    rng = np.random.default_rng(11)
    counts = np.zeros(4)
    for _ in range(10_000):
        counts[select_action(PlannerKind.RANDOM, belief, Position(5, 5), LOOK,
                             ENV, rng)] += 1
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    assert (np.abs(counts - 2500) < 3 * sigma).all()


def test_infotaxis_picks_the_discriminating_move():
    # from the bisector of the two hypotheses, west lands equidistant from
    # both (their plumes agree there: zero information); east discriminates
    belief = belief_at([(10.0, 15.0), (18.0, 15.0)])
    cfg = LookaheadConfig(n_hypothetical=400)
    action = select_action(PlannerKind.INFOTAXIS, belief, Position(15.0, 15.0),
                           cfg, ENV, np.random.default_rng(12))
    assert action == 1  # east


def test_dcee_point_mass_descends_distance_greedily():
    belief = point_mass(20.0, 20.0)
    pos = Position(5.0, 5.0)
    action = select_action(PlannerKind.DCEE, belief, pos, LOOK, ENV,
                           np.random.default_rng(13))
    assert action == 0  # north and east tie at equal distance; lowest index wins
    rng = np.random.default_rng(14)
    for _ in range(40):
        action = select_action(PlannerKind.DCEE, belief, pos, LOOK, ENV, rng)
        dx, dy = ENV.moves[action]
        new = ENV.clamp(pos.x + dx, pos.y + dy)
        if math.hypot(pos.x - 20, pos.y - 20) > 1.0:
            assert (math.hypot(new.x - 20, new.y - 20)
                    < math.hypot(pos.x - 20, pos.y - 20))
        pos = new
    assert math.hypot(pos.x - 20, pos.y - 20) <= 1.0


def test_select_action_never_mutates_belief():
    rng = np.random.default_rng(15)
    xys = [(float(x), float(y)) for x, y in rng.uniform(5, 25, (30, 2))]
    weights = np.random.default_rng(16).dirichlet(np.ones(30))
    for kind in PlannerKind:
        belief = belief_at(xys, weights.copy())
        thetas_before = belief.thetas.copy()
        select_action(kind, belief, Position(6.0, 6.0), LOOK, ENV,
                      np.random.default_rng(17))
        np.testing.assert_array_equal(belief.thetas, thetas_before)
        np.testing.assert_array_equal(belief.weights, weights)
        assert belief.history == []


def test_criterion_is_permutation_invariant():
    rng = np.random.default_rng(18)
    n = 25
    xys = [(float(x), float(y)) for x, y in rng.uniform(5, 25, (n, 2))]
    weights = rng.dirichlet(np.ones(n))
    belief = belief_at(xys, weights)
    m = kernels.plume_mean(7.0, 9.0, belief.thetas)
    sigma = ENV.noise_scale * m + ENV.noise_floor
    cs = rng.uniform(0, 2, 11)
    base = kernels.hypothetical_position_variance(
        m, sigma, belief.weights, belief.thetas[:, 0], belief.thetas[:, 1], cs)
    perm = rng.permutation(n)
    shuffled = kernels.hypothetical_position_variance(
        m[perm], sigma[perm], belief.weights[perm],
        belief.thetas[perm, 0], belief.thetas[perm, 1], cs)
    assert shuffled == pytest.approx(base, rel=1e-12)


def test_wall_clamped_candidate_competes_as_stay():
    # at the domain corner, south and west land on the current cell
    belief = two_hypothesis_toy()
    rng = np.random.default_rng(19)
    action = select_action(PlannerKind.DCEE, belief, Position(0.0, 0.0), LOOK,
                           ENV, rng)
    assert action in (0, 1)  # staying put can never beat approaching


def test_planners_deterministic_given_seed():
    belief = two_hypothesis_toy()
    for kind in PlannerKind:
        a = select_action(kind, belief, Position(4.0, 9.0), LOOK, ENV,
                          np.random.default_rng(20))
        b = select_action(kind, belief, Position(4.0, 9.0), LOOK, ENV,
                          np.random.default_rng(20))
        assert a == b
