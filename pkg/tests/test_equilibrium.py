import numpy as np
import pytest

from bidflow.equilibrium import (SolverConfig, best_reply_bid, best_reply_iteration,
                                 best_reply_map, best_reply_profile, best_reply_residual,
                                 extremal_equilibria, flow_dynamics, golden_section_max)
from bidflow.model import MarketParams, StrategyProfile
from bidflow.payoff import expected_payoff


def test_golden_section_finds_vertex_of_parabola():
    a, b = golden_section_max(lambda x: -(x - np.array([0.3, 1.7])) ** 2,
                              np.zeros(2), np.full(2, 2.0))
    np.testing.assert_allclose(0.5 * (a + b), [0.3, 1.7], atol=1e-8)


def test_full_information_best_reply_closed_form():
    p = MarketParams.full_information(1.0, 0.9, 1.6, demand=1.0, loss_coeff=0.1)
    opp = StrategyProfile.constant(p, 1.25)
    assert best_reply_bid(0, 1.0, opp, p) == pytest.approx(1.25, rel=1e-8)
    np.testing.assert_allclose(best_reply_profile(0, opp, p), 1.25, rtol=1e-8)


def test_best_reply_bid_matches_dense_scan(small, rng):
    opp = StrategyProfile.from_function(small, lambda i, c: 1.1 * c + 0.05)
    iv = small.bid_intervals[0]
    xs = np.linspace(iv.lo, iv.hi, 100_001)
    for cost in rng.uniform(1.0, 1.1, 5):
        vals = expected_payoff(0, xs, cost, opp, small)
        br = best_reply_bid(0, cost, opp, small)
        assert abs(br - xs[np.argmax(vals)]) < 1e-4
        assert expected_payoff(0, br, cost, opp, small) >= vals.max() - 1e-12


def test_best_reply_stays_in_bid_interval(small):
    # opponents bidding high push the best reply to the top of the interval
    iv = small.bid_intervals[0]
    for value in (iv.lo, 1.3, iv.hi):
        br = best_reply_profile(0, StrategyProfile.constant(small, value), small)
        assert np.all(br >= iv.lo) and np.all(br <= iv.hi)


def test_best_reply_increasing_in_cost(small):
    br = best_reply_profile(0, StrategyProfile.constant(small, 1.3), small)
    assert np.all(np.diff(br) > 0)


def test_best_reply_monotone_in_opponent_strategy(small, rng):
    nodes = small.grids[1].nodes
    hi = small.bid_intervals[1].hi
    for _ in range(10):
        a = nodes + rng.uniform(0, 1, nodes.size) * (hi - nodes)
        b = np.minimum(a + rng.uniform(0, 0.2, nodes.size), hi)
        lo_s = StrategyProfile.from_arrays(small, [a, a])
        hi_s = StrategyProfile.from_arrays(small, [b, b])
        assert np.all(best_reply_profile(0, lo_s, small)
                      <= best_reply_profile(0, hi_s, small) + 1e-9)


def test_iteration_stops_at_once_on_equilibrium(small):
    res = extremal_equilibria(small)
    trace = best_reply_iteration(best_reply_map(res.lower, small), small, tol=1e-6)
    assert trace.status == "converged"
    assert trace.n_iter == 1


def test_iteration_from_truthful_converges(small):
    trace = best_reply_iteration(StrategyProfile.truthful(small), small)
    assert trace.status == "converged"
    assert max(best_reply_residual(trace.final, small)) < 1e-6


def test_gauss_seidel_matches_jacobi(small):
    start = StrategyProfile.truthful(small)
    j = best_reply_iteration(start, small, mode="jacobi")
    g = best_reply_iteration(start, small, mode="gauss-seidel")
    assert g.status == "converged"
    assert j.final.sup_distance(g.final) < 1e-6


def test_flow_from_equilibrium_records_single_state(small):
    res = extremal_equilibria(small)
    trace = flow_dynamics(res.lower, small)
    assert trace.converged
    assert len(trace.profiles) == 1 and trace.n_steps == 0


def test_flow_from_truthful_is_monotone(small):
    trace = flow_dynamics(StrategyProfile.truthful(small), small)
    assert trace.converged
    assert trace.max_decrease <= 1e-9
    assert trace.drift_norms[-1] < 1e-8
    assert np.all(np.diff(trace.times) > 0)


def test_flow_from_top_is_monotone_down(small):
    trace = flow_dynamics(StrategyProfile.top(small), small)
    assert trace.converged
    assert trace.max_increase <= 1e-9


def test_flow_limit_independent_of_step(small):
    h = SolverConfig().euler_step(small)
    a = flow_dynamics(StrategyProfile.truthful(small), small, step=h).final
    b = flow_dynamics(StrategyProfile.truthful(small), small, step=h / 2).final
    assert a.sup_distance(b) < 1e-6


def test_flow_rejects_nonpositive_step(small):
    with pytest.raises(ValueError):
        flow_dynamics(StrategyProfile.truthful(small), small, step=0.0)


def test_flow_reports_leaving_bid_interval():
    # equilibrium bids lie above 1.2, so the flow presses against the ceiling
    p = MarketParams.symmetric(1.0, 1.1, 0.9, 1.2, 1.0, 0.1, n_nodes=11)
    trace = flow_dynamics(StrategyProfile.truthful(p), p)
    assert trace.status == "left_bid_interval"


def test_flow_reports_max_time(small):
    trace = flow_dynamics(StrategyProfile.truthful(small), small, t_max=0.05)
    assert trace.status == "max_time"


def test_extremal_equilibria_ordered_and_unique(small):
    res = extremal_equilibria(small)
    assert res.verdict == "unique"
    assert res.lower.leq(res.upper, tol=1e-6)
    assert max(res.residual_lower + res.residual_upper) < 1e-4
    assert res.lower_interior
    d = res.to_dict()
    assert d["verdict"] == "unique" and len(d["lower"]["profile"]) == 2


def test_extremal_full_information_constant():
    for c, r, d in [(1.0, 0.1, 1.0), (1.2, 0.2, 0.9), (0.8, 0.05, 1.4)]:
        target = c / (1 - 2 * r * d)
        p = MarketParams.full_information(c, 0.9 * c, 1.3 * target, demand=d, loss_coeff=r)
        res = extremal_equilibria(p)
        for bids in res.lower.bids + res.upper.bids:
            np.testing.assert_allclose(bids, target, rtol=1e-5)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_equilibrium_scales_with_costs(small, alpha):
    base = extremal_equilibria(small).lower
    scaled = MarketParams.symmetric(alpha * 1.0, alpha * 1.1, alpha * 0.9, alpha * 1.6,
                                    1.0, 0.1, n_nodes=11)
    other = extremal_equilibria(scaled).lower
    for b0, b1 in zip(base.bids, other.bids):
        np.testing.assert_allclose(alpha * b0, b1, atol=1e-6 * alpha)


def test_undetermined_when_flow_fails():
    p = MarketParams.symmetric(1.0, 1.1, 0.9, 1.2, 1.0, 0.1, n_nodes=11)
    res = extremal_equilibria(p)
    assert res.verdict == "undetermined"
    assert res.lower_status == "left_bid_interval"


def test_solver_config_default_step(small):
    assert SolverConfig().euler_step(small) == pytest.approx(0.01 * 0.7)
    assert SolverConfig(step=0.002).euler_step(small) == 0.002
