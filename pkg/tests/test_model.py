import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bidflow.model import (Density, DomainError, ElectricityKernel, Interval, MarketParams,
                           StrategyProfile, TypeGrid, kernel_eval, kernel_F, kernel_partial_own,
                           kernel_qbar, validate_params)

bids = st.floats(0.05, 20.0)
loss = st.floats(0.01, 0.49)


def exact_F(x, y, d, r):
    x, y, d, r = map(Fraction, (x, y, d, r))
    u = (x - y) / (x + y)
    return d + u * u / (2 * r) - u / r


class TestKernelF:
    def test_equal_bids_give_demand(self):
        assert kernel_F(1.0, 1.0, 1.0, 0.4) == 1.0

    def test_hand_value(self):
        # u = 0.3 / 3.3 = 1/11 exactly
        expected = 1 + Fraction(1, 121) / Fraction(2, 5) - Fraction(1, 11) / Fraction(1, 5)
        assert float(expected) == pytest.approx(0.566116, abs=5e-7)
        assert kernel_F(1.8, 1.5, 1, 0.2) == pytest.approx(float(exact_F("1.8", "1.5", 1, "0.2")),
                                                           rel=1e-14)

    def test_swap_identity_random_pairs(self, rng):
        x, y = rng.uniform(0.1, 5, (2, 100))
        d, r = 1.3, 0.2
        u = (x - y) / (x + y)
        np.testing.assert_allclose(kernel_F(x, y, d, r) + kernel_F(y, x, d, r),
                                   2 * d + u * u / r, atol=1e-10)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            kernel_F(0.0, 0.0, 1, 0.2)
        with pytest.raises(DomainError):
            kernel_F(-1.0, 0.5, 1, 0.2)

    @given(bids, st.floats(0.1, 3), loss)
    def test_diagonal_is_demand(self, x, d, r):
        assert abs(kernel_F(x, x, d, r) - d) <= 1e-12


class TestQbar:
    def test_value(self):
        assert kernel_qbar(1, 0.4) == pytest.approx(2 * (1 - math.sqrt(0.2)) / 0.4, rel=1e-14)
        assert kernel_qbar(1, 0.4) == pytest.approx(2.763932, abs=5e-7)

    def test_zero_demand(self):
        assert kernel_qbar(0.0, 0.3) == 0.0

    def test_small_loss_limit(self):
        assert abs(kernel_qbar(1.0, 1e-8) - 2.0) < 1e-6

    def test_domain(self):
        with pytest.raises(DomainError):
            kernel_qbar(1.0, 0.6)

    @given(st.floats(0.01, 2), loss)
    def test_covers_both_demands(self, d, r):
        if 2 * d * r <= 1:
            assert kernel_qbar(d, r) >= 2 * d - 1e-12


class TestKernelEval:
    k = ElectricityKernel(1.0, 0.2)

    def test_equal_bids(self):
        assert kernel_eval(self.k, 1.4, 1.4) == pytest.approx(1.0, abs=1e-15)

    def test_interior_hand_value(self):
        # F(1.5, 1.8) = 1 + 0.020661 + 0.454545 > 0, so the interior branch applies
        assert kernel_F(1.5, 1.8, 1.0, 0.2) == pytest.approx(1 + 0.020661 + 0.454545, abs=1e-6)
        assert kernel_eval(self.k, 1.8, 1.5) == pytest.approx(0.566116, abs=5e-7)

    def test_zero_branch(self):
        assert kernel_F(5.0, 1.0, 1.0, 0.2) < 0
        assert kernel_eval(self.k, 5.0, 1.0) == 0.0

    def test_corner_branch(self):
        assert kernel_eval(self.k, 1.0, 5.0) == self.k.k_plus

    def test_continuous_at_branch_switch(self):
        # F(y, x) = 0 at x/y = (1 - v)/(1 + v), v = 1 - sqrt(1 - 2dr)
        v = 1 - math.sqrt(1 - 2 * 1.0 * 0.2)
        y = 2.0
        x = y * (1 - v) / (1 + v)
        assert kernel_F(y, x, 1.0, 0.2) == pytest.approx(0.0, abs=1e-12)
        assert kernel_F(x, y, 1.0, 0.2) == pytest.approx(self.k.k_plus, abs=1e-12)

    @given(bids, bids, st.floats(0.1, 3), st.floats(0.01, 0.45))
    def test_range(self, x, y, d, r):
        if 2 * d * r < 1:
            k = ElectricityKernel(d, r)
            val = kernel_eval(k, x, y)
            assert 0.0 <= val <= k.k_plus + 1e-12

    @given(bids, bids, st.sampled_from([0.5, 2.0, 10.0, 0.37, 3.3]))
    def test_scale_invariance(self, x, y, a):
        k = ElectricityKernel(1.0, 0.2)
        assert abs(kernel_eval(k, a * x, a * y) - kernel_eval(k, x, y)) <= 1e-12

    @settings(max_examples=50)
    @given(st.floats(1.0, 1.3), st.floats(1.0, 1.3))
    def test_monotone_sequences(self, y, x):
        k = ElectricityKernel(1.0, 0.1)
        own = np.linspace(x, x + 0.1, 50)
        opp = np.linspace(y, y + 0.1, 50)
        assert np.all(np.diff(kernel_eval(k, own, y)) <= 1e-15)
        assert np.all(np.diff(kernel_eval(k, x, opp)) >= -1e-15)

    def test_deterministic(self):
        a = kernel_eval(self.k, np.linspace(1, 2, 7), 1.3)
        b = kernel_eval(self.k, np.linspace(1, 2, 7), 1.3)
        assert a.tobytes() == b.tobytes()


class TestPartialOwn:
    k = ElectricityKernel(1.0, 0.2)

    def test_diagonal(self):
        for y in (0.5, 1.0, 1.7):
            assert kernel_partial_own(self.k, y, y) == pytest.approx(-1 / (2 * 0.2 * y), rel=1e-13)

    def test_hand_point_vs_central_difference(self):
        h = 1e-6
        fd = (kernel_eval(self.k, 1.8 + h, 1.5) - kernel_eval(self.k, 1.8 - h, 1.5)) / (2 * h)
        assert kernel_partial_own(self.k, 1.8, 1.5) == pytest.approx(fd, rel=1e-5)

    def test_random_interior_points(self, rng):
        x, y = rng.uniform(1.0, 1.2, (2, 1000))
        k = ElectricityKernel(1.0, 0.1)
        assert np.all(kernel_F(x, y, 1, 0.1) > 0) and np.all(kernel_F(y, x, 1, 0.1) > 0)
        h = 1e-6
        fd = (kernel_eval(k, x + h, y) - kernel_eval(k, x - h, y)) / (2 * h)
        an = kernel_partial_own(k, x, y)
        assert np.all(an < 0)
        np.testing.assert_allclose(an, fd, rtol=1e-5)

    def test_flat_branches(self):
        assert kernel_partial_own(self.k, 5.0, 1.0) == 0.0
        assert kernel_partial_own(self.k, 1.0, 5.0) == 0.0


class TestContainers:
    def test_degenerate_interval_rejected(self):
        with pytest.raises(ValueError):
            Interval(1, 1)

    def test_grid_endpoints(self):
        g = TypeGrid.uniform(Interval(1.0, 1.3), 51)
        assert g.nodes[0] == 1.0 and g.nodes[-1] == 1.3 and g.size == 51
        with pytest.raises(ValueError):
            TypeGrid(np.array([1.0, 1.0, 2.0]))
        with pytest.raises(ValueError):
            TypeGrid(np.array([1.0]))

    def test_density_normalized(self):
        g = TypeGrid(np.array([1.0, 1.1, 1.5, 2.0]))
        p = Density.from_function(g, lambda c: c ** 2)
        assert abs(g.trapezoid_weights() @ p.weights - 1) < 1e-10
        assert abs(p.quadrature_weights().sum() - 1) < 1e-10
        with pytest.raises(ValueError):
            Density(g, np.array([1.0, -1.0, 1.0, 1.0]))

    def test_profile_interpolates_and_is_exact_on_nodes(self, small):
        s = StrategyProfile.from_function(small, lambda i, c: 1.2 * c)
        nodes = small.grids[0].nodes
        assert np.array_equal(s(0, nodes), s.bids[0])
        mid = 0.5 * (nodes[0] + nodes[1])
        assert s(0, mid) == pytest.approx(1.2 * mid, rel=1e-14)

    def test_profile_rejects_out_of_interval(self, small):
        with pytest.raises(ValueError):
            StrategyProfile.from_arrays(small, [np.full(11, 5.0), np.full(11, 1.0)])

    def test_profile_immutable(self, small):
        s = StrategyProfile.truthful(small)
        with pytest.raises(ValueError):
            s.bids[0][0] = 3.0

    def test_params_roundtrip(self, small):
        again = MarketParams.from_dict(small.to_dict())
        assert again.to_dict() == small.to_dict()

    def test_unknown_key_rejected(self, small):
        with pytest.raises(KeyError):
            MarketParams.from_dict({**small.to_dict(), "colour": 1})


class TestValidate:
    def test_reports_negative_corner_flag(self):
        p = MarketParams.symmetric(1.0, 1.2, 1.0, 1.9, 1.0, 0.1)
        assert kernel_F(1.9, 1.0, 1.0, 0.1) == pytest.approx(1 + 0.4815 - 3.1034, abs=1e-4)
        rep = validate_params(p)
        assert rep.flags["no_corner_allocation"] is False
        assert not rep.ok

    def test_flags_are_independent(self):
        # types outside the bids and bid ratio above two, nothing raised
        p = MarketParams.symmetric(1.0, 3.0, 1.5, 3.5, 1.0, 0.1)
        rep = validate_params(p)
        assert rep.flags["types_within_bids"] is False
        assert rep.flags["bid_ratio_below_two"] is False
        assert rep.flags["loss_subcritical"] is True

    def test_feasible_instance(self, feasible):
        rep = validate_params(feasible)
        # the corner flag and the bid bound exclude each other (see README)
        assert rep.failed == ["no_corner_allocation"]

    def test_corner_flag_and_bid_bound_are_exclusive(self, rng):
        n = 20000
        d = rng.uniform(0.1, 2, n)
        r = rng.uniform(0.001, 0.5, n) / d
        keep = 2 * d * r < 1
        d, r = d[keep], r[keep]
        c_lo = rng.uniform(0.5, 2, d.size)
        c_hi = c_lo * rng.uniform(1.0001, 1.5, d.size)
        b_lo = c_lo * rng.uniform(0.5, 1, d.size)
        b_hi = c_hi / (1 - 2 * r * d) * rng.uniform(1, 1.5, d.size)
        # the two flags together need (2 - s) s >= 1 with s = sqrt(1 - 2rd)
        assert not np.any(kernel_F(b_hi, b_lo, d, r) >= 0)
