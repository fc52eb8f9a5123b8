"""Pointwise and ex-ante expected payoffs, and the own-bid gradient.

The ex-ante payoff integrates the pointwise profit over the opponents' types
with composite trapezoid weights on their grids. All functions broadcast over
``own_bid`` and ``cost``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MarketParams, StrategyProfile, kernel_eval


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Tensor-product trapezoid rule over the opponents of one player.

    ``index[k]`` holds the grid node index of every opponent at quadrature
    point ``k``; ``weights`` already include the opponents' densities.
    """

    player: int
    index: np.ndarray
    weights: np.ndarray

    @classmethod
    def for_player(cls, params: MarketParams, player: int) -> "QuadratureRule":
        index, weights = params.opponent_quadrature(player)
        return cls(player, index, weights)

    def opponent_bids(self, params: MarketParams, strategy: StrategyProfile) -> np.ndarray:
        """Opponent bids at every quadrature point, shape (M, n_players - 1)."""
        cols = [strategy.bids[j][self.index[:, k]]
                for k, j in enumerate(params.opponents(self.player))]
        return np.stack(cols, axis=-1) if cols else np.zeros((1, 0))


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def pointwise_payoff(own_bid, cost, opp_bid, model):
    """Profit (own_bid - cost) * K(own_bid, opp_bid) for one opponent realization."""
    own_bid = np.asarray(own_bid, dtype=float)
    return _out((own_bid - cost) * kernel_eval(model, own_bid, opp_bid))


def _payoff_and_gradient(player, own_bid, cost, opp_strategy, params, rule=None, grad=True):
    # the kernel does not depend on cost, so integrate it once per own bid
    # and apply the margin afterwards: Pi = (b - c) E[K], Pi' = E[K] + (b - c) E[dK]
    rule = rule or QuadratureRule.for_player(params, player)
    own = np.asarray(own_bid, dtype=float)
    margin = own - np.asarray(cost, dtype=float)
    y = rule.opponent_bids(params, opp_strategy)
    kern = params.kernel
    ek = kern.evaluate(own[..., None], y) @ rule.weights
    value = margin * ek
    if not grad:
        return value, None
    edk = kern.partial_own(own[..., None], y) @ rule.weights
    return value, ek + margin * edk


def expected_payoff(player: int, own_bid, cost, opp_strategy: StrategyProfile,
                    params: MarketParams, rule: QuadratureRule | None = None):
    """Ex-ante payoff of ``player`` of type ``cost`` bidding ``own_bid``."""
    value, _ = _payoff_and_gradient(player, own_bid, cost, opp_strategy, params, rule, grad=False)
    return _out(value)


def expected_payoff_gradient(player: int, own_bid, cost, opp_strategy: StrategyProfile,
                             params: MarketParams, rule: QuadratureRule | None = None):
    """d/d(own_bid) of the ex-ante payoff: E[K + (b - c) dK/db]."""
    _, g = _payoff_and_gradient(player, own_bid, cost, opp_strategy, params, rule)
    return _out(g)


def drift(profile: StrategyProfile, params: MarketParams,
          rules: list[QuadratureRule] | None = None) -> tuple[np.ndarray, ...]:
    """Own-bid gradient at every (player, grid node) for the current profile."""
    rules = rules or [QuadratureRule.for_player(params, i) for i in range(params.n_players)]
    return tuple(
        _payoff_and_gradient(i, profile.bids[i], params.grids[i].nodes, profile, params, rules[i])[1]
        for i in range(params.n_players)
    )
