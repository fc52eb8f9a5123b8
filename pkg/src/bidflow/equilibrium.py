"""Best replies, best-reply iteration and the monotone gradient flow.

The flow integrates d sigma^i(c)/dt = dPi^i/db at (sigma^i(c), c) for every
player and grid node simultaneously. Started from sigma(c) = c it rises
monotonically to the smallest equilibrium; started from the top of the bid
interval it falls to the largest one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .model import Interval, MarketParams, StrategyProfile, validate_params
from .payoff import QuadratureRule, _payoff_and_gradient, drift

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs shared by the solvers.

    ``step`` defaults to 1% of the widest bid interval.
    """

    step: float | None = None
    t_max: float = 1e4
    tol: float = 1e-8
    cert_tol: float = 1e-4
    unique_tol: float = 1e-4
    record_every: int = 10
    n_scan: int = 1000
    argmax: Literal["scan", "golden"] = "scan"
    clip_patience: int = 100
    interior_margin: float = 1e-6

    def __post_init__(self):
        for name in ("t_max", "tol", "cert_tol", "unique_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.n_scan < 3:
            raise ValueError("n_scan must be at least 3")

    def euler_step(self, params: MarketParams) -> float:
        if self.step is not None:
            return self.step
        return 0.01 * max(b.width for b in params.bid_intervals)


# --------------------------------------------------------------------------
# one-dimensional maximization, batched over cost nodes


def golden_section_max(f, lo, hi, n_iter: int = 80):
    """Batched golden-section search for the max of unimodal ``f`` on [lo, hi].

    ``lo``/``hi`` are arrays (one bracket per problem); ``f`` maps an array of
    points, one per problem, to values. Returns the final brackets.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(n_iter):
        left = fc >= fd
        # left: max in [a, d], old c becomes the new d
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new = np.where(left, b - INV_PHI * (b - a), a + INV_PHI * (b - a))
        fnew = f(new)
        c, d = np.where(left, new, d), np.where(left, c, new)
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        if np.all(b - a <= 4e-16 * np.maximum(1.0, np.abs(b))):
            break
    return a, b


def _bisect_gradient(g, a, b, n_iter: int = 64):
    """Root of a decreasing ``g`` with g(a) > 0 >= g(b), batched."""
    for _ in range(n_iter):
        m = 0.5 * (a + b)
        pos = g(m) > 0
        a = np.where(pos, m, a)
        b = np.where(pos, b, m)
        if np.all(b - a <= 4e-16 * np.maximum(1.0, np.abs(b))):
            break
    return 0.5 * (a + b)


def _argmax_bids(player: int, costs: np.ndarray, opp_strategy: StrategyProfile,
                 params: MarketParams, cfg: SolverConfig, rule: QuadratureRule) -> np.ndarray:
    costs = np.asarray(costs, dtype=float)
    iv: Interval = params.bid_intervals[player]

    def value(b, c=costs):
        return _payoff_and_gradient(player, b, c, opp_strategy, params, rule, grad=False)[0]

    def grad(b, c=costs):
        return _payoff_and_gradient(player, b, c, opp_strategy, params, rule)[1]

    if cfg.argmax == "golden":
        lo = np.full(costs.shape, iv.lo)
        hi = np.full(costs.shape, iv.hi)
    else:
        xs = np.linspace(iv.lo, iv.hi, cfg.n_scan)
        vals = value(xs[:, None]).T
        best = vals.max(axis=-1, keepdims=True)
        # smallest bid among (near-)ties
        idx = np.argmax(vals >= best - 1e-12, axis=-1)
        lo = xs[np.maximum(idx - 1, 0)]
        hi = xs[np.minimum(idx + 1, cfg.n_scan - 1)]

    # where the analytic gradient changes sign across the bracket, bisect on
    # it; golden-section on the payoff elsewhere (kinks, boundary maxima)
    g_lo, g_hi = grad(lo), grad(hi)
    inner = (g_lo > 0) & (g_hi <= 0)
    x = np.empty_like(lo)
    if np.any(inner):
        c = costs[inner]
        x[inner] = _bisect_gradient(lambda b: grad(b, c), lo[inner], hi[inner])
    if not np.all(inner):
        c = costs[~inner]
        a, b = golden_section_max(lambda b: value(b, c), lo[~inner], hi[~inner])
        x[~inner] = 0.5 * (a + b)
    x = np.where((lo == iv.lo) & (g_lo <= 0) & (x - iv.lo < 1e-9), iv.lo, x)
    x = np.where((hi == iv.hi) & (g_hi >= 0) & (iv.hi - x < 1e-9), iv.hi, x)
    return iv.clip(x)


def best_reply_bid(player: int, cost: float, opp_strategy: StrategyProfile,
                   params: MarketParams, cfg: SolverConfig | None = None) -> float:
    """A maximizer over the bid interval of the ex-ante payoff."""
    cfg = cfg or SolverConfig()
    rule = QuadratureRule.for_player(params, player)
    return float(_argmax_bids(player, np.array([cost]), opp_strategy, params, cfg, rule)[0])


def best_reply_profile(player: int, opp_strategy: StrategyProfile, params: MarketParams,
                       cfg: SolverConfig | None = None) -> np.ndarray:
    """Best-reply bids of ``player`` at every node of its type grid."""
    cfg = cfg or SolverConfig()
    rule = QuadratureRule.for_player(params, player)
    return _argmax_bids(player, params.grids[player].nodes, opp_strategy, params, cfg, rule)


def best_reply_map(profile: StrategyProfile, params: MarketParams,
                   cfg: SolverConfig | None = None) -> StrategyProfile:
    """Simultaneous best reply of every player to ``profile``."""
    return StrategyProfile(profile.grids, tuple(
        best_reply_profile(i, profile, params, cfg) for i in range(params.n_players)))


def best_reply_residual(profile: StrategyProfile, params: MarketParams,
                        cfg: SolverConfig | None = None) -> list[float]:
    """Per player, sup over the grid of |sigma(c) - BR(c)|."""
    br = best_reply_map(profile, params, cfg)
    return [float(np.max(np.abs(a - b))) for a, b in zip(profile.bids, br.bids)]


# --------------------------------------------------------------------------
# best-reply iteration


@dataclass
class IterationTrace:
    profiles: list[StrategyProfile]
    status: Literal["converged", "cycle_detected", "max_iter"]
    period: int | None = None

    @property
    def n_iter(self) -> int:
        return len(self.profiles) - 1

    @property
    def final(self) -> StrategyProfile:
        return self.profiles[-1]


def best_reply_iteration(initial: StrategyProfile, params: MarketParams, max_iter: int = 200,
                         tol: float = 1e-8, cfg: SolverConfig | None = None,
                         mode: Literal["jacobi", "gauss-seidel"] = "jacobi",
                         window: int = 8, cycle_tol: float = 1e-6) -> IterationTrace:
    """Iterate the best-reply map until it settles, cycles, or runs out."""
    profiles = [initial]
    for _ in range(max_iter):
        cur = profiles[-1]
        if mode == "jacobi":
            new = best_reply_map(cur, params, cfg)
        else:
            new = cur
            for i in range(params.n_players):
                new = new.replace(i, best_reply_profile(i, new, params, cfg))
        profiles.append(new)
        step = new.sup_distance(cur)
        if step < tol:
            return IterationTrace(profiles, "converged")
        if step < cycle_tol:
            # still moving but below cycle resolution; a return to an older
            # iterate would be indistinguishable from slow convergence
            continue
        for p in range(2, min(window, len(profiles) - 1) + 1):
            if new.sup_distance(profiles[-1 - p]) < cycle_tol:
                return IterationTrace(profiles, "cycle_detected", p)
    return IterationTrace(profiles, "max_iter")


# --------------------------------------------------------------------------
# gradient flow


@dataclass
class FlowTrace:
    times: list[float] = field(default_factory=list)
    profiles: list[StrategyProfile] = field(default_factory=list)
    drift_norms: list[float] = field(default_factory=list)
    status: Literal["converged", "max_time", "left_bid_interval", "running"] = "running"
    n_steps: int = 0
    max_decrease: float = 0.0
    max_increase: float = 0.0

    def record(self, t: float, profile: StrategyProfile, norm: float):
        self.times.append(t)
        self.profiles.append(profile)
        self.drift_norms.append(norm)

    @property
    def final(self) -> StrategyProfile:
        return self.profiles[-1]

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def flow_dynamics(initial: StrategyProfile, params: MarketParams, step: float | None = None,
                  t_max: float | None = None, tol: float | None = None,
                  cfg: SolverConfig | None = None, record_every: int | None = None) -> FlowTrace:
    """Explicit Euler integration of the best-reply gradient flow.

    Bids are clipped to the bid interval after each step. The largest
    pointwise decrease of any bid over a single step is kept in
    ``max_decrease`` (and the largest increase in ``max_increase``) so that
    monotonicity can be checked without recording every step.
    """
    cfg = cfg or SolverConfig()
    h = step if step is not None else cfg.euler_step(params)
    t_max = t_max if t_max is not None else cfg.t_max
    tol = tol if tol is not None else cfg.tol
    every = record_every if record_every is not None else cfg.record_every
    if not h > 0:
        raise ValueError("step must be positive")

    rules = [QuadratureRule.for_player(params, i) for i in range(params.n_players)]
    lo = [b.lo for b in params.bid_intervals]
    hi = [b.hi for b in params.bid_intervals]
    bids = [np.array(b) for b in initial.bids]
    trace = FlowTrace()
    grids = initial.grids
    t, n, clipped_run = 0.0, 0, 0
    profile = initial
    n_max = int(math.ceil(t_max / h))

    while True:
        g = drift(profile, params, rules)
        norm = max(float(np.max(np.abs(gi))) for gi in g)
        if norm < tol:
            trace.record(t, profile, norm)
            trace.status = "converged"
            break
        if n >= n_max:
            trace.record(t, profile, norm)
            trace.status = "max_time"
            break
        if n % every == 0:
            trace.record(t, profile, norm)
        clipped = False
        for i in range(len(bids)):
            raw = bids[i] + h * g[i]
            new = np.clip(raw, lo[i], hi[i])
            clipped |= bool(np.any(new != raw))
            delta = new - bids[i]
            trace.max_decrease = max(trace.max_decrease, float(-delta.min()))
            trace.max_increase = max(trace.max_increase, float(delta.max()))
            bids[i] = new
        clipped_run = clipped_run + 1 if clipped else 0
        n += 1
        t = n * h
        profile = StrategyProfile(grids, tuple(b.copy() for b in bids))
        if clipped_run > cfg.clip_patience:
            trace.record(t, profile, norm)
            trace.status = "left_bid_interval"
            break
    trace.n_steps = n
    log.debug("flow %s after %d steps (t=%.3g, drift=%.2e)", trace.status, n, t, norm)
    return trace


# --------------------------------------------------------------------------
# extremal equilibria


@dataclass
class EquilibriumResult:
    lower: StrategyProfile
    upper: StrategyProfile
    sup_distance: float
    verdict: Literal["unique", "not_unique", "undetermined"]
    residual_lower: list[float]
    residual_upper: list[float]
    lower_status: str
    upper_status: str
    lower_interior: bool
    failed_flags: list[str]
    upper_init: str = "constant_top"

    @property
    def unique(self) -> bool:
        return self.verdict == "unique"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "sup_distance": self.sup_distance,
            "lower": {"profile": self.lower.to_pairs(), "residual": self.residual_lower,
                      "status": self.lower_status, "strictly_interior": self.lower_interior},
            "upper": {"profile": self.upper.to_pairs(), "residual": self.residual_upper,
                      "status": self.upper_status, "init": self.upper_init},
            "failed_flags": self.failed_flags,
        }


def extremal_equilibria(params: MarketParams, cfg: SolverConfig | None = None) -> EquilibriumResult:
    """Smallest and largest equilibria from flows started at the bottom and top."""
    cfg = cfg or SolverConfig()
    failed = validate_params(params).failed
    if failed:
        log.info("solving despite failed validity flags: %s", ", ".join(failed))
    low = flow_dynamics(StrategyProfile.truthful(params), params, cfg=cfg)
    high = flow_dynamics(StrategyProfile.top(params), params, cfg=cfg)
    lower, upper = low.final, high.final
    res_lo = best_reply_residual(lower, params, cfg)
    res_hi = best_reply_residual(upper, params, cfg)
    dist = lower.sup_distance(upper)
    m = cfg.interior_margin
    interior = all(np.all(b > iv.lo + m) and np.all(b < iv.hi - m)
                   for b, iv in zip(lower.bids, params.bid_intervals))

    certified = max(res_lo + res_hi) < cfg.cert_tol
    if not (low.converged and high.converged and certified):
        verdict = "undetermined"
    elif dist < cfg.unique_tol:
        verdict = "unique"
    else:
        verdict = "not_unique"
    return EquilibriumResult(lower, upper, dist, verdict, res_lo, res_hi,
                             low.status, high.status, bool(interior), failed)
