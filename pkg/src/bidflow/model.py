"""Static game data and the two-node electricity market kernel.

Everything here is immutable after construction. Kernel evaluators accept
numpy arrays and broadcast; scalars in, floats out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class DomainError(ValueError):
    """Raised when a kernel or parameter formula is evaluated outside its domain."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval bounds must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise ValueError(f"interval requires lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def clip(self, x):
        return np.clip(x, self.lo, self.hi)

    def as_list(self) -> list[float]:
        return [self.lo, self.hi]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TypeGrid:
    """Strictly increasing nodes discretizing a type interval."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a type grid needs at least 2 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, interval: Interval, n: int) -> "TypeGrid":
        nodes = np.linspace(interval.lo, interval.hi, n)
        # pin the endpoints exactly
        nodes[0], nodes[-1] = interval.lo, interval.hi
        return cls(nodes)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def interval(self) -> Interval:
        return Interval(self.nodes[0], self.nodes[-1])

    def trapezoid_weights(self) -> np.ndarray:
        """Composite trapezoid weights: sum(w * f(nodes)) ~ integral of f."""
        h = np.diff(self.nodes)
        w = np.zeros(self.size)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return w


@dataclass(frozen=True, eq=False)
class Density:
    """Probability density sampled at the nodes of a grid.

    Weights are renormalized at construction so that the trapezoid rule on
    the grid integrates the density to one.
    """

    grid: TypeGrid
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.grid.size,):
            raise ValueError(
                f"density has {w.size} weights for a grid of {self.grid.size} nodes"
            )
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("density weights must be finite and nonnegative")
        mass = float(self.grid.trapezoid_weights() @ w)
        if mass <= 0:
            raise ValueError("density has zero mass on its grid")
        object.__setattr__(self, "weights", _frozen(w / mass))

    @classmethod
    def uniform(cls, grid: TypeGrid) -> "Density":
        return cls(grid, np.ones(grid.size))

    @classmethod
    def from_function(cls, grid: TypeGrid, pdf: Callable[[np.ndarray], np.ndarray]) -> "Density":
        return cls(grid, np.asarray(pdf(grid.nodes), dtype=float))

    def quadrature_weights(self) -> np.ndarray:
        """Weights q with sum(q * f(nodes)) ~ E[f(c)]; they sum to one."""
        return self.grid.trapezoid_weights() * self.weights


# --------------------------------------------------------------------------
# the electricity market kernel


def kernel_F(x, y, d: float, r: float):
    """Interior-branch allocation F(x, y) of the two-node market.

    F(x, y) = d + u**2 / (2 r) - u / r  with  u = (x - y) / (x + y).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    if np.any(s <= 0):
        raise DomainError("kernel_F requires x + y > 0")
    u = (x - y) / s
    out = d + u * u / (2.0 * r) - u / r
    return float(out) if out.ndim == 0 else out


def kernel_qbar(d: float, r: float) -> float:
    """Corner allocation q̄ = 2 (1 - sqrt(1 - 2 d r)) / r."""
    disc = 1.0 - 2.0 * d * r
    if disc < 0:
        raise DomainError(f"q̄ is undefined for 2*d*r > 1 (got {2 * d * r:g})")
    # 2(1 - sqrt(disc))/r rewritten without cancellation for tiny r
    return 4.0 * d / (1.0 + math.sqrt(disc))


class KernelModel:
    """Demand response K(own_bid, opponent_bids) and its own-bid derivative.

    ``opp`` carries the opponents' bids along its last axis; ``own`` broadcasts
    against ``opp[..., 0]``.
    """

    k_plus: float = math.inf
    n_opponents: int = 1

    def evaluate(self, own, opp):
        raise NotImplementedError

    def partial_own(self, own, opp):
        raise NotImplementedError


@dataclass(frozen=True)
class ElectricityKernel(KernelModel):
    """Two-player kernel of the two-node market with quadratic line losses."""

    demand: float
    loss_coeff: float

    @property
    def k_plus(self) -> float:
        return kernel_qbar(self.demand, self.loss_coeff)

    def _split(self, own, opp):
        own = np.asarray(own, dtype=float)
        opp = np.asarray(opp, dtype=float)
        if opp.ndim == 0 or opp.shape[-1] != 1:
            raise ValueError("the electricity kernel is defined for exactly one opponent")
        return own, opp[..., 0]

    def evaluate(self, own, opp):
        x, y = self._split(own, opp)
        d, r = self.demand, self.loss_coeff
        s = x + y
        if np.any(s <= 0):
            raise DomainError("kernel requires own + opp > 0")
        # F(y, x) is F(x, y) with u -> -u; the sign flip is exact
        u = (x - y) / s
        even = d + u * u / (2.0 * r)
        f_xy, f_yx = even - u / r, even + u / r
        out = np.where(f_xy < 0, 0.0, np.where(f_yx < 0, self.k_plus, f_xy))
        return float(out) if out.ndim == 0 else out

    def partial_own(self, own, opp):
        """dK/d(own) of the active branch (one-sided at branch switches)."""
        x, y = self._split(own, opp)
        d, r = self.demand, self.loss_coeff
        s = x + y
        if np.any(s <= 0):
            raise DomainError("kernel derivative requires own + opp > 0")
        interior = (kernel_F(x, y, d, r) >= 0) & (kernel_F(y, x, d, r) >= 0)
        dfx = -4.0 * y * y / (r * s**3)
        out = np.where(interior, dfx, 0.0)
        return float(out) if out.ndim == 0 else out


def _opp_axis(model: KernelModel, opp):
    opp = np.asarray(opp, dtype=float)
    if model.n_opponents == 1:
        return opp[..., None]
    return opp


def kernel_eval(model: KernelModel, own, opp):
    """K(own, opp); for single-opponent kernels ``opp`` is just the opponent bid."""
    return model.evaluate(own, _opp_axis(model, opp))


def kernel_partial_own(model: KernelModel, own, opp):
    return model.partial_own(own, _opp_axis(model, opp))


# --------------------------------------------------------------------------
# market parameters


DEFAULT_NODES = 51


@dataclass(frozen=True, eq=False)
class MarketParams:
    """A complete game instance.

    ``grids`` and ``densities`` hold one entry per player; opponent types are
    independent, so the joint opponent density is the product of marginals.
    ``kernel`` defaults to the electricity kernel built from ``demand`` and
    ``loss_coeff``.
    """

    type_intervals: tuple[Interval, ...]
    bid_intervals: tuple[Interval, ...]
    demand: float
    loss_coeff: float
    grids: tuple[TypeGrid, ...]
    densities: tuple[Density, ...]
    kernel: KernelModel | None = field(default=None)

    def __post_init__(self):
        n = len(self.type_intervals)
        if n < 1:
            raise ValueError("need at least one player")
        for name in ("bid_intervals", "grids", "densities"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must have one entry per player")
        if not (self.demand > 0 and self.loss_coeff > 0):
            raise ValueError("demand and loss coefficient must be positive")
        for i, (t, g, p) in enumerate(zip(self.type_intervals, self.grids, self.densities)):
            if g.nodes[0] != t.lo or g.nodes[-1] != t.hi:
                raise ValueError(f"grid of player {i} does not span its type interval")
            if p.grid is not g:
                raise ValueError(f"density of player {i} is not defined on its grid")
        if self.kernel is None:
            if n != 2:
                raise ValueError("the built-in electricity kernel needs exactly 2 players")
            object.__setattr__(self, "kernel", ElectricityKernel(self.demand, self.loss_coeff))

    @property
    def n_players(self) -> int:
        return len(self.type_intervals)

    @classmethod
    def build(
        cls,
        type_intervals: Sequence[Interval],
        bid_intervals: Sequence[Interval],
        demand: float,
        loss_coeff: float,
        n_nodes: int | Sequence[int] = DEFAULT_NODES,
        pdfs: Sequence[Callable | None] | None = None,
        kernel: KernelModel | None = None,
    ) -> "MarketParams":
        n = len(type_intervals)
        sizes = [n_nodes] * n if isinstance(n_nodes, int) else list(n_nodes)
        pdfs = list(pdfs) if pdfs is not None else [None] * n
        grids = tuple(TypeGrid.uniform(t, m) for t, m in zip(type_intervals, sizes))
        dens = tuple(
            Density.uniform(g) if f is None else Density.from_function(g, f)
            for g, f in zip(grids, pdfs)
        )
        return cls(tuple(type_intervals), tuple(bid_intervals), float(demand),
                   float(loss_coeff), grids, dens, kernel)

    @classmethod
    def symmetric(cls, c_lo, c_hi, b_lo, b_hi, demand, loss_coeff,
                  n_nodes: int = DEFAULT_NODES, pdf=None, kernel=None) -> "MarketParams":
        t, b = Interval(c_lo, c_hi), Interval(b_lo, b_hi)
        return cls.build((t, t), (b, b), demand, loss_coeff, n_nodes, (pdf, pdf), kernel)

    @classmethod
    def full_information(cls, cost, b_lo, b_hi, demand, loss_coeff,
                         width: float = 1e-10) -> "MarketParams":
        """Symmetric instance whose type density is a point mass at ``cost``.

        The point mass is a two-node grid on [cost, cost*(1 + width)].
        """
        return cls.symmetric(cost, cost * (1.0 + width), b_lo, b_hi, demand, loss_coeff, 2)

    def with_grid(self, n_nodes: int | Sequence[int]) -> "MarketParams":
        """Same instance re-discretized; densities are resampled by interpolation."""
        n = self.n_players
        sizes = [n_nodes] * n if isinstance(n_nodes, int) else list(n_nodes)
        pdfs = [
            (lambda c, p=p: np.interp(c, p.grid.nodes, p.weights)) for p in self.densities
        ]
        kernel = None if isinstance(self.kernel, ElectricityKernel) else self.kernel
        return MarketParams.build(self.type_intervals, self.bid_intervals, self.demand,
                                  self.loss_coeff, sizes, pdfs, kernel)

    def with_kernel(self, kernel: KernelModel) -> "MarketParams":
        return MarketParams(self.type_intervals, self.bid_intervals, self.demand,
                            self.loss_coeff, self.grids, self.densities, kernel)

    def opponents(self, i: int) -> list[int]:
        return [j for j in range(self.n_players) if j != i]

    def opponent_quadrature(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Tensor-product quadrature over the opponents of player ``i``.

        Returns (index, weights): ``index`` has shape (M, n-1) and holds grid
        node indices per opponent; ``weights`` has shape (M,) and sums to one.
        """
        opp = self.opponents(i)
        if not opp:
            return np.zeros((1, 0), dtype=int), np.ones(1)
        axes = [np.arange(self.grids[j].size) for j in opp]
        index = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
        w = np.ones(index.shape[0])
        for col, j in enumerate(opp):
            w = w * self.densities[j].quadrature_weights()[index[:, col]]
        return index, w

    # -- JSON -------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "type_intervals": [t.as_list() for t in self.type_intervals],
            "bid_intervals": [b.as_list() for b in self.bid_intervals],
            "demand": self.demand,
            "loss_coeff": self.loss_coeff,
            "grid": [g.size for g in self.grids],
        }

    @classmethod
    def from_dict(cls, doc: dict, n_nodes: int | None = None) -> "MarketParams":
        """Build from the instance block of a config document.

        Keys: ``type_intervals`` and ``bid_intervals`` (lists of [lo, hi], one
        per player, or a single [lo, hi] shared by both players), ``demand``,
        ``loss_coeff``, optional ``grid`` (int or per-player list) and
        optional ``density`` ("uniform" or per-player lists of node weights).
        """
        allowed = {"type_intervals", "bid_intervals", "demand", "loss_coeff", "grid", "density"}
        unknown = set(doc) - allowed
        if unknown:
            raise KeyError(f"unknown instance keys: {sorted(unknown)}")
        for key in ("type_intervals", "bid_intervals", "demand", "loss_coeff"):
            if key not in doc:
                raise KeyError(f"missing instance key: {key!r}")

        def intervals(v):
            if len(v) == 2 and all(isinstance(a, (int, float)) for a in v):
                v = [v, v]
            return tuple(Interval(*pair) for pair in v)

        t, b = intervals(doc["type_intervals"]), intervals(doc["bid_intervals"])
        grid = n_nodes if n_nodes is not None else doc.get("grid", DEFAULT_NODES)
        dens = doc.get("density", "uniform")
        pdfs = None
        if dens != "uniform":
            sizes = [len(w) for w in dens]
            pdfs = [(lambda c, w=np.asarray(w, float), ti=ti:
                     np.interp(c, np.linspace(ti.lo, ti.hi, w.size), w))
                    for w, ti in zip(dens, t)]
            if n_nodes is None and "grid" not in doc:
                grid = sizes
        return cls.build(t, b, doc["demand"], doc["loss_coeff"], grid, pdfs)


# --------------------------------------------------------------------------
# parameter validity


FLAG_NAMES = (
    "cost_positive",
    "types_within_bids",
    "loss_subcritical",
    "bid_ratio_below_two",
    "no_corner_allocation",
    "bid_bound_inside",
)


@dataclass(frozen=True)
class ValidityReport:
    flags: dict[str, bool]
    margins: dict[str, float]

    @property
    def ok(self) -> bool:
        return all(self.flags.values())

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.flags.items() if not v]

    def to_dict(self) -> dict:
        return {"ok": self.ok,
                "flags": [{"name": k, "pass": self.flags[k], "margin": self.margins[k]}
                          for k in self.flags]}


def flag_margins(c_lo, c_hi, b_lo, b_hi, d, r) -> dict[str, np.ndarray]:
    """Signed slack of every validity condition; a condition holds iff its
    slack is >= 0 (> 0 for the strict ones). Broadcasts over arrays."""
    c_lo, c_hi, b_lo, b_hi, d, r = map(np.asarray, (c_lo, c_hi, b_lo, b_hi, d, r))
    k = 1.0 - 2.0 * r * d
    with np.errstate(divide="ignore", invalid="ignore"):
        s = b_hi + b_lo
        u = np.where(s > 0, (b_hi - b_lo) / np.where(s > 0, s, 1.0), np.nan)
        f_corner = d + u * u / (2.0 * r) - u / r
        bound = np.where(k > 0, b_hi - c_hi / np.where(k > 0, k, 1.0), -np.inf)
    return {
        "cost_positive": c_lo,
        "types_within_bids": np.minimum(c_lo - b_lo, b_hi - c_hi),
        "loss_subcritical": k,
        "bid_ratio_below_two": 2.0 * b_lo - b_hi,
        "no_corner_allocation": np.where(np.isnan(f_corner), -np.inf, f_corner),
        "bid_bound_inside": bound,
    }


_STRICT = {"cost_positive", "loss_subcritical", "bid_ratio_below_two"}


def flags_from_margins(margins: dict) -> dict:
    return {k: (m > 0) if k in _STRICT else (m >= 0) for k, m in margins.items()}


def validate_params(params: MarketParams) -> ValidityReport:
    """Check every standing condition of the electricity example, per player.

    Never raises; a condition fails if it fails for any player.
    """
    flags: dict[str, bool] = {}
    margins: dict[str, float] = {}
    for t, b in zip(params.type_intervals, params.bid_intervals):
        m = flag_margins(t.lo, t.hi, b.lo, b.hi, params.demand, params.loss_coeff)
        for name in FLAG_NAMES:
            margins[name] = min(margins.get(name, math.inf), float(m[name]))
    flags = {k: bool(v) for k, v in flags_from_margins(margins).items()}
    return ValidityReport(flags, margins)


# --------------------------------------------------------------------------
# strategies


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """One bid vector per player, aligned with that player's type grid.

    Between nodes a strategy is read by linear interpolation.
    """

    grids: tuple[TypeGrid, ...]
    bids: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.grids) != len(self.bids):
            raise ValueError("one bid vector per grid")
        bids = tuple(_frozen(b) for b in self.bids)
        for g, b in zip(self.grids, bids):
            if b.shape != (g.size,):
                raise ValueError(f"bid vector of length {b.size} on a {g.size}-node grid")
            if not np.all(np.isfinite(b)):
                raise ValueError("bids must be finite")
        object.__setattr__(self, "bids", bids)

    @classmethod
    def from_arrays(cls, params: MarketParams, bids: Sequence[np.ndarray],
                    clip: bool = False, atol: float = 1e-12) -> "StrategyProfile":
        """Profile on ``params``' grids; bids must lie in the bid intervals."""
        out = []
        for b, iv in zip(bids, params.bid_intervals):
            b = np.asarray(b, dtype=float)
            if clip:
                b = iv.clip(b)
            elif np.any(b < iv.lo - atol) or np.any(b > iv.hi + atol):
                raise ValueError(f"bids leave the bid interval [{iv.lo}, {iv.hi}]")
            out.append(b)
        return cls(params.grids, tuple(out))

    @classmethod
    def from_function(cls, params: MarketParams, fn: Callable[[int, np.ndarray], np.ndarray],
                      clip: bool = True) -> "StrategyProfile":
        bids = [np.broadcast_to(fn(i, g.nodes), g.nodes.shape) for i, g in enumerate(params.grids)]
        return cls.from_arrays(params, bids, clip=clip)

    @classmethod
    def truthful(cls, params: MarketParams) -> "StrategyProfile":
        """sigma(c) = c, clipped into the bid interval."""
        return cls.from_function(params, lambda i, c: c)

    @classmethod
    def constant(cls, params: MarketParams, value: float | Sequence[float]) -> "StrategyProfile":
        vals = np.broadcast_to(np.asarray(value, dtype=float), (params.n_players,))
        return cls.from_function(params, lambda i, c: np.full_like(c, vals[i]))

    @classmethod
    def top(cls, params: MarketParams) -> "StrategyProfile":
        return cls.constant(params, [b.hi for b in params.bid_intervals])

    @property
    def n_players(self) -> int:
        return len(self.bids)

    def __call__(self, i: int, c):
        g = self.grids[i]
        return np.interp(c, g.nodes, self.bids[i])

    def replace(self, i: int, bids: np.ndarray) -> "StrategyProfile":
        new = list(self.bids)
        new[i] = bids
        return StrategyProfile(self.grids, tuple(new))

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "StrategyProfile":
        return StrategyProfile(self.grids, tuple(fn(b) for b in self.bids))

    def sup_distance(self, other: "StrategyProfile") -> float:
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.bids, other.bids))

    def leq(self, other: "StrategyProfile", tol: float = 0.0) -> bool:
        """Pointwise order sigma <= other, up to ``tol``."""
        return all(np.all(a <= b + tol) for a, b in zip(self.bids, other.bids))

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.bids)

    def to_pairs(self) -> list[list[list[float]]]:
        return [np.column_stack([g.nodes, b]).tolist() for g, b in zip(self.grids, self.bids)]
