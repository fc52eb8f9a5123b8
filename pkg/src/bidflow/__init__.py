"""Pure Nash equilibria of Bayesian bidding games.

Smallest and largest equilibria are computed by a monotone gradient flow on
bid functions; a set of numerical certificates checks the monotonicity and
scaling conditions under which the equilibrium is unique. The two-node
electricity market with quadratic line losses is built in.
"""

from .diagnostics import (AssumptionReport, CyclingFinding, ReportEntry, cycling_search,
                          feasibility_search, run_checks)
from .equilibrium import (EquilibriumResult, FlowTrace, IterationTrace, SolverConfig,
                          best_reply_bid, best_reply_iteration, best_reply_map,
                          best_reply_profile, best_reply_residual, extremal_equilibria,
                          flow_dynamics)
from .model import (Density, DomainError, ElectricityKernel, Interval, KernelModel,
                    MarketParams, StrategyProfile, TypeGrid, kernel_eval, kernel_F,
                    kernel_partial_own, kernel_qbar, validate_params)
from .payoff import (QuadratureRule, expected_payoff, expected_payoff_gradient,
                     pointwise_payoff)

__version__ = "0.1.0"
