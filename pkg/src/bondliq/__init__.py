"""Portfolio liquidation horizon optimizer for OTC bond books.

Computes per-asset linear liquidation horizons that minimize direct
market-impact cost plus a risk penalty on liquidation PnL volatility,
using a latent-order-book impact law.  See the README for the model and
the CLI front end.
"""

from .costmodel import (
    BondSpec,
    CostBreakdown,
    LiquidationSchedule,
    PortfolioSpec,
    direct_cost_single,
    limit_cost_large_size,
    optimal_cost_small_size,
    optimal_time_small_size,
    penalty_single,
    portfolio_total_cost,
    portfolio_variance,
    total_cost_single,
)
from .impact import (
    ImpactParams,
    PdeParams,
    impact_at_volume,
    impact_small_size,
    stationary_density,
    verify_stationary_pde,
    volume_at_impact,
)
from .optimizer import (
    NumericError,
    OptimizerConfig,
    StrategyResult,
    evaluate_strategies,
    individual_schedule,
    naive_schedule,
    optimize_portfolio,
)
from .portfolio_io import (
    PortfolioError,
    PortfolioSyntaxError,
    SchemaError,
    SemanticError,
    load_portfolio,
    load_portfolio_path,
    read_results,
    resolve_alpha_inf,
    uniform_correlation,
    write_results,
)

__version__ = "0.1.0"

__all__ = [
    "BondSpec",
    "CostBreakdown",
    "ImpactParams",
    "LiquidationSchedule",
    "NumericError",
    "OptimizerConfig",
    "PdeParams",
    "PortfolioError",
    "PortfolioSpec",
    "PortfolioSyntaxError",
    "SchemaError",
    "SemanticError",
    "StrategyResult",
    "direct_cost_single",
    "evaluate_strategies",
    "impact_at_volume",
    "impact_small_size",
    "individual_schedule",
    "limit_cost_large_size",
    "load_portfolio",
    "load_portfolio_path",
    "naive_schedule",
    "optimal_cost_small_size",
    "optimal_time_small_size",
    "optimize_portfolio",
    "penalty_single",
    "portfolio_total_cost",
    "portfolio_variance",
    "read_results",
    "resolve_alpha_inf",
    "stationary_density",
    "total_cost_single",
    "uniform_correlation",
    "verify_stationary_pde",
    "volume_at_impact",
    "write_results",
]
