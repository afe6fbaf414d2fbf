"""Liquidation cost model for linear unwind schedules.

A position of ``N`` units unwound linearly over ``T`` days trades ``N/T``
per day.  Two costs compete:

* direct cost: the daily impact concession from the latent-book law,
  ``|N| * dp(|N|/T)``, floored per unit at half the minimum bid-ask;
* volatility penalty: ``gamma`` standard deviations of the liquidation
  PnL, which for a linear schedule is ``(gamma/sqrt(3)) * P0 * |N| *
  sigma * sqrt(T)``.

The portfolio penalty generalizes the single-asset variance to the full
covariance of the remaining-position profiles; direct costs add across
assets (no cross impact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .impact import ImpactParams, impact_at_volume

__all__ = [
    "BondSpec",
    "PortfolioSpec",
    "LiquidationSchedule",
    "CostBreakdown",
    "PSD_TOLERANCE",
    "direct_cost_single",
    "penalty_single",
    "total_cost_single",
    "optimal_time_small_size",
    "optimal_cost_small_size",
    "limit_cost_large_size",
    "portfolio_variance",
    "portfolio_total_cost",
]

# Empirical correlation matrices from short windows are near-singular, so
# the PSD check tolerates a slightly negative smallest eigenvalue.
PSD_TOLERANCE = 1e-8

_DEFAULT_DAY_COUNT = 252


@dataclass(frozen=True)
class BondSpec:
    """One tradable asset.

    ``position`` is a signed face amount (negative = short) in the same
    volume unit as ``adv``.  ``vol_annual`` is the annualized return
    volatility, converted internally to a daily figure with ``day_count``
    business days per year.  ``min_spread`` is the minimum bid-ask as a
    fraction of price (0.002 = 20bp).
    """

    id: str
    price: float
    position: float
    adv: float
    vol_annual: float
    min_spread: float = 0.0
    day_count: int = _DEFAULT_DAY_COUNT

    def __post_init__(self) -> None:
        if not (self.price > 0):
            raise ValueError(f"bond {self.id!r}: price must be positive, got {self.price}")
        if not (self.adv > 0):
            raise ValueError(f"bond {self.id!r}: adv must be positive, got {self.adv}")
        if not (self.vol_annual >= 0):
            raise ValueError(
                f"bond {self.id!r}: vol_annual must be nonnegative, got {self.vol_annual}"
            )
        if not (self.min_spread >= 0):
            raise ValueError(
                f"bond {self.id!r}: min_spread must be nonnegative, got {self.min_spread}"
            )
        if not (self.day_count > 0):
            raise ValueError(f"bond {self.id!r}: day_count must be positive")

    @property
    def sigma_daily(self) -> float:
        """Daily return volatility (dimensionless per sqrt day)."""
        return self.vol_annual / math.sqrt(self.day_count)

    def impact_params(self, alpha_inf: float) -> ImpactParams:
        """Impact-law parameters for this bond, in native price units."""
        if self.vol_annual == 0:
            raise ValueError(
                f"bond {self.id!r}: impact law undefined for zero volatility"
            )
        return ImpactParams(
            adv=self.adv,
            sigma_daily=self.price * self.sigma_daily,
            alpha_inf=alpha_inf,
        )


@dataclass(frozen=True)
class PortfolioSpec:
    """A bond list with its return correlation matrix and risk aversion."""

    bonds: tuple[BondSpec, ...]
    correlation: np.ndarray
    gamma: float
    alpha_inf: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "bonds", tuple(self.bonds))
        corr = np.array(self.correlation, dtype=float)
        object.__setattr__(self, "correlation", corr)
        d = len(self.bonds)
        if d == 0:
            raise ValueError("portfolio must contain at least one bond")
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not (self.alpha_inf > 0):
            raise ValueError(f"alpha_inf must be positive, got {self.alpha_inf}")
        if corr.shape != (d, d):
            raise ValueError(
                f"correlation must be {d}x{d} to match the bond list, got {corr.shape}"
            )
        if not np.allclose(corr, corr.T, rtol=0.0, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(corr) > 1.0 + 1e-12):
            raise ValueError("correlation entries must lie in [-1, 1]")
        min_eig = float(np.linalg.eigvalsh(corr)[0])
        if min_eig < -PSD_TOLERANCE:
            raise ValueError(
                f"correlation matrix is not positive semidefinite "
                f"(smallest eigenvalue {min_eig:.3e} < -{PSD_TOLERANCE:.0e})"
            )
        for bond in self.bonds:
            if bond.position != 0 and bond.vol_annual == 0:
                raise ValueError(
                    f"bond {bond.id!r}: zero volatility with a nonzero position "
                    f"makes the liquidation problem degenerate"
                )

    @property
    def size(self) -> int:
        return len(self.bonds)

    def impact_params(self, i: int) -> ImpactParams:
        return self.bonds[i].impact_params(self.alpha_inf)


@dataclass(frozen=True)
class LiquidationSchedule:
    """Per-asset terminal times in days, aligned with the portfolio's bonds.

    Zero-position assets carry time 0 by convention.
    """

    times: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", np.array(self.times, dtype=float))

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class CostBreakdown:
    direct: float
    penalty: float
    total: float
    per_asset_direct: np.ndarray


def direct_cost_single(bond: BondSpec, impact: ImpactParams, t: float) -> float:
    """Total impact cost of unwinding the position linearly over ``t`` days.

    The per-unit concession is floored at half the minimum bid-ask times
    price, so the cost decreases in ``t`` until the floor binds and is
    constant beyond.
    """
    if bond.position == 0:
        return 0.0
    if not (t > 0):
        raise ValueError(f"bond {bond.id!r}: horizon must be positive, got {t}")
    size = abs(bond.position)
    per_unit = impact_at_volume(impact, size / t)
    floor = 0.5 * bond.min_spread * bond.price
    return size * max(per_unit, floor)


def penalty_single(bond: BondSpec, gamma: float, t: float) -> float:
    """Risk penalty: gamma standard deviations of linear-unwind PnL."""
    if t < 0:
        raise ValueError(f"bond {bond.id!r}: horizon must be nonnegative, got {t}")
    return (gamma / math.sqrt(3.0)) * bond.price * abs(bond.position) * bond.sigma_daily * math.sqrt(t)


def total_cost_single(bond: BondSpec, impact: ImpactParams, gamma: float, t: float) -> float:
    return direct_cost_single(bond, impact, t) + penalty_single(bond, gamma, t)


def optimal_time_small_size(bond: BondSpec, impact: ImpactParams, gamma: float) -> float:
    """Closed-form optimal horizon in the square-root impact regime.

    Balancing the small-size direct cost against the penalty gives

        T* = sqrt(3 |N|) / (gamma * P0 * sigma) * sqrt(2 u_star / rho_inf)

    with sigma the daily return volatility, so T* is the exact minimizer
    of the small-size total cost.  With the bond's own impact parameters
    this collapses to sqrt(6 |N| / (alpha_inf * ADV)) / gamma, which prices
    the ADV in exactly one day under the alpha_inf = 6 / gamma^2 calibration.
    """
    if bond.position == 0:
        raise ValueError(f"bond {bond.id!r}: no optimal time for a zero position")
    sigma = bond.sigma_daily
    if sigma == 0:
        raise ValueError(f"bond {bond.id!r}: undefined for zero volatility")
    size = abs(bond.position)
    return (
        math.sqrt(3.0 * size)
        / (gamma * bond.price * sigma)
        * math.sqrt(2.0 * impact.u_star / impact.rho_inf)
    )


def optimal_cost_small_size(bond: BondSpec, impact: ImpactParams, gamma: float) -> float:
    """Per-unit cost at the closed-form optimum, small-size regime."""
    if bond.position == 0:
        raise ValueError(f"bond {bond.id!r}: no optimal cost for a zero position")
    size = abs(bond.position)
    return (
        2.0
        * (2.0 * impact.u_star / impact.rho_inf) ** 0.25
        * math.sqrt(gamma * bond.price * bond.sigma_daily)
        * size**0.25
        / 3.0**0.25
    )


def limit_cost_large_size(bond: BondSpec, impact: ImpactParams, gamma: float) -> float:
    """Leading per-unit optimal cost as the position dwarfs the ADV.

    In the linear-impact regime the optimal trade-off of ``(|N|/rho_inf)/T``
    against the penalty gives a cost growing as ``|N|^(1/3)``:

        (2^(-2/3) + 2^(1/3)) * (|N|/rho_inf)^(1/3) * (gamma P0 sigma / sqrt(3))^(2/3)

    Used for asymptotic tests only; the constant offset ``u_star`` of the
    linear impact branch is dropped.
    """
    if bond.position == 0:
        raise ValueError(f"bond {bond.id!r}: no limit cost for a zero position")
    size = abs(bond.position)
    a = size / impact.rho_inf
    b = gamma * bond.price * bond.sigma_daily / math.sqrt(3.0)
    return (2.0 ** (-2.0 / 3.0) + 2.0 ** (1.0 / 3.0)) * a ** (1.0 / 3.0) * b ** (2.0 / 3.0)


def _overlap_weights(t_left: np.ndarray, t_right: np.ndarray) -> np.ndarray:
    """Covariance time weights min(a,b) * (1 - min(a,b) / (3 max(a,b))).

    Broadcasts over its arguments; pairs where both times are zero get
    weight zero.
    """
    m = np.minimum(t_left, t_right)
    big = np.maximum(t_left, t_right)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = m * (1.0 - m / (3.0 * big))
    return np.where(big > 0.0, w, 0.0)


def _exposure_vols(spec: PortfolioSpec) -> np.ndarray:
    """Signed daily currency volatility per asset: P0 * N0 * sigma_daily."""
    return np.array(
        [b.price * b.position * b.sigma_daily for b in spec.bonds], dtype=float
    )


def _check_schedule(spec: PortfolioSpec, schedule: LiquidationSchedule) -> np.ndarray:
    times = schedule.times
    if len(times) != spec.size:
        raise ValueError(
            f"schedule has {len(times)} times for {spec.size} bonds"
        )
    for bond, t in zip(spec.bonds, times):
        if bond.position != 0 and not (t > 0):
            raise ValueError(
                f"bond {bond.id!r}: horizon must be positive for a nonzero position, got {t}"
            )
    return times


def portfolio_variance(spec: PortfolioSpec, schedule: LiquidationSchedule) -> float:
    """Variance of the liquidation PnL across the whole book.

    Integrating the covariance of the remaining linear position profiles
    in closed form gives, per asset pair,

        sigma_i sigma_j rho_ij X_i X_j / 2 * min(Ti,Tj) * (1 - min/(3 max))

    with X_i the signed currency exposure P0_i * N0_i.  One evaluation
    costs Theta(d^2).
    """
    times = _check_schedule(spec, schedule)
    y = _exposure_vols(spec)
    w = _overlap_weights(times[:, None], times[None, :])
    var = 0.5 * float(y @ (spec.correlation * w) @ y)
    return max(var, 0.0)


def portfolio_total_cost(spec: PortfolioSpec, schedule: LiquidationSchedule) -> CostBreakdown:
    """Summed direct costs plus gamma standard deviations of portfolio PnL."""
    times = _check_schedule(spec, schedule)
    per_asset = np.zeros(spec.size)
    for i, bond in enumerate(spec.bonds):
        if bond.position == 0:
            continue
        per_asset[i] = direct_cost_single(bond, spec.impact_params(i), times[i])
    direct = float(np.sum(per_asset))
    penalty = spec.gamma * math.sqrt(portfolio_variance(spec, schedule))
    return CostBreakdown(
        direct=direct,
        penalty=penalty,
        total=direct + penalty,
        per_asset_direct=per_asset,
    )
