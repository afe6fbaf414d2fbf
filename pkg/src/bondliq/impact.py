"""Latent order book impact law.

The liquidity available to a single day's trading is modeled by a latent
volume density that grows linearly near the mid price and saturates at
``rho_inf`` far from it:

    rho(u) = rho_inf * (1 - exp(-u / u_star))

``u`` is the distance from the mid price in price units, ``u_star`` the
width of the linear zone (one day's price move), and ``rho_inf`` the
saturation density, parametrized as ``alpha_inf * adv / sigma_daily``.
Integrating the density gives the cumulative volume ``V(dp)`` obtainable
within a price concession ``dp``; inverting V gives the price impact of a
daily traded volume.  For small volumes the impact reduces to the familiar
square-root law, for large volumes it becomes linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ImpactParams",
    "PdeParams",
    "stationary_density",
    "volume_at_impact",
    "impact_at_volume",
    "impact_small_size",
    "verify_stationary_pde",
]

# Inversion tolerances: cheap at scalar level, and the downstream optimizer
# needs smooth cost evaluations.
_REL_TOL = 1e-12
_ABS_TOL_FACTOR = 1e-14
_MAX_ITER = 200


@dataclass(frozen=True)
class ImpactParams:
    """Per-asset parameters of the impact law.

    ``sigma_daily`` is the daily volatility of the quoted price in its
    native units (for a bond quoted in fractions of par, price * return
    vol / sqrt(day count)).  ``rho_inf`` and ``u_star`` are derived
    eagerly on construction.
    """

    adv: float
    sigma_daily: float
    alpha_inf: float
    rho_inf: float = field(init=False)
    u_star: float = field(init=False)

    def __post_init__(self) -> None:
        if not (self.adv > 0):
            raise ValueError(f"adv must be positive, got {self.adv}")
        if not (self.sigma_daily > 0):
            raise ValueError(f"sigma_daily must be positive, got {self.sigma_daily}")
        if not (self.alpha_inf > 0):
            raise ValueError(f"alpha_inf must be positive, got {self.alpha_inf}")
        object.__setattr__(self, "rho_inf", self.alpha_inf * self.adv / self.sigma_daily)
        object.__setattr__(self, "u_star", self.sigma_daily)

    @property
    def epsilon_naive(self) -> float:
        """Elasticity of a trade small relative to ADV: sigma / ADV."""
        return self.sigma_daily / self.adv

    @property
    def epsilon_asympt(self) -> float:
        """Elasticity of a trade large relative to ADV: 1 / rho_inf."""
        return 1.0 / self.rho_inf


@dataclass(frozen=True)
class PdeParams:
    """Coefficients of the stationary latent-book equation.

    ``lambda_rate`` is the arrival rate of new intentions per unit price,
    ``nu_inf`` the cancellation rate, and ``d_coeff`` the total squared
    volatility of intention prices (revision variance plus price variance;
    only the sum enters the equation).
    """

    lambda_rate: float
    nu_inf: float
    d_coeff: float
    rho_inf: float = field(init=False)
    u_star: float = field(init=False)

    def __post_init__(self) -> None:
        for name in ("lambda_rate", "nu_inf", "d_coeff"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        object.__setattr__(self, "rho_inf", self.lambda_rate / self.nu_inf)
        object.__setattr__(self, "u_star", math.sqrt(self.d_coeff / (2.0 * self.nu_inf)))


def stationary_density(params: ImpactParams, u: float) -> float:
    """Latent volume density at distance ``u`` from the mid price."""
    if u < 0:
        raise ValueError(f"u must be nonnegative, got {u}")
    return params.rho_inf * -math.expm1(-u / params.u_star)


def _scaled_volume(x: float) -> float:
    # g(x) = x - 1 + exp(-x), computed without cancellation for small x.
    return x + math.expm1(-x)


def volume_at_impact(params: ImpactParams, delta_p: float) -> float:
    """Cumulative volume available within a price concession ``delta_p``."""
    if delta_p < 0:
        raise ValueError(f"delta_p must be nonnegative, got {delta_p}")
    u = params.u_star
    return params.rho_inf * u * _scaled_volume(delta_p / u)


def impact_small_size(params: ImpactParams, v: float) -> float:
    """Square-root impact law, the small-volume limit of the exact inverse."""
    if v < 0:
        raise ValueError(f"v must be nonnegative, got {v}")
    return math.sqrt(2.0 * v * params.u_star / params.rho_inf)


def impact_at_volume(params: ImpactParams, v: float) -> float:
    """Price impact of trading volume ``v``: the exact inverse of the volume curve.

    Solves volume_at_impact(dp) = v by safeguarded Newton iteration.  The
    square-root law seeds the search and is a guaranteed lower bound (the
    volume curve lies below its small-size parabola); the linear asymptote
    ``v / rho_inf + u_star`` is a guaranteed upper bound.  Any Newton step
    leaving the current bracket falls back to bisection, so convergence
    cannot fail for finite input.
    """
    if v < 0:
        raise ValueError(f"v must be nonnegative, got {v}")
    if not math.isfinite(v):
        raise ValueError(f"v must be finite, got {v}")
    if v == 0.0:
        return 0.0

    u = params.u_star
    rho = params.rho_inf
    # Work in units of u_star: solve g(x) = w with g(x) = x - 1 + exp(-x).
    w = v / (rho * u)
    lo = math.sqrt(2.0 * w)  # small-size seed, g(lo) <= w
    hi = w + 1.0             # linear asymptote, g(hi) >= w
    if lo > hi:
        lo = hi

    x = lo
    abs_tol = _ABS_TOL_FACTOR
    for _ in range(_MAX_ITER):
        f = _scaled_volume(x) - w
        if f == 0.0:
            break
        if f < 0.0:
            lo = x
        else:
            hi = x
        deriv = -math.expm1(-x)  # g'(x) = 1 - exp(-x)
        if deriv > 0.0:
            step = f / deriv
            x_new = x - step
        else:
            x_new = 0.5 * (lo + hi)
        if not (lo <= x_new <= hi):
            x_new = 0.5 * (lo + hi)
        dx = abs(x_new - x)
        x = x_new
        if dx <= max(_REL_TOL * abs(x), abs_tol):
            break
    else:
        raise ArithmeticError(
            f"impact inversion did not converge for v={v!r} (w={w!r})"
        )
    return x * u


def verify_stationary_pde(
    pde: PdeParams,
    grid_size: int,
    domain_width: float,
    density: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """Finite-difference residual of a density candidate in the stationary equation.

    Evaluates the candidate (by default the closed form) on a uniform grid
    over ``[0, domain_width]`` and applies a second-order central-difference
    discretization of ``0.5 * D * rho'' - nu_inf * rho + lambda``.  The
    boundary condition ``rho(0) = 0`` enters as an extra residual row scaled
    by ``nu_inf`` so that it carries the same units as the equation; without
    it the equation alone cannot distinguish the true solution from the bare
    constant ``rho_inf``.  Returns the max-norm of the residual vector, which
    shrinks as O(h^2) under grid refinement for the true solution.
    """
    if grid_size < 16:
        raise ValueError(f"grid_size must be at least 16, got {grid_size}")
    if not (domain_width >= 10.0 * pde.u_star):
        raise ValueError(
            f"domain_width must cover at least 10 u_star = {10.0 * pde.u_star}, "
            f"got {domain_width}"
        )

    grid = np.linspace(0.0, domain_width, grid_size)
    h = grid[1] - grid[0]
    if density is None:
        rho = pde.rho_inf * -np.expm1(-grid / pde.u_star)
    else:
        rho = np.asarray(density(grid), dtype=float)
        if rho.shape != grid.shape:
            raise ValueError("density must return one value per grid point")

    second = (rho[:-2] - 2.0 * rho[1:-1] + rho[2:]) / (h * h)
    interior = 0.5 * pde.d_coeff * second - pde.nu_inf * rho[1:-1] + pde.lambda_rate
    boundary = pde.nu_inf * rho[0]
    return max(float(np.max(np.abs(interior))), abs(float(boundary)))
