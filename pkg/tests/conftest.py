from pathlib import Path

import numpy as np
import pytest

from bondliq import BondSpec, PortfolioSpec, uniform_correlation

PORTFOLIO_DIR = Path(__file__).resolve().parent.parent / "portfolios"


@pytest.fixture(scope="session")
def bonds20_path():
    return str(PORTFOLIO_DIR / "bonds20.json")


@pytest.fixture(scope="session")
def two_bond_path():
    return str(PORTFOLIO_DIR / "two_bond.json")


def make_two_bond(rho: float, min_spread: float = 0.0, gamma: float = 0.5) -> PortfolioSpec:
    """The long-short pair used throughout: same price and vol, ADV 30 vs 3."""
    bonds = (
        BondSpec(id="liquid", price=141.49, position=27.0, adv=30.0,
                 vol_annual=0.07, min_spread=min_spread),
        BondSpec(id="illiquid", price=141.49, position=-27.0, adv=3.0,
                 vol_annual=0.07, min_spread=min_spread),
    )
    return PortfolioSpec(
        bonds=bonds,
        correlation=uniform_correlation(2, rho),
        gamma=gamma,
        alpha_inf=6.0 / gamma**2,
    )


def random_correlation(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random PSD correlation from a normalized Gram matrix."""
    g = rng.normal(size=(d, max(d, 2)))
    cov = g @ g.T
    scale = np.sqrt(np.diag(cov))
    corr = cov / np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    return (corr + corr.T) / 2.0


def random_portfolio(
    rng: np.random.Generator,
    d: int,
    long_only: bool = False,
    min_spread: float = 0.0,
) -> PortfolioSpec:
    bonds = []
    for i in range(d):
        position = rng.uniform(1.0, 50.0)
        if not long_only and rng.random() < 0.5:
            position = -position
        bonds.append(
            BondSpec(
                id=f"b{i:03d}",
                price=float(rng.uniform(0.5, 150.0)),
                position=float(position),
                adv=float(rng.uniform(1.0, 25.0)),
                vol_annual=float(rng.uniform(0.03, 0.6)),
                min_spread=min_spread,
            )
        )
    return PortfolioSpec(
        bonds=tuple(bonds),
        correlation=random_correlation(rng, d),
        gamma=float(rng.uniform(0.2, 2.0)),
        alpha_inf=float(rng.uniform(0.5, 30.0)),
    )
