"""Command-line front end for liquidation stress-testing runs.

Subcommands:

* ``optimize``: compare the naive, individual, and portfolio strategies
  on one book; writes a JSON results file and a per-asset horizon chart.
* ``sweep-correlation``: re-optimize across a grid of uniform pairwise
  correlations; emits long-format CSV rows plus cost/time charts.
* ``sweep-deadline``: re-optimize under shrinking deadlines; emits CSV
  rows with a short-deadline premium column plus charts.

Results and sweep rows go to files/stdout; diagnostics go to stderr.
Exit codes: 0 success, 1 validation error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .costmodel import PortfolioSpec
from .optimizer import (
    NumericError,
    OptimizerConfig,
    StrategyResult,
    evaluate_strategies,
    optimize_portfolio,
)
from .portfolio_io import (
    PortfolioError,
    load_portfolio_path,
    write_results,
)

__all__ = ["main"]

_DEFAULT_DEADLINE = 100.0

_CORR_HEADER = "correlation,strategy,liq_cost,direct_cost,t_median,t_max"
_DEADLINE_HEADER = "deadline,liq_cost,direct_cost,t_median,t_max,premium"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("portfolio", help="path to the portfolio JSON document")
    parser.add_argument(
        "--gamma", type=float, default=None, help="override the file's risk aversion"
    )
    parser.add_argument(
        "--alpha-inf",
        default=None,
        help='override the file\'s impact calibration (a number, or "auto" for 6/gamma^2)',
    )
    parser.add_argument(
        "--day-count",
        type=int,
        default=None,
        help="override the business days per year used for the vol conversion",
    )
    parser.add_argument(
        "--output", type=Path, default=None, help="write results to this file"
    )
    parser.add_argument(
        "--no-figures",
        action="store_true",
        help="skip rendering charts next to the output file",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bondliq",
        description="Optimal liquidation horizons for an OTC bond book.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser(
        "optimize", help="compare the three liquidation strategies on one book"
    )
    _add_common(p_opt)
    p_opt.add_argument(
        "--deadline",
        type=float,
        default=_DEFAULT_DEADLINE,
        help="upper bound on every horizon in days (default %(default)s)",
    )
    p_opt.set_defaults(func=cmd_optimize)

    p_corr = sub.add_parser(
        "sweep-correlation",
        help="re-optimize with all off-diagonal correlations set to each grid value",
    )
    _add_common(p_corr)
    p_corr.add_argument("--from", dest="corr_from", type=float, required=True)
    p_corr.add_argument("--to", dest="corr_to", type=float, required=True)
    p_corr.add_argument("--step", type=float, default=0.1)
    p_corr.add_argument("--deadline", type=float, default=_DEFAULT_DEADLINE)
    p_corr.set_defaults(func=cmd_sweep_correlation)

    p_dead = sub.add_parser(
        "sweep-deadline", help="re-optimize the portfolio under each deadline"
    )
    _add_common(p_dead)
    p_dead.add_argument(
        "--deadlines",
        required=True,
        help="comma-separated deadlines in days, e.g. 100,20,15,10,7.5,5,3,2,1",
    )
    p_dead.set_defaults(func=cmd_sweep_deadline)
    return parser


def _load_spec(args: argparse.Namespace) -> PortfolioSpec:
    alpha = args.alpha_inf
    if alpha is not None and alpha != "auto":
        try:
            alpha = float(alpha)
        except ValueError:
            raise PortfolioError(f'--alpha-inf must be a number or "auto", got {alpha!r}')
    try:
        return load_portfolio_path(
            args.portfolio,
            gamma=args.gamma,
            alpha_inf=alpha,
            day_count=args.day_count,
        )
    except OSError as exc:
        raise PortfolioError(f"cannot read portfolio file: {exc}") from exc


def _config(deadline: float | None) -> OptimizerConfig:
    return OptimizerConfig(deadline=deadline)


def _config_echo(spec: PortfolioSpec, config: OptimizerConfig) -> dict:
    return {
        "deadline": config.deadline,
        "gamma": spec.gamma,
        "alpha_inf": spec.alpha_inf,
        "t_floor": config.t_floor,
        "rel_tol": config.rel_tol,
        "max_outer_iters": config.max_outer_iters,
        "multistart": config.multistart,
    }


def _print_summary(results: Sequence[StrategyResult]) -> None:
    print(f"{'strategy':<12} {'liq. cost':>14} {'direct cost':>14} {'T-median':>10} {'T-max':>10} {'converged':>10}")
    for res in results:
        print(
            f"{res.strategy:<12} {res.cost.total:>14.6f} {res.cost.direct:>14.6f} "
            f"{res.t_median:>10.2f} {res.t_max:>10.2f} {'yes' if res.converged else 'NO':>10}"
        )


def _write_rows(header: str, rows: list[str], output: Path | None) -> None:
    text = header + "\n" + "".join(row + "\n" for row in rows)
    if output is not None:
        output.write_text(text)
    else:
        sys.stdout.write(text)


def cmd_optimize(args: argparse.Namespace) -> int:
    spec = _load_spec(args)
    if args.deadline is not None and not (args.deadline > 0):
        raise PortfolioError(f"deadline must be positive, got {args.deadline}")
    config = _config(args.deadline)
    results = evaluate_strategies(spec, config)
    _print_summary(results)
    if args.output is not None:
        with open(args.output, "w") as sink:
            write_results(results, sink, spec=spec, config_echo=_config_echo(spec, config))
        print(f"results written to {args.output}")
        if not args.no_figures:
            from .plots import plot_strategy_times

            fig = plot_strategy_times(
                results,
                [b.id for b in spec.bonds],
                args.output.with_name(args.output.stem + "_times.png"),
            )
            print(f"figure written to {fig}")
    if not all(res.converged for res in results):
        print("warning: optimizer did not certify convergence", file=sys.stderr)
        return 2
    return 0


def _corr_grid(corr_from: float, corr_to: float, step: float, d: int) -> list[float]:
    lo_bound = -1.0 / (d - 1) if d > 1 else -1.0
    for value, name in ((corr_from, "--from"), (corr_to, "--to")):
        if value > 1.0 or value < lo_bound:
            raise PortfolioError(
                f"{name} {value} outside the positive-semidefinite range "
                f"[{lo_bound:.6g}, 1] for {d} assets"
            )
    if corr_to < corr_from:
        raise PortfolioError("--to must not be below --from")
    if corr_from == corr_to:
        return [corr_from]
    if not (step > 0):
        raise PortfolioError(f"--step must be positive, got {step}")
    grid = []
    k = 0
    while True:
        # round away float accumulation so grid labels stay clean decimals
        value = round(corr_from + k * step, 12)
        if value > corr_to + 1e-12:
            break
        grid.append(min(value, corr_to))
        k += 1
    return grid


def cmd_sweep_correlation(args: argparse.Namespace) -> int:
    spec = _load_spec(args)
    if not (args.deadline > 0):
        raise PortfolioError(f"deadline must be positive, got {args.deadline}")
    grid = _corr_grid(args.corr_from, args.corr_to, args.step, spec.size)
    config = _config(args.deadline)

    from .portfolio_io import uniform_correlation

    rows: list[str] = []
    records: list[dict] = []
    all_converged = True
    for c in grid:
        swept = PortfolioSpec(
            bonds=spec.bonds,
            correlation=uniform_correlation(spec.size, c),
            gamma=spec.gamma,
            alpha_inf=spec.alpha_inf,
        )
        for res in evaluate_strategies(swept, config):
            all_converged = all_converged and res.converged
            rows.append(
                f"{c!r},{res.strategy},{res.cost.total!r},{res.cost.direct!r},"
                f"{res.t_median!r},{res.t_max!r}"
            )
            records.append(
                {
                    "correlation": c,
                    "strategy": res.strategy,
                    "liq_cost": res.cost.total,
                    "direct_cost": res.cost.direct,
                    "t_median": res.t_median,
                    "t_max": res.t_max,
                }
            )
    _write_rows(_CORR_HEADER, rows, args.output)
    if args.output is not None:
        print(f"sweep written to {args.output}")
        if not args.no_figures:
            from .plots import plot_correlation_sweep

            for fig in plot_correlation_sweep(records, args.output):
                print(f"figure written to {fig}")
    if not all_converged:
        print("warning: optimizer did not certify convergence", file=sys.stderr)
        return 2
    return 0


def cmd_sweep_deadline(args: argparse.Namespace) -> int:
    spec = _load_spec(args)
    try:
        deadlines = [float(x) for x in args.deadlines.split(",") if x.strip()]
    except ValueError as exc:
        raise PortfolioError(f"bad --deadlines list: {exc}") from exc
    if not deadlines:
        raise PortfolioError("--deadlines must name at least one deadline")
    for value in deadlines:
        if not (value > 0):
            raise PortfolioError(f"deadlines must be positive, got {value}")

    results: list[StrategyResult] = []
    all_converged = True
    for deadline in deadlines:
        res = optimize_portfolio(spec, _config(deadline))
        all_converged = all_converged and res.converged
        results.append(res)

    base_cost = results[deadlines.index(max(deadlines))].cost.total
    rows: list[str] = []
    records: list[dict] = []
    for deadline, res in zip(deadlines, results):
        premium = res.cost.total - base_cost
        rows.append(
            f"{deadline!r},{res.cost.total!r},{res.cost.direct!r},"
            f"{res.t_median!r},{res.t_max!r},{premium!r}"
        )
        records.append(
            {
                "deadline": deadline,
                "liq_cost": res.cost.total,
                "direct_cost": res.cost.direct,
                "t_median": res.t_median,
                "t_max": res.t_max,
                "premium": premium,
            }
        )
    _write_rows(_DEADLINE_HEADER, rows, args.output)
    if args.output is not None:
        print(f"sweep written to {args.output}")
        if not args.no_figures:
            from .plots import plot_deadline_sweep

            for fig in plot_deadline_sweep(records, args.output):
                print(f"figure written to {fig}")
    if not all_converged:
        print("warning: optimizer did not certify convergence", file=sys.stderr)
        return 2
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(
            f"error: {exc} (asset index {exc.asset_index}, horizon {exc.time_value})",
            file=sys.stderr,
        )
        return 2
    except (PortfolioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
