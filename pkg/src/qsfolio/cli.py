"""Command-line interface.

Subcommands: ``synth``, ``stats``, ``optimize``, ``backtest``,
``scenarios``, ``grid``, ``robustness``, ``report``.

Exit codes: 0 success; 1 usage error; 2 data error; 3 sweep completed but
some configurations were error-tagged.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SWEEP_ERRORS = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: "
                                         f"{text!r}") from None


def _add_data_flags(p, train_days=True):
    p.add_argument("--prices", required=True, help="prices CSV path")
    p.add_argument("--returns-mode", choices=("log", "simple"), default="log",
                   help="return definition used for statistics")
    if train_days:
        p.add_argument("--train-days", type=int, default=252,
                       help="training window length (e.g. 252 or 504)")


def _add_qsw_flags(p, required=False):
    p.add_argument("--alpha", type=float, required=required,
                   help="return-preference strength")
    p.add_argument("--beta", type=float, required=required,
                   help="covariance penalty")
    p.add_argument("--lambda", dest="lambda_hold", type=float,
                   required=required, help="holding coefficient")
    p.add_argument("--omega", type=float, required=required,
                   help="quantum-classical mix in [0, 1]")


def _add_solver_flags(p):
    p.add_argument("--dt", type=float, default=0.1, help="time step")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="convergence tolerance")
    p.add_argument("--max-iters", type=int, default=5000,
                   help="iteration cap")
    p.add_argument("--damping", type=float, default=0.9,
                   help="teleportation damping in (0, 1)")
    p.add_argument("--gamma1", type=float, default=100.0,
                   help="Hamiltonian diagonal scale")
    p.add_argument("--gamma2", type=float, default=100.0,
                   help="Hamiltonian off-diagonal scale")
    p.add_argument("--mode", choices=("alg", "eq"), default="alg",
                   help="update mode")


def _add_backtest_flags(p):
    p.add_argument("--start", help="backtest start date (YYYY-MM-DD)")
    p.add_argument("--end", help="backtest end date (YYYY-MM-DD)")
    p.add_argument("--rebalance", choices=("quarterly", "monthly"),
                   default="quarterly", help="rebalance calendar rule")
    p.add_argument("--turnover", choices=("paper", "drift"), default="paper",
                   help="turnover convention: consecutive targets or "
                        "drifted prior weights")
    p.add_argument("--cost-bp", type=float, default=20.0,
                   help="round-trip cost in bp per 100%% turnover")


def _add_sweep_flags(p):
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel worker processes")
    p.add_argument("--out", default="qsfolio-out", help="output directory")
    p.add_argument("--plots", action="store_true",
                   help="also write plot files")


def build_parser() -> _Parser:
    parser = _Parser(prog="qsfolio",
                     description="Quantum-stochastic-walk portfolio "
                                 "optimization experiments")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic prices CSV")
    p.add_argument("--n-assets", type=int, default=50)
    p.add_argument("--n-sectors", type=int, default=5)
    p.add_argument("--days", type=int, default=1764,
                   help="number of daily returns (prices get one more row)")
    p.add_argument("--intra-corr", type=float, default=0.7)
    p.add_argument("--inter-corr", type=float, default=0.1)
    p.add_argument("--mu-range", type=_float_list, default=[0.02, 0.12],
                   help="annualized mean-return range lo,hi")
    p.add_argument("--vol-range", type=_float_list, default=[0.10, 0.40],
                   help="annualized volatility range lo,hi")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="per-asset statistics over a window")
    _add_data_flags(p)
    p.add_argument("--out", help="directory for stats.csv and cov.csv")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("optimize", help="one stationary-state solve")
    _add_data_flags(p)
    _add_qsw_flags(p, required=True)
    _add_solver_flags(p)
    p.add_argument("--out", help="directory for weights.csv")
    p.add_argument("--dump-graph", metavar="DIR",
                   help="debug-dump W/P/G/H matrices as CSV")
    p.add_argument("--trace", metavar="FILE",
                   help="write per-iteration diagnostics CSV")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("backtest", help="backtest one strategy")
    _add_data_flags(p)
    p.add_argument("--strategy", choices=("qsw", "mpt", "index"),
                   default="qsw")
    _add_qsw_flags(p)
    _add_solver_flags(p)
    _add_backtest_flags(p)
    p.add_argument("--out", help="directory for results/equity/weights CSVs")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("scenarios", help="six preset portfolios x mixes")
    _add_data_flags(p)
    _add_solver_flags(p)
    _add_backtest_flags(p)
    _add_sweep_flags(p)
    p.add_argument("--omegas", type=_float_list,
                   default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("grid", help="hyper-parameter grid sweep")
    _add_data_flags(p)
    _add_solver_flags(p)
    _add_backtest_flags(p)
    _add_sweep_flags(p)
    p.add_argument("--alphas", type=_float_list,
                   default=[0.1, 5.0, 50.0, 100.0, 500.0])
    p.add_argument("--betas", type=_float_list,
                   default=[0.1, 5.0, 50.0, 100.0, 500.0])
    p.add_argument("--lambdas", type=_float_list,
                   default=[0.1, 5.0, 50.0, 100.0, 500.0])
    p.add_argument("--omegas", type=_float_list,
                   default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("robustness",
                       help="grid + benchmarks on random sub-universes")
    _add_data_flags(p)
    _add_solver_flags(p)
    _add_backtest_flags(p)
    _add_sweep_flags(p)
    p.add_argument("--alphas", type=_float_list,
                   default=[0.1, 5.0, 50.0, 100.0, 500.0])
    p.add_argument("--betas", type=_float_list,
                   default=[0.1, 5.0, 50.0, 100.0, 500.0])
    p.add_argument("--lambdas", type=_float_list,
                   default=[0.1, 5.0, 50.0, 100.0, 500.0])
    p.add_argument("--omegas", type=_float_list,
                   default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.add_argument("--draws", type=int, default=50)
    p.add_argument("--subset-size", type=int, default=100)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("report", help="summarize an existing results.csv")
    p.add_argument("--results", required=True, help="results.csv path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def _load_returns(args):
    from .data import compute_returns, load_prices

    panel = load_prices(args.prices)
    return compute_returns(panel, args.returns_mode)


def _qsw_params(args):
    from .graph import QswParams

    return QswParams(alpha=args.alpha, beta=args.beta,
                     lambda_hold=args.lambda_hold, omega=args.omega,
                     damping=args.damping, gamma1=args.gamma1,
                     gamma2=args.gamma2, dt=args.dt, tol=args.tol,
                     max_iters=args.max_iters, update_mode=args.mode)


def _base_params(args):
    from .graph import QswParams

    return QswParams(alpha=1.0, beta=1.0, lambda_hold=1.0, omega=0.2,
                     damping=args.damping, gamma1=args.gamma1,
                     gamma2=args.gamma2, dt=args.dt, tol=args.tol,
                     max_iters=args.max_iters, update_mode=args.mode)


def _backtest_config(args):
    from .backtest import BacktestConfig

    convention = {"paper": "paper_literal", "drift": "drift_aware"}
    return BacktestConfig(train_days=args.train_days,
                          rebalance=args.rebalance,
                          start=args.start, end=args.end,
                          cost_bp_per_100_turnover=args.cost_bp,
                          turnover_convention=convention[args.turnover])


def _training_window(panel, train_days):
    from .errors import DataError

    if panel.n_days < train_days:
        raise DataError(f"panel has {panel.n_days} return rows; "
                        f"{train_days} needed")
    return panel.window(panel.n_days - train_days, panel.n_days)


def cmd_synth(args) -> int:
    from .data import save_prices_csv
    from .synth import SynthSpec, synthesize_universe

    for name in ("mu_range", "vol_range"):
        if len(getattr(args, name)) != 2:
            raise argparse.ArgumentTypeError(f"--{name} needs lo,hi")
    spec = SynthSpec(n_assets=args.n_assets, n_sectors=args.n_sectors,
                     days=args.days, intra_sector_corr=args.intra_corr,
                     inter_sector_corr=args.inter_corr,
                     mu_range=tuple(args.mu_range),
                     vol_range=tuple(args.vol_range), seed=args.seed)
    panel = synthesize_universe(spec)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_prices_csv(panel, out)
    print(f"wrote {panel.n_days} x {panel.n_assets} prices to {out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    import numpy as np

    from .data import compute_stats

    returns = _load_returns(args)
    window = _training_window(returns, args.train_days)
    stats = compute_stats(window)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "stats.csv", "w", encoding="utf-8") as fh:
            fh.write("ticker,mu,sigma,sr\n")
            for i, t in enumerate(window.tickers):
                fh.write(f"{t},{float(stats.mu[i])!r},"
                         f"{float(stats.sigma[i])!r},"
                         f"{float(stats.sr[i])!r}\n")
        np.savetxt(out / "cov.csv", stats.cov, delimiter=",")
        print(f"wrote stats.csv and cov.csv to {out}")
    order = np.argsort(stats.sr)[::-1]
    print("ticker        mu         sigma      sr")
    for i in order[:10]:
        print(f"{window.tickers[i]:<12}{stats.mu[i]:<11.6f}"
              f"{stats.sigma[i]:<11.6f}{stats.sr[i]:.6f}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    import numpy as np

    from .data import compute_stats
    from .engine import run_to_stationary
    from .graph import build_graph, dump_graph_csv

    returns = _load_returns(args)
    window = _training_window(returns, args.train_days)
    params = _qsw_params(args)
    graph = build_graph(compute_stats(window), params)
    if args.dump_graph:
        dump_graph_csv(graph, args.dump_graph)
    result = run_to_stationary(graph, params, trace_path=args.trace)

    print(f"converged={result.converged} iterations={result.iterations} "
          f"final_delta={result.final_delta:.3e}")
    order = np.argsort(result.weights)[::-1]
    for i in order:
        print(f"{window.tickers[i]:<12}{result.weights[i]:.8f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "weights.csv", "w", encoding="utf-8") as fh:
            fh.write("ticker,weight\n")
            for i, t in enumerate(window.tickers):
                fh.write(f"{t},{float(result.weights[i])!r}\n")
        print(f"wrote weights.csv to {out}")
    return EXIT_OK


def cmd_backtest(args) -> int:
    from . import sweep
    from .report import emit_report

    if args.strategy == "qsw":
        missing = [f for f in ("alpha", "beta", "lambda_hold", "omega")
                   if getattr(args, f) is None]
        if missing:
            raise argparse.ArgumentTypeError(
                "qsw backtests need --alpha --beta --lambda --omega")
    returns = _load_returns(args)
    config = _backtest_config(args)
    base = _base_params(args)

    kind = {"qsw": "qsw", "mpt": "mpt_max_sharpe",
            "index": "index_proxy"}[args.strategy]
    combo = ((args.alpha, args.beta, args.lambda_hold, args.omega)
             if kind == "qsw" else None)
    sweep._init_worker(returns, config, base)
    try:
        record = sweep._run_task((0, None, None, kind, combo))
    finally:
        sweep._CTX.clear()
    if record.error:
        print(f"backtest failed: {record.error}", file=sys.stderr)
        return EXIT_DATA

    print(f"strategy={record.strategy} sharpe={record.sharpe:.4f} "
          f"cagr={record.cagr:.4f} vol={record.vol:.4f} "
          f"mdd={record.mdd:.4f} turnover={record.turnover_ann:.4f} "
          f"efficiency={record.efficiency:.4f} hhi={record.hhi:.4f} "
          f"final={record.final_value:.4f}")
    if args.out:
        emit_report([record], args.out)
        _write_backtest_details(returns, config, base, kind, combo,
                                Path(args.out))
        print(f"wrote results.csv to {args.out}")
    return EXIT_OK


def _write_backtest_details(returns, config, base, kind, combo, out: Path):
    """Equity and weight paths for single-strategy backtests."""
    from dataclasses import replace

    from .backtest import MptStrategy, QswStrategy, run_backtest

    if kind == "index_proxy":
        return
    if kind == "qsw":
        alpha, beta, lam, omega = combo
        strategy = QswStrategy(replace(base, alpha=alpha, beta=beta,
                                       lambda_hold=lam, omega=omega))
    else:
        strategy = MptStrategy()
    result = run_backtest(returns, strategy, config)
    with open(out / "equity.csv", "w", encoding="utf-8") as fh:
        fh.write("date,value\n")
        for d, v in zip(result.dates, result.equity):
            fh.write(f"{d},{float(v)!r}\n")
    with open(out / "weights.csv", "w", encoding="utf-8") as fh:
        fh.write("date," + ",".join(result.tickers) + "\n")
        for d, w in result.weight_history:
            fh.write(str(d) + "," + ",".join(repr(float(x)) for x in w) + "\n")


def _finish_sweep(records, args, extra=None) -> int:
    from .report import emit_report, write_robustness_summary

    emit_report(records, args.out, plots=args.plots)
    if extra is not None:
        write_robustness_summary(extra, Path(args.out))
    n_err = sum(1 for r in records if r.error)
    print(f"{len(records)} records -> {args.out} "
          f"({n_err} error-tagged)")
    return EXIT_SWEEP_ERRORS if n_err else EXIT_OK


def cmd_scenarios(args) -> int:
    from .sweep import run_scenarios

    records = run_scenarios(_load_returns(args), _backtest_config(args),
                            omega_values=tuple(args.omegas),
                            base_params=_base_params(args),
                            workers=args.workers)
    return _finish_sweep(records, args)


def _grid_spec(args):
    from .sweep import GridSpec

    return GridSpec(alpha_values=tuple(args.alphas),
                    beta_values=tuple(args.betas),
                    lambda_values=tuple(args.lambdas),
                    omega_values=tuple(args.omegas))


def cmd_grid(args) -> int:
    from .sweep import run_grid

    records = run_grid(_load_returns(args), _backtest_config(args),
                       grid=_grid_spec(args), base_params=_base_params(args),
                       workers=args.workers)
    return _finish_sweep(records, args)


def cmd_robustness(args) -> int:
    from .sweep import RobustnessSpec, run_robustness

    spec = RobustnessSpec(n_draws=args.draws, subset_size=args.subset_size,
                          seed=args.seed)
    records, summary = run_robustness(
        _load_returns(args), _backtest_config(args), grid=_grid_spec(args),
        spec=spec, base_params=_base_params(args), workers=args.workers)
    print(f"win rates vs MPT: sharpe={summary.win_rate_sharpe:.2f} "
          f"efficiency={summary.win_rate_efficiency:.2f}")
    return _finish_sweep(records, args, extra=summary)


def cmd_report(args) -> int:
    from .report import emit_report, read_records_csv

    records = read_records_csv(args.results)
    emit_report(records, args.out, plots=args.plots)
    print(f"summarized {len(records)} records -> {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    from .errors import DataError, ParameterError

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")
    except (DataError, ParameterError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
