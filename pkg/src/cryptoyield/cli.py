"""Command-line entry point: scenario execution, ingestion, report emission.

Subcommands: stake, amm, loan price, perp funding, perp basis, implied-rate,
xccy simulate, oracle price, kelly, plus `run` (config-file driven) and
`validate` (dry-run diagnostics without execution).

Every invocation writes a report directory: one CSV per output series plus
report.json carrying the summary and provenance (tool version, config hash,
seed, input digests). File bytes are deterministic for identical inputs.

Rates in CSV/summary columns suffixed `_pct` are annualized percent on the
365-day convention; unsuffixed rates are plain fractions.

Exit codes: 0 success, 2 malformed input or failed validation, 3 numeric or
model failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import date

import numpy as np

from . import core, lending, mc, optrates, perps, staking
from .errors import CryptoYieldError, EligibilityError, EmptyCohortError, InputError, MissingDataError
from .reporting import Report
from .scenarios import (
    run_pool_scenario,
    run_swap_scenario,
    validate_pool_scenario,
    validate_swap_scenario,
)

FIGURE_PERCENTILES = (1, 5, 25, 50, 75, 95, 99)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc


def _scenario_config(value):
    """Scenario configs may be inline objects or paths to JSON files."""
    if isinstance(value, dict):
        return value, []
    return _load_json(value), [value]


# ---------------------------------------------------------------------------
# command handlers: config dict -> Report (+ provenance inputs, seed)
# ---------------------------------------------------------------------------


def _run_stake(config):
    path = config["balances"]
    records = staking.load_validators(path)
    percentiles = config.get("percentiles") or list(FIGURE_PERCENTILES)
    if config.get("day"):
        days = [date.fromisoformat(config["day"])]
        explicit = True
    else:
        days = staking.available_days(records.values())
        explicit = False

    rows, skipped_days = [], 0
    for day in days:
        try:
            bands = staking.percentile_bands(records.values(), day, percentiles)
        except EmptyCohortError:
            if explicit:
                raise
            skipped_days += 1
            continue
        for p in percentiles:
            rows.append(
                {"day": day.isoformat(), "percentile": p, "return_pct": 100.0 * bands[p]}
            )
    report = Report(
        command="stake",
        summary={
            "validators": len(records),
            "days": len(days) - skipped_days,
            "days_without_cohort": skipped_days,
            "percentiles": list(percentiles),
        },
    )
    report.add_series("bands", ("day", "percentile", "return_pct"), rows)
    return report, [path], None


def _run_amm(config):
    scenario, paths = _scenario_config(config["scenario"])
    result = run_pool_scenario(scenario)
    report = Report(command="amm", summary=result["summary"])
    report.add_series(
        "pool",
        (
            "event",
            "action",
            "reserve_x",
            "reserve_y",
            "spot_price",
            "total_shares",
            "product",
            "cumulative_fees_x",
            "cumulative_fees_y",
            "price_x",
        ),
        result["pool_rows"],
    )
    report.add_series("positions", ("event", "position", "shares", "pnl"), result["position_rows"])
    return report, paths, None


def _run_loan(config):
    terms_cfg = dict(config["terms"])
    terms = lending.LoanTerms(
        collateral_amount=terms_cfg["collateral"],
        repayment_amount=terms_cfg["repay"],
        sigma_alpha=terms_cfg.get("sigma_alpha", 0.0),
        sigma_beta=terms_cfg.get("sigma_beta", 0.0),
        rho=terms_cfg.get("rho", 0.0),
        r_alpha=terms_cfg.get("r_alpha", 0.0),
        r_beta=terms_cfg.get("r_beta", 0.0),
        T=terms_cfg.get("tenor", 1.0),
    )
    details = lending.margrabe_details(terms)
    valuation = lending.loan_values(terms)
    summary = {
        "terms": terms_cfg,
        "sigma_combined": details["sigma_combined"],
        "d1": details["d1"],
        "d2": details["d2"],
        "discount_factor_alpha": details["discount_factor_alpha"],
        "discount_factor_beta": details["discount_factor_beta"],
        "exchange_option_value": valuation.exchange_option_value,
        "borrower_value": valuation.borrower_value,
        "lender_value": valuation.lender_value,
        "collateralization_ratio": terms.collateralization_ratio,
    }
    liq_cfg = config.get("liquidation")
    if liq_cfg:
        liq = lending.LiquidationSpec(barrier=liq_cfg["barrier"], penalty=liq_cfg["penalty"])
        with_liq = lending.loan_value_with_liquidation(terms, liq)
        summary["liquidation"] = {
            "barrier": liq.barrier,
            "penalty": liq.penalty,
            "penalty_leg_value": with_liq.lender_value - valuation.lender_value,
            "borrower_value": with_liq.borrower_value,
            "lender_value": with_liq.lender_value,
        }
    return Report(command="loan", summary=summary), [], None


def _funding_summary(rates_pct):
    values = sorted(rates_pct)
    return {
        "events": len(values),
        "mean_rate_pct": math.fsum(values) / len(values) if values else 0.0,
        "percentiles_pct": {
            str(p): core.percentile(values, p) for p in FIGURE_PERCENTILES
        }
        if values
        else {},
    }


def _run_perp_funding(config):
    path = config["quotes"]
    quotes = perps.load_mark_index_csv(path)
    variant = {"deribit": "deribit_deadband", "bitmex": "bitmex_clamp"}.get(
        config.get("variant", "deribit")
    )
    if variant is None:
        raise InputError(f"unknown funding variant {config.get('variant')!r}")
    spec = perps.FundingSpec(
        variant=variant,
        interval_hours=config.get("interval_hours", perps.DEFAULT_INTERVAL_HOURS),
        band=config.get("band", perps.DEFAULT_BAND),
        interest_rate=config.get("interest_rate", 0.0),
    )
    events = perps.events_from_quotes(quotes, spec)
    rows = []
    for (t, mark, index), event in zip(quotes, events):
        premium = perps.premium_rate(perps.MarkIndexPair(mark, index))
        rows.append(
            {
                "time": t,
                "mark": mark,
                "index": index,
                "premium": premium,
                "funding_rate": event.funding_rate,
                "funding_rate_pct": 100.0 * event.funding_rate,
                "time_fraction": event.time_fraction,
                "payer": event.payer or "",
                "cash_flow_per_notional": event.cash_flow_per_notional,
            }
        )
    summary = _funding_summary([r["funding_rate_pct"] for r in rows])
    summary["variant"] = config.get("variant", "deribit")
    report = Report(command="perp-funding", summary=summary)
    report.add_series(
        "funding",
        (
            "time",
            "mark",
            "index",
            "premium",
            "funding_rate",
            "funding_rate_pct",
            "time_fraction",
            "payer",
            "cash_flow_per_notional",
        ),
        rows,
    )
    return report, [path], None


def _run_perp_basis(config):
    path = config["quotes"]
    quotes = perps.load_basis_csv(path)
    rows = perps.basis_rows(quotes)
    window = int(config.get("window", 7))
    rolling = optrates.rolling_average([r["implied_rate"] for r in rows], window)
    out_rows = []
    for (t, perp, future, expiry), row, smooth in zip(quotes, rows, rolling):
        out_rows.append(
            {
                "time": t,
                "perp": perp,
                "future": future,
                "basis": row["basis"],
                "tenor_years": row["tenor_years"],
                "implied_rate_pct": 100.0 * row["implied_rate"],
                "rolling_rate_pct": 100.0 * smooth,
            }
        )
    summary = {
        "rows": len(out_rows),
        "window": window,
        "mean_basis": math.fsum(r["basis"] for r in out_rows) / len(out_rows),
        "mean_rate_pct": math.fsum(r["implied_rate_pct"] for r in out_rows) / len(out_rows),
    }
    report = Report(command="perp-basis", summary=summary)
    report.add_series(
        "basis",
        ("time", "perp", "future", "basis", "tenor_years", "implied_rate_pct", "rolling_rate_pct"),
        out_rows,
    )
    return report, [path], None


def _run_implied_rate(config):
    path = config["chain"]
    quotes = optrates.load_chain_csv(path)
    points, excluded = optrates.chain_points(quotes)
    if not points:
        raise EmptyCohortError("no valid implied-rate points in the chain")
    daily = optrates.daily_series(points)
    window = int(config.get("window", 7))
    rolling = optrates.rolling_average([rate for _, rate, _ in daily], window)
    daily_rows = [
        {
            "day": d.isoformat(),
            "mean_rate": rate,
            "mean_rate_pct": 100.0 * rate,
            "points": count,
        }
        for (d, rate, count) in daily
    ]
    rolling_rows = [
        {"day": d.isoformat(), "rolling_rate_pct": 100.0 * smooth}
        for (d, _, _), smooth in zip(daily, rolling)
    ]
    summary = {
        "quotes": len(quotes),
        "valid_points": len(points),
        "excluded_points": excluded,
        "days": len(daily),
        "window": window,
        "mean_rate_pct": math.fsum(r["mean_rate_pct"] for r in daily_rows) / len(daily_rows),
    }
    report = Report(command="implied-rate", summary=summary)
    report.add_series("daily", ("day", "mean_rate", "mean_rate_pct", "points"), daily_rows)
    report.add_series("rolling", ("day", "rolling_rate_pct"), rolling_rows)
    return report, [path], None


def _run_xccy(config):
    scenario, paths = _scenario_config(config["scenario"])
    result = run_swap_scenario(scenario)
    report = Report(command="xccy", summary=result["final_state"])
    report.add_series(
        "audit",
        (
            "seq",
            "time",
            "event",
            "token",
            "source",
            "destination",
            "amount",
            "amount_float",
            "note",
        ),
        result["audit_rows"],
    )
    return report, paths, None


_PAYOFFS = {
    "exchange": lambda a, b: np.maximum(a - b, 0.0),
    "max": np.maximum,
    "min": np.minimum,
    "asset_a": lambda a, b: a,
}


def _run_oracle(config):
    spec_cfg = dict(config["spec"])
    spec = mc.GbmSpec(
        s0_a=spec_cfg.get("s0_a", 1.0),
        s0_b=spec_cfg.get("s0_b", 1.0),
        sigma_a=spec_cfg.get("sigma_a", 0.0),
        sigma_b=spec_cfg.get("sigma_b", 0.0),
        rho=spec_cfg.get("rho", 0.0),
        drift_a=spec_cfg.get("drift_a", 0.0),
        drift_b=spec_cfg.get("drift_b", 0.0),
        T=spec_cfg.get("tenor", 1.0),
        steps=int(spec_cfg.get("steps", 1)),
        paths=int(spec_cfg.get("paths", 100_000)),
        seed=int(spec_cfg.get("seed", 0)),
        antithetic=bool(spec_cfg.get("antithetic", True)),
    )
    payoff_name = config.get("payoff", "exchange")
    discount_rate = config.get("discount_rate", 0.0)
    if payoff_name == "one_touch":
        estimate = mc.first_passage_value(
            spec,
            barrier=config["barrier"],
            payout=config.get("payout", 1.0),
            discount_rate=discount_rate,
            bridge=bool(config.get("bridge", True)),
        )
    elif payoff_name in _PAYOFFS:
        estimate = mc.price_payoff(spec, _PAYOFFS[payoff_name], discount_rate)
    else:
        raise InputError(
            f"unknown payoff {payoff_name!r}; pick from {sorted(_PAYOFFS) + ['one_touch']}"
        )
    summary = {
        "payoff": payoff_name,
        "estimate": estimate.mean,
        "std_error": estimate.std_error,
        "paths": estimate.paths,
        "discount_rate": discount_rate,
        "spec": spec_cfg,
    }
    return Report(command="oracle", summary=summary), [], spec.seed


def _run_kelly(config):
    means = config["means"]
    riskless = config.get("riskless_rate", 0.0)
    covariance = config["covariance"]
    weights = core.kelly_weights(means, riskless, covariance)
    rows = [
        {"asset": i, "mean": m, "weight": float(w)}
        for i, (m, w) in enumerate(zip(means, weights))
    ]
    summary = {
        "assets": len(means),
        "riskless_rate": riskless,
        "weights": [float(w) for w in weights],
        "gross_leverage": float(np.sum(np.abs(weights))),
    }
    report = Report(command="kelly", summary=summary)
    report.add_series("weights", ("asset", "mean", "weight"), rows)
    return report, [], None


_HANDLERS = {
    "stake": _run_stake,
    "amm": _run_amm,
    "loan": _run_loan,
    "perp-funding": _run_perp_funding,
    "perp-basis": _run_perp_basis,
    "implied-rate": _run_implied_rate,
    "xccy": _run_xccy,
    "oracle": _run_oracle,
    "kelly": _run_kelly,
}


def resolve_config_paths(config: dict, base_dir) -> dict:
    """Resolve input-file paths relative to the config file's directory."""
    resolved = dict(config)
    for key in ("balances", "quotes", "chain", "scenario"):
        value = resolved.get(key)
        if isinstance(value, str) and not os.path.isabs(value):
            resolved[key] = os.path.join(base_dir, value)
    return resolved


def run_command(config: dict, out_dir, provenance_config=None) -> Report:
    """Execute one command config and write its report directory.

    provenance_config, when given, is hashed instead of the executed config
    (so path resolution does not leak machine-specific prefixes into the
    report).
    """
    command = config.get("command")
    if command not in _HANDLERS:
        raise InputError(f"unknown command {command!r}; pick from {sorted(_HANDLERS)}")
    report, input_paths, seed = _HANDLERS[command](config)
    report.finalize_provenance(provenance_config or config, input_paths, seed)
    report.write(out_dir)
    return report


# ---------------------------------------------------------------------------
# validation (dry run, collected diagnostics)
# ---------------------------------------------------------------------------


def _check_csv(path, columns, problems, label):
    try:
        core.read_csv_rows(path, columns)
    except InputError as exc:
        problems.append(f"{label}: {exc}")


def validate_config(config) -> list:
    """Schema and referential diagnostics for a command config; no execution."""
    problems = []
    if not isinstance(config, dict) or not config:
        return ["config must be a non-empty JSON object"]
    command = config.get("command")
    if command not in _HANDLERS:
        problems.append(f"command must be one of {sorted(_HANDLERS)}")
        return problems

    if command == "stake":
        if "balances" not in config:
            problems.append("stake: 'balances' CSV path is required")
        else:
            _check_csv(
                config["balances"],
                ["validator_id", "timestamp", "balance", "state"],
                problems,
                "stake",
            )
    elif command in ("amm", "xccy"):
        if "scenario" not in config:
            problems.append(f"{command}: 'scenario' is required")
        else:
            try:
                scenario, _ = _scenario_config(config["scenario"])
            except InputError as exc:
                problems.append(f"{command}: {exc}")
            else:
                validator = validate_pool_scenario if command == "amm" else validate_swap_scenario
                problems.extend(f"{command}: {p}" for p in validator(scenario))
    elif command == "loan":
        terms = config.get("terms")
        if not isinstance(terms, dict):
            problems.append("loan: 'terms' object is required")
        else:
            for key in ("collateral", "repay"):
                if key not in terms:
                    problems.append(f"loan: terms.{key} is required")
    elif command == "perp-funding":
        if "quotes" not in config:
            problems.append("perp-funding: 'quotes' CSV path is required")
        else:
            _check_csv(config["quotes"], ["timestamp", "mark", "index"], problems, "perp-funding")
        if config.get("variant", "deribit") not in ("deribit", "bitmex"):
            problems.append("perp-funding: variant must be deribit or bitmex")
    elif command == "perp-basis":
        if "quotes" not in config:
            problems.append("perp-basis: 'quotes' CSV path is required")
        else:
            _check_csv(
                config["quotes"], ["timestamp", "perp", "future", "expiry"], problems, "perp-basis"
            )
    elif command == "implied-rate":
        if "chain" not in config:
            problems.append("implied-rate: 'chain' CSV path is required")
        else:
            _check_csv(
                config["chain"],
                ["quote_time", "expiry", "strike", "call", "put", "underlying"],
                problems,
                "implied-rate",
            )
    elif command == "oracle":
        if not isinstance(config.get("spec"), dict):
            problems.append("oracle: 'spec' object is required")
        if config.get("payoff", "exchange") == "one_touch" and "barrier" not in config:
            problems.append("oracle: one_touch payoff needs 'barrier'")
    elif command == "kelly":
        if not isinstance(config.get("means"), list):
            problems.append("kelly: 'means' list is required")
        if not isinstance(config.get("covariance"), list):
            problems.append("kelly: 'covariance' matrix is required")
        elif isinstance(config.get("means"), list) and len(config["covariance"]) != len(
            config["means"]
        ):
            problems.append("kelly: covariance dimension does not match means")
    return problems


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _percentile_list(text):
    return [float(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cryptoyield",
        description="Crypto yield mechanisms: staking, AMM pools, collateralised "
        "loans, perpetual funding, implied rates and margined swaps.",
        epilog="Exit codes: 0 success, 2 malformed input or failed validation, "
        "3 numeric or model failure. Columns suffixed _pct are annualized "
        "percent on the 365-day convention.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stake", help="validator return percentile bands from a balances CSV")
    p.add_argument("--balances", required=True)
    p.add_argument("--day", help="ISO date; default: every day available in the data")
    p.add_argument("--percentiles", type=_percentile_list, default=list(FIGURE_PERCENTILES))
    p.add_argument("--out", required=True)

    p = sub.add_parser("amm", help="replay a pool scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("loan", help="price a collateralised loan")
    loan_sub = p.add_subparsers(dest="subcommand", required=True)
    lp = loan_sub.add_parser("price")
    lp.add_argument("--scenario", help="JSON file with terms/liquidation instead of flags")
    lp.add_argument("--collateral", type=float)
    lp.add_argument("--repay", type=float)
    lp.add_argument("--sigma-alpha", type=float, default=0.0)
    lp.add_argument("--sigma-beta", type=float, default=0.0)
    lp.add_argument("--rho", type=float, default=0.0)
    lp.add_argument("--r-alpha", type=float, default=0.0)
    lp.add_argument("--r-beta", type=float, default=0.0)
    lp.add_argument("--tenor", type=float, default=1.0)
    lp.add_argument("--barrier", type=float)
    lp.add_argument("--penalty", type=float)
    lp.add_argument("--out", required=True)

    p = sub.add_parser("perp", help="funding engines and futures basis")
    perp_sub = p.add_subparsers(dest="subcommand", required=True)
    pf = perp_sub.add_parser("funding")
    pf.add_argument("--quotes", required=True)
    pf.add_argument("--variant", choices=("deribit", "bitmex"), default="deribit")
    pf.add_argument("--band", type=float, default=perps.DEFAULT_BAND)
    pf.add_argument("--interval-hours", type=float, default=perps.DEFAULT_INTERVAL_HOURS)
    pf.add_argument("--interest-rate", type=float, default=0.0)
    pf.add_argument("--out", required=True)
    pb = perp_sub.add_parser("basis")
    pb.add_argument("--quotes", required=True)
    pb.add_argument("--window", type=int, default=7)
    pb.add_argument("--out", required=True)

    p = sub.add_parser("implied-rate", help="put-call-parity implied rates from a chain CSV")
    p.add_argument("--chain", required=True)
    p.add_argument("--window", type=int, default=7)
    p.add_argument("--out", required=True)

    p = sub.add_parser("xccy", help="cross-currency swap simulation")
    xccy_sub = p.add_subparsers(dest="subcommand", required=True)
    xs = xccy_sub.add_parser("simulate")
    xs.add_argument("--scenario", required=True)
    xs.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="Monte Carlo pricing oracle")
    oracle_sub = p.add_subparsers(dest="subcommand", required=True)
    op = oracle_sub.add_parser("price")
    op.add_argument("--spec", help="JSON file with the GBM spec instead of flags")
    op.add_argument("--s0-a", type=float, default=1.0)
    op.add_argument("--s0-b", type=float, default=1.0)
    op.add_argument("--sigma-a", type=float, default=0.0)
    op.add_argument("--sigma-b", type=float, default=0.0)
    op.add_argument("--rho", type=float, default=0.0)
    op.add_argument("--drift-a", type=float, default=0.0)
    op.add_argument("--drift-b", type=float, default=0.0)
    op.add_argument("--tenor", type=float, default=1.0)
    op.add_argument("--steps", type=int, default=1)
    op.add_argument("--paths", type=int, default=100_000)
    op.add_argument("--seed", type=int, default=0)
    op.add_argument("--payoff", default="exchange")
    op.add_argument("--discount-rate", type=float, default=0.0)
    op.add_argument("--barrier", type=float)
    op.add_argument("--payout", type=float, default=1.0)
    op.add_argument("--naive", action="store_true", help="disable the Brownian-bridge correction")
    op.add_argument("--out", required=True)

    p = sub.add_parser("kelly", help="Kelly allocation from means and covariance")
    p.add_argument("--means", required=True, help="comma-separated annualized means")
    p.add_argument("--riskless", type=float, default=0.0)
    p.add_argument("--cov", required=True, help="rows separated by ';', entries by ','")
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="execute a JSON command config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides config out_dir)")

    p = sub.add_parser("validate", help="dry-run diagnostics for a JSON command config")
    p.add_argument("--config", required=True)

    return parser


def _config_from_args(args) -> tuple:
    """Translate parsed flags into the canonical config dict + out_dir."""
    cmd = args.command
    if cmd == "stake":
        return {
            "command": "stake",
            "balances": args.balances,
            "day": args.day,
            "percentiles": args.percentiles,
        }, args.out
    if cmd == "amm":
        return {"command": "amm", "scenario": args.scenario}, args.out
    if cmd == "loan":
        if args.scenario:
            config = _load_json(args.scenario)
            config["command"] = "loan"
            return config, args.out
        if args.collateral is None or args.repay is None:
            raise InputError("loan price needs --collateral and --repay (or --scenario)")
        config = {
            "command": "loan",
            "terms": {
                "collateral": args.collateral,
                "repay": args.repay,
                "sigma_alpha": args.sigma_alpha,
                "sigma_beta": args.sigma_beta,
                "rho": args.rho,
                "r_alpha": args.r_alpha,
                "r_beta": args.r_beta,
                "tenor": args.tenor,
            },
        }
        if args.barrier is not None and args.penalty is not None:
            config["liquidation"] = {"barrier": args.barrier, "penalty": args.penalty}
        return config, args.out
    if cmd == "perp":
        if args.subcommand == "funding":
            return {
                "command": "perp-funding",
                "quotes": args.quotes,
                "variant": args.variant,
                "band": args.band,
                "interval_hours": args.interval_hours,
                "interest_rate": args.interest_rate,
            }, args.out
        return {
            "command": "perp-basis",
            "quotes": args.quotes,
            "window": args.window,
        }, args.out
    if cmd == "implied-rate":
        return {
            "command": "implied-rate",
            "chain": args.chain,
            "window": args.window,
        }, args.out
    if cmd == "xccy":
        return {"command": "xccy", "scenario": args.scenario}, args.out
    if cmd == "oracle":
        if args.spec:
            config = _load_json(args.spec)
            config["command"] = "oracle"
            return config, args.out
        config = {
            "command": "oracle",
            "spec": {
                "s0_a": args.s0_a,
                "s0_b": args.s0_b,
                "sigma_a": args.sigma_a,
                "sigma_b": args.sigma_b,
                "rho": args.rho,
                "drift_a": args.drift_a,
                "drift_b": args.drift_b,
                "tenor": args.tenor,
                "steps": args.steps,
                "paths": args.paths,
                "seed": args.seed,
            },
            "payoff": args.payoff,
            "discount_rate": args.discount_rate,
            "payout": args.payout,
            "bridge": not args.naive,
        }
        if args.barrier is not None:
            config["barrier"] = args.barrier
        return config, args.out
    if cmd == "kelly":
        means = [float(x) for x in args.means.split(",")]
        covariance = [[float(x) for x in row.split(",")] for row in args.cov.split(";")]
        return {
            "command": "kelly",
            "means": means,
            "riskless_rate": args.riskless,
            "covariance": covariance,
        }, args.out
    raise InputError(f"unhandled command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            config = resolve_config_paths(
                _load_json(args.config), os.path.dirname(os.path.abspath(args.config))
            )
            problems = validate_config(config)
            print(json.dumps({"valid": not problems, "problems": problems}, indent=2))
            return 0 if not problems else 2
        if args.command == "run":
            raw = _load_json(args.config)
            out_dir = args.out or raw.get("out_dir")
            if not out_dir:
                raise InputError("run: --out or config out_dir is required")
            raw = {k: v for k, v in raw.items() if k != "out_dir"}
            config = resolve_config_paths(raw, os.path.dirname(os.path.abspath(args.config)))
            report = run_command(config, out_dir, provenance_config=raw)
        else:
            config, out_dir = _config_from_args(args)
            report = run_command(config, out_dir)
        print(
            json.dumps(
                {"out_dir": str(out_dir), "command": report.command, "summary": report.summary},
                indent=2,
                sort_keys=True,
                default=str,
            )
        )
        return 0
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (EligibilityError, MissingDataError, EmptyCohortError, CryptoYieldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
