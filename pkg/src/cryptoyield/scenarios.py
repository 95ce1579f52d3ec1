"""Scenario replay for the pool and swap state machines.

Scenario files are JSON. Pool scenarios drive one CPMM through an ordered
event list; swap scenarios replay an agreement against oracle ticks and
party actions. Both runners are deterministic: the same config always
produces the same rows (acceptance requires byte-identical reruns).

Pool scenario schema::

    {"pool": {"reserve_x": 1000, "reserve_y": 1000, "fee": 0.003,
              "gas_cost": 0.0, "exact": false},
     "events": [
        {"action": "add", "dx": 100, "dy": 100, "position": "alice"},
        {"action": "remove", "position": "alice", "shares": 50},   # or "all"
        {"action": "swap_x_for_y", "amount": 10},
        {"action": "swap_y_for_x", "amount": 10},
        {"action": "external_price", "price": 1.05}]}

An external_price event arbitrages the pool to the quoted price and sets
the numeraire price of token x for PnL rows (token y is the numeraire,
price 1). Swap scenario schema::

    {"agreement": {"notional_a": 100, "notional_b": 100, "x0": 1.0,
                   "margin_a": 5, "margin_b": 5, "threshold": 0.2,
                   "termination_fee": 0, "maturity_time": 365,
                   "threshold_base": "initial_margin",
                   "min_margin_fraction": null,
                   "legs": [{"payer": "A", "token": "beta", "notional": 100,
                             "rate_type": "fixed", "rate": 0.04,
                             "spread": 0.0, "frequency_days": 73}]},
     "fixings": {"0": 0.03},
     "events": [{"time": 10, "type": "tick", "rate": 1.02},
                {"time": 20, "type": "replenish", "party": "B", "amount": 2},
                {"time": 30, "type": "terminate", "party": "A"}]}

Leg accruals are generated from frequency_days up to maturity; maturity
fires automatically when maturity_time is set. Same-time events apply as
replenish, then accruals, then the tick (so a same-step top-up prevents
termination), then terminations.
"""

from __future__ import annotations

from fractions import Fraction

from .amm import create_pool
from .errors import CryptoYieldError, InputError
from .xccy import ALPHA, BETA, Leg, OracleTick, SwapAgreement, to_fraction

POOL_EVENT_ACTIONS = ("add", "remove", "swap_x_for_y", "swap_y_for_x", "external_price")
SWAP_EVENT_TYPES = ("tick", "replenish", "terminate")
_PRIORITY = {"replenish": 0, "accrue": 1, "tick": 2, "terminate": 3, "mature": 4}


# ---------------------------------------------------------------------------
# pool scenarios
# ---------------------------------------------------------------------------


def validate_pool_scenario(config) -> list:
    """Schema diagnostics for a pool scenario; empty list means valid."""
    problems = []
    if not isinstance(config, dict):
        return ["scenario must be a JSON object"]
    pool = config.get("pool")
    if not isinstance(pool, dict):
        problems.append("missing 'pool' object")
    else:
        for key in ("reserve_x", "reserve_y", "fee"):
            if key not in pool:
                problems.append(f"pool.{key} is required")
            elif not isinstance(pool[key], (int, float)) or isinstance(pool[key], bool):
                problems.append(f"pool.{key} must be a number")
    events = config.get("events")
    if not isinstance(events, list):
        problems.append("missing 'events' list")
        return problems
    for i, event in enumerate(events):
        action = event.get("action") if isinstance(event, dict) else None
        if action not in POOL_EVENT_ACTIONS:
            problems.append(f"events[{i}].action must be one of {POOL_EVENT_ACTIONS}")
            continue
        required = {
            "add": ("dx", "dy", "position"),
            "remove": ("position", "shares"),
            "swap_x_for_y": ("amount",),
            "swap_y_for_x": ("amount",),
            "external_price": ("price",),
        }[action]
        for key in required:
            if key not in event:
                problems.append(f"events[{i}] ({action}) needs '{key}'")
    return problems


def run_pool_scenario(config) -> dict:
    """Replay a pool scenario; returns pool rows, position PnL rows and summary."""
    problems = validate_pool_scenario(config)
    if problems:
        raise InputError("invalid pool scenario: " + "; ".join(problems))

    spec = config["pool"]
    exact = bool(spec.get("exact", False))
    conv = to_fraction if exact else float
    pool = create_pool(
        conv(spec["reserve_x"]), conv(spec["reserve_y"]), conv(spec["fee"]),
        gas_cost=conv(spec.get("gas_cost", 0)),
    )
    price_x = pool.reserve_y / pool.reserve_x  # numeraire = token y
    positions = {
        "genesis": {
            "shares": pool.total_shares,
            "entry_x": pool.reserve_x,
            "entry_y": pool.reserve_y,
            "entry_price_x": price_x,
        }
    }

    pool_rows, position_rows = [], []

    def record(index, action):
        pool_rows.append(
            {
                "event": index,
                "action": action,
                "reserve_x": float(pool.reserve_x),
                "reserve_y": float(pool.reserve_y),
                "spot_price": float(pool.reserve_y / pool.reserve_x) if pool.live else 0.0,
                "total_shares": float(pool.total_shares),
                "product": float(pool.product),
                "cumulative_fees_x": float(pool.cumulative_fees_x),
                "cumulative_fees_y": float(pool.cumulative_fees_y),
                "price_x": float(price_x),
            }
        )
        for name in sorted(positions):
            p = positions[name]
            if pool.live and pool.total_shares > 0:
                claim_x = pool.reserve_x * p["shares"] / pool.total_shares
                claim_y = pool.reserve_y * p["shares"] / pool.total_shares
            else:
                claim_x = claim_y = 0
            pnl = (claim_x * price_x + claim_y) - (p["entry_x"] * price_x + p["entry_y"])
            position_rows.append(
                {
                    "event": index,
                    "position": name,
                    "shares": float(p["shares"]),
                    "pnl": float(pnl),
                }
            )

    record(0, "create")
    for index, event in enumerate(config["events"], start=1):
        action = event["action"]
        try:
            if action == "add":
                position = pool.add_liquidity(conv(event["dx"]), conv(event["dy"]))
                name = str(event["position"])
                slot = positions.setdefault(
                    name, {"shares": 0, "entry_x": 0, "entry_y": 0, "entry_price_x": price_x}
                )
                slot["shares"] += position.shares
                slot["entry_x"] += position.entry_reserves[0]
                slot["entry_y"] += position.entry_reserves[1]
            elif action == "remove":
                name = str(event["position"])
                if name not in positions:
                    raise InputError(f"unknown position {name!r}")
                slot = positions[name]
                shares = slot["shares"] if event["shares"] == "all" else conv(event["shares"])
                if shares > slot["shares"]:
                    raise InputError(f"position {name!r} holds only {slot['shares']} shares")
                taken_fraction = shares / slot["shares"] if slot["shares"] else 0
                pool.remove_liquidity(shares)
                slot["entry_x"] -= slot["entry_x"] * taken_fraction
                slot["entry_y"] -= slot["entry_y"] * taken_fraction
                slot["shares"] -= shares
                if slot["shares"] == 0:
                    del positions[name]
            elif action == "swap_x_for_y":
                pool.swap_x_for_y(conv(event["amount"]))
            elif action == "swap_y_for_x":
                pool.swap_y_for_x(conv(event["amount"]))
            else:  # external_price
                price_x = conv(event["price"])
                pool.arbitrage_to_price(price_x)
        except CryptoYieldError as exc:
            raise type(exc)(f"event {index} ({action}): {exc}") from exc
        record(index, action)

    summary = {
        "events": len(config["events"]),
        "final_reserve_x": float(pool.reserve_x),
        "final_reserve_y": float(pool.reserve_y),
        "final_total_shares": float(pool.total_shares),
        "final_spot_price": float(pool.reserve_y / pool.reserve_x) if pool.live else 0.0,
        "cumulative_fees_x": float(pool.cumulative_fees_x),
        "cumulative_fees_y": float(pool.cumulative_fees_y),
        "open_positions": len(positions),
    }
    return {"pool_rows": pool_rows, "position_rows": position_rows, "summary": summary}


# ---------------------------------------------------------------------------
# swap scenarios
# ---------------------------------------------------------------------------


def validate_swap_scenario(config) -> list:
    """Schema diagnostics for a swap scenario; empty list means valid."""
    problems = []
    if not isinstance(config, dict):
        return ["scenario must be a JSON object"]
    agreement = config.get("agreement")
    if not isinstance(agreement, dict):
        problems.append("missing 'agreement' object")
    else:
        for key in ("notional_a", "notional_b", "margin_a", "margin_b", "threshold"):
            if key not in agreement:
                problems.append(f"agreement.{key} is required")
        for i, leg in enumerate(agreement.get("legs", [])):
            if not isinstance(leg, dict):
                problems.append(f"agreement.legs[{i}] must be an object")
                continue
            for key in ("payer", "token", "notional"):
                if key not in leg:
                    problems.append(f"agreement.legs[{i}].{key} is required")
            if leg.get("rate_type", "fixed") == "fixed" and "rate" not in leg:
                problems.append(f"agreement.legs[{i}].rate is required for fixed legs")
    events = config.get("events")
    if not isinstance(events, list):
        problems.append("missing 'events' list")
        return problems
    for i, event in enumerate(events):
        etype = event.get("type") if isinstance(event, dict) else None
        if etype not in SWAP_EVENT_TYPES:
            problems.append(f"events[{i}].type must be one of {SWAP_EVENT_TYPES}")
            continue
        if "time" not in event:
            problems.append(f"events[{i}] needs 'time'")
        required = {"tick": ("rate",), "replenish": ("party", "amount"), "terminate": ("party",)}[etype]
        for key in required:
            if key not in event:
                problems.append(f"events[{i}] ({etype}) needs '{key}'")
    return problems


def _agreement_from_config(spec) -> SwapAgreement:
    legs = [
        Leg(
            payer=leg["payer"],
            token=leg["token"],
            notional=leg["notional"],
            rate_type=leg.get("rate_type", "fixed"),
            rate=leg.get("rate"),
            spread=leg.get("spread", 0),
            frequency_days=leg.get("frequency_days"),
        )
        for leg in spec.get("legs", [])
    ]
    return SwapAgreement(
        notional_a=spec["notional_a"],
        notional_b=spec["notional_b"],
        margin_a=spec["margin_a"],
        margin_b=spec["margin_b"],
        threshold=spec["threshold"],
        x0=spec.get("x0"),
        termination_fee=spec.get("termination_fee", 0),
        maturity_time=spec.get("maturity_time"),
        legs=legs,
        threshold_base=spec.get("threshold_base", "initial_margin"),
        min_margin_fraction=spec.get("min_margin_fraction"),
    )


def _schedule(agreement: SwapAgreement, config) -> list:
    """Merge scenario events with generated accruals and maturity, in order."""
    events = [dict(e) for e in config["events"]]
    if agreement.maturity_time is not None:
        for i, leg in enumerate(agreement.legs):
            if leg.frequency_days is None:
                continue
            start = Fraction(0)
            while start < agreement.maturity_time:
                end = min(start + leg.frequency_days, agreement.maturity_time)
                events.append({"type": "accrue", "time": end, "start": start, "end": end, "leg": i})
                start = end
        events.append({"type": "mature", "time": agreement.maturity_time})
    return sorted(
        enumerate(events),
        key=lambda pair: (to_fraction(pair[1]["time"]), _PRIORITY[pair[1]["type"]], pair[0]),
    )


def run_swap_scenario(config) -> dict:
    """Replay a swap scenario; returns the audit trail and the final state."""
    problems = validate_swap_scenario(config)
    if problems:
        raise InputError("invalid swap scenario: " + "; ".join(problems))

    agreement = _agreement_from_config(config["agreement"])
    fixings = {int(k): v for k, v in config.get("fixings", {}).items()}
    agreement.initiate(time=0)

    settlement = None
    skipped = 0
    accrued = {}  # leg index -> periods already paid (merged multi-leg accrual)
    for _, event in _schedule(agreement, config):
        if agreement.state != "active":
            skipped += 1
            continue
        etype = event["type"]
        if etype == "tick":
            result = agreement.check_and_terminate(OracleTick(event["time"], event["rate"]))
            if result is not None:
                settlement = result
        elif etype == "replenish":
            agreement.replenish(event["party"], event["amount"], time=event["time"])
        elif etype == "accrue":
            i = event["leg"]
            agreement.accrue_legs(event["start"], event["end"], fixings=fixings or None, only=i)
            accrued[i] = accrued.get(i, 0) + 1
        elif etype == "terminate":
            settlement = agreement.voluntary_terminate(event["party"], event["time"])
        else:  # mature
            settlement = agreement.mature(event["time"])

    audit_rows = [
        {
            "seq": e.seq,
            "time": float(e.time),
            "event": e.event,
            "token": e.token,
            "source": e.source,
            "destination": e.destination,
            "amount": str(e.amount),
            "amount_float": float(e.amount),
            "note": e.note,
        }
        for e in agreement.ledger.entries
    ]
    final_state = {
        "state": agreement.state,
        "breaching_party": agreement.breaching_party,
        "balances": {
            f"{holder}_{token}": {
                "exact": str(agreement.ledger.balance(holder, token)),
                "value": float(agreement.ledger.balance(holder, token)),
            }
            for holder in ("A", "B", "contract")
            for token in (ALPHA, BETA)
        },
        "token_totals": {
            ALPHA: str(agreement.ledger.total(ALPHA)),
            BETA: str(agreement.ledger.total(BETA)),
        },
        "skipped_events": skipped,
        "accrual_periods": accrued,
    }
    if settlement is not None:
        final_state["settlement"] = {
            "time": float(settlement.time),
            "kind": settlement.kind,
            "party": settlement.party,
            "rate": float(settlement.rate),
            "transfer_token": settlement.transfer_token,
            "transfer_amount": str(settlement.transfer_amount),
            "uncollateralized_loss": str(settlement.uncollateralized_loss),
            "fee_amount": str(settlement.fee_amount),
        }
    return {"audit_rows": audit_rows, "final_state": final_state}


