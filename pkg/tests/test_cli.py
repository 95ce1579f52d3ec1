import json
import pathlib

from numpy.testing import assert_allclose

from cryptoyield.cli import main as cli_main

REPO = pathlib.Path(__file__).resolve().parent.parent
DEMO = REPO / "scenarios" / "demo"


def read_report(out_dir):
    return json.loads((pathlib.Path(out_dir) / "report.json").read_text())


class TestLoanCommand:
    def test_degenerate_terms_match_deterministic_split(self, tmp_path):
        code = cli_main(
            [
                "loan", "price",
                "--collateral", "2.0", "--repay", "1.0",
                "--sigma-alpha", "0.0", "--sigma-beta", "0.0",
                "--out", str(tmp_path / "r"),
            ]
        )
        assert code == 0
        summary = read_report(tmp_path / "r")["summary"]
        assert summary["exchange_option_value"] == 1.0
        assert summary["borrower_value"] == 2.0
        assert summary["lender_value"] == 1.0

    def test_intermediates_exposed(self, tmp_path):
        cli_main(
            [
                "loan", "price",
                "--collateral", "1.0", "--repay", "1.0",
                "--sigma-alpha", "0.2",
                "--out", str(tmp_path / "r"),
            ]
        )
        summary = read_report(tmp_path / "r")["summary"]
        assert_allclose(summary["d1"], 0.1, atol=1e-15)
        assert_allclose(summary["d2"], -0.1, atol=1e-15)
        assert_allclose(summary["exchange_option_value"], 0.07965567455405796, atol=1e-12)

    def test_invalid_terms_exit_numeric_failure(self, tmp_path):
        code = cli_main(
            [
                "loan", "price",
                "--collateral", "1.0", "--repay", "1.0", "--rho", "2.0",
                "--out", str(tmp_path / "r"),
            ]
        )
        assert code == 3

    def test_missing_required_flags(self, tmp_path):
        code = cli_main(["loan", "price", "--out", str(tmp_path / "r")])
        assert code == 2

    def test_scenario_file_route(self, tmp_path):
        scenario = tmp_path / "loan.json"
        scenario.write_text(
            json.dumps(
                {
                    "terms": {"collateral": 1.5, "repay": 1.0, "sigma_alpha": 0.8, "tenor": 1.0},
                    "liquidation": {"barrier": 1.2, "penalty": 0.08},
                }
            )
        )
        out = tmp_path / "r"
        assert cli_main(["loan", "price", "--scenario", str(scenario), "--out", str(out)]) == 0
        summary = read_report(out)["summary"]
        assert_allclose(summary["liquidation"]["penalty_leg_value"], 0.06871372271014692, rtol=1e-9)


class TestPerpCommands:
    def test_deribit_funding_rows(self, tmp_path):
        quotes = tmp_path / "quotes.csv"
        quotes.write_text(
            "timestamp,mark,index\n0,40080,40000\n28800,40008,40000\n57600,39880,40000\n"
        )
        out = tmp_path / "r"
        assert cli_main(["perp", "funding", "--quotes", str(quotes), "--out", str(out)]) == 0
        rows = (out / "funding.csv").read_text().splitlines()
        header = rows[0].split(",")
        rate_col = header.index("funding_rate")
        rates = [float(r.split(",")[rate_col]) for r in rows[1:]]
        assert_allclose(rates, [0.0015, 0.0, -0.0025], atol=1e-15)

    def test_basis_report(self, tmp_path):
        quotes = tmp_path / "basis.csv"
        expiry = int(91.25 * 86400)
        quotes.write_text(f"timestamp,perp,future,expiry\n0,50000,51000,{expiry}\n")
        out = tmp_path / "r"
        assert cli_main(["perp", "basis", "--quotes", str(quotes), "--out", str(out)]) == 0
        summary = read_report(out)["summary"]
        assert_allclose(summary["mean_basis"], 0.02, rtol=1e-12)
        assert_allclose(summary["mean_rate_pct"], 7.921050918471885, rtol=1e-12)

    def test_bitmex_variant(self, tmp_path):
        quotes = tmp_path / "quotes.csv"
        quotes.write_text("timestamp,mark,index\n0,40120,40000\n28800,40012,40000\n")
        out = tmp_path / "r"
        code = cli_main(
            [
                "perp", "funding", "--quotes", str(quotes),
                "--variant", "bitmex", "--interest-rate", "0.0001",
                "--out", str(out),
            ]
        )
        assert code == 0
        rows = (out / "funding.csv").read_text().splitlines()
        rate_col = rows[0].split(",").index("funding_rate")
        rates = [float(r.split(",")[rate_col]) for r in rows[1:]]
        assert_allclose(rates, [0.0025, 0.0001], atol=1e-15)

    def test_malformed_csv_exits_2_and_names_line(self, tmp_path, capsys):
        quotes = tmp_path / "quotes.csv"
        quotes.write_text("timestamp,mark,index\n0,x,40000\n")
        code = cli_main(["perp", "funding", "--quotes", str(quotes), "--out", str(tmp_path / "r")])
        assert code == 2
        assert "quotes.csv:2" in capsys.readouterr().err


class TestImpliedRateCommand:
    def test_demo_chain_recovers_rate(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(
            ["implied-rate", "--chain", str(DEMO / "option_chain.csv"), "--out", str(out)]
        )
        assert code == 0
        summary = read_report(out)["summary"]
        assert summary["excluded_points"] == 0
        assert abs(summary["mean_rate_pct"] - 5.0) < 1e-7


class TestStakeCommand:
    def test_demo_validators(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(["stake", "--balances", str(DEMO / "validators.csv"), "--out", str(out)])
        assert code == 0
        summary = read_report(out)["summary"]
        assert summary["validators"] == 4
        assert summary["days"] == 5
        bands = (out / "bands.csv").read_text().splitlines()
        assert bands[0] == "day,percentile,return_pct"
        assert len(bands) == 1 + 5 * 7

    def test_single_day(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(
            [
                "stake", "--balances", str(DEMO / "validators.csv"),
                "--day", "2021-06-02", "--percentiles", "50",
                "--out", str(out),
            ]
        )
        assert code == 0
        row = (out / "bands.csv").read_text().splitlines()[1].split(",")
        assert row[0] == "2021-06-02"
        # Four validators are eligible that day (v4 is flat at 32.2, return 0);
        # the median interpolates between 365 * 0.00009 and 365 * 0.00011.
        assert_allclose(float(row[2]), 100 * 365 * (0.00009 + 0.00011) / 2, rtol=1e-6)


class TestAmmAndXccyCommands:
    def test_amm_scenario(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(
            ["amm", "--scenario", str(DEMO / "pool_scenario.json"), "--out", str(out)]
        )
        assert code == 0
        pool_rows = (out / "pool.csv").read_text().splitlines()
        assert len(pool_rows) == 1 + 7  # create + six events
        assert (out / "positions.csv").exists()

    def test_xccy_scenario(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(
            ["xccy", "simulate", "--scenario", str(DEMO / "swap_scenario.json"), "--out", str(out)]
        )
        assert code == 0
        summary = read_report(out)["summary"]
        assert summary["state"] == "matured"
        assert summary["token_totals"] == {"alpha": "106", "beta": "106"}


class TestOracleAndKelly:
    def test_oracle_exchange(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(
            [
                "oracle", "price",
                "--sigma-a", "0.2", "--paths", "50000", "--seed", "9",
                "--payoff", "exchange", "--out", str(out),
            ]
        )
        assert code == 0
        summary = read_report(out)["summary"]
        assert abs(summary["estimate"] - 0.0796556745540580) < 4 * summary["std_error"]

    def test_kelly_command(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(
            [
                "kelly", "--means", "0.1", "--riskless", "0.0", "--cov", "0.04",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert read_report(out)["summary"]["weights"] == [2.5]

    def test_oracle_one_touch(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(
            [
                "oracle", "price",
                "--s0-a", "1.5", "--sigma-a", "0.8", "--steps", "256",
                "--paths", "50000", "--seed", "13",
                "--payoff", "one_touch", "--barrier", "1.2", "--payout", "0.08",
                "--out", str(out),
            ]
        )
        assert code == 0
        summary = read_report(out)["summary"]
        assert abs(summary["estimate"] - 0.06871372271014692) < 4 * summary["std_error"]

    def test_kelly_singular_exit_3(self, tmp_path):
        code = cli_main(
            [
                "kelly", "--means", "0.1,0.2", "--riskless", "0.0",
                "--cov", "0.04,0.04;0.04,0.04",
                "--out", str(tmp_path / "r"),
            ]
        )
        assert code == 3


class TestRunAndValidate:
    def test_run_resolves_paths_relative_to_config(self, tmp_path):
        out = tmp_path / "r"
        code = cli_main(["run", "--config", str(DEMO / "stake.json"), "--out", str(out)])
        assert code == 0
        report = read_report(out)
        assert report["provenance"]["config_hash"]
        assert report["provenance"]["version"]

    def test_validate_valid_config(self, capsys):
        assert cli_main(["validate", "--config", str(DEMO / "stake.json")]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload == {"valid": True, "problems": []}

    def test_validate_empty_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{}")
        assert cli_main(["validate", "--config", str(cfg)]) == 2
        payload = json.loads(capsys.readouterr().out)
        assert payload["valid"] is False
        assert payload["problems"]

    def test_validate_names_missing_column(self, tmp_path, capsys):
        bad = tmp_path / "balances.csv"
        bad.write_text("id,timestamp,balance,state\nv,0,32,Active\n")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "stake", "balances": str(bad)}))
        assert cli_main(["validate", "--config", str(cfg)]) == 2
        payload = json.loads(capsys.readouterr().out)
        assert any("validator_id" in p for p in payload["problems"])

    def test_validate_collects_multiple_problems(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "kelly"}))
        cli_main(["validate", "--config", str(cfg)])
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["problems"]) >= 2

    def test_missing_input_file_exit_2(self, tmp_path):
        code = cli_main(
            ["stake", "--balances", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "r")]
        )
        assert code == 2

    def test_validate_pool_scenario_diagnostics(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        scenario = tmp_path / "scenario.json"
        scenario.write_text(json.dumps({"pool": {"reserve_x": 1}, "events": [{"action": "warp"}]}))
        cfg.write_text(json.dumps({"command": "amm", "scenario": str(scenario)}))
        assert cli_main(["validate", "--config", str(cfg)]) == 2
        payload = json.loads(capsys.readouterr().out)
        assert any("reserve_y" in p for p in payload["problems"])
        assert any("action" in p for p in payload["problems"])

    def test_run_unknown_command(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "teleport"}))
        assert cli_main(["run", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 2
