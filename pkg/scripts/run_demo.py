#!/usr/bin/env python3
"""Run every demo scenario through the CLI into out/demo/<name>/.

Usage: python3 scripts/run_demo.py [output-root]
"""

import pathlib
import sys

from cryptoyield.cli import main as cli_main

DEMO_CONFIGS = (
    "stake",
    "amm",
    "loan",
    "perp_funding",
    "perp_basis",
    "implied_rate",
    "xccy",
    "oracle",
    "kelly",
)


def run_pack(out_root: pathlib.Path, demo_dir: pathlib.Path) -> int:
    worst = 0
    for name in DEMO_CONFIGS:
        config = demo_dir / f"{name}.json"
        out_dir = out_root / name
        code = cli_main(["run", "--config", str(config), "--out", str(out_dir)])
        status = "ok" if code == 0 else f"exit {code}"
        print(f"[{status}] {name} -> {out_dir}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    repo = pathlib.Path(__file__).resolve().parent.parent
    out_root = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else repo / "out" / "demo"
    sys.exit(run_pack(out_root, repo / "scenarios" / "demo"))
