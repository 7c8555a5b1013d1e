#!/usr/bin/env python3
"""Produce the figure CSV bundle (exponent curves, spectrum, moment growth).

Thin orchestration over the CLI: writes a config, runs the ``figures``,
``spectrum`` and ``intermittency`` subcommands into one output directory.
The rendering step lives in frontend/ (see its README).
"""

import argparse
import sys
import tempfile
from pathlib import Path

from kfwave.cli import main as cli_main

CANTOR = """
[ifs]
ratios = [0.3333333333333333, 0.3333333333333333]
offsets = [0.0, 0.6666666666666666]
weights = [0.5, 0.5]
boundary = "neumann"

[numerics]
level = {level}
dt = 0.001
horizon = 2.0
seed = {seed}
paths = {paths}
"""


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figure_data")
    ap.add_argument("--level", type=int, default=8)
    ap.add_argument("--paths", type=int, default=500)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--skip-simulation", action="store_true",
                    help="only the closed-form exponent curves")
    args = ap.parse_args()

    out = Path(args.out)
    body = CANTOR.format(level=args.level, seed=args.seed, paths=args.paths)
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "figure_run.toml"
        cfg.write_text(body)
        commands = [["figures", str(cfg)], ["spectrum", str(cfg)]]
        if not args.skip_simulation:
            commands.append(["intermittency", str(cfg)])
        for cmd in commands:
            rc = cli_main(cmd + ["--out", str(out)])
            if rc != 0:
                print(f"{cmd[0]} failed with exit code {rc}",
                      file=sys.stderr)
                return rc
            print(f"{cmd[0]}: done")
    print(f"CSV/JSON artifacts in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
