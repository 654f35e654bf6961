"""Run every shipped experiment config through the CLI.

    python3 scripts/run_experiments.py [--out DIR]

Outputs land in DIR (default $ACTIVE_EXP_OUT or ./results). Configs whose
manifest already exists are reused, not recomputed.
"""

import argparse
import sys
from pathlib import Path

from active_explicable.cli import main

ROOT = Path(__file__).resolve().parent.parent
RUNS = [
    ("convergence", "convergence.json"),
    ("noise", "noise.json"),
    ("comparison", "comparison_blocksworld.json"),
    ("comparison", "comparison_taxi.json"),
]


def run(out=None):
    worst = 0
    for kind, cfg in RUNS:
        print(f"== {kind} {cfg}")
        argv = ["experiment", kind, str(ROOT / "configs" / cfg)]
        if out:
            argv += ["--out", out]
        worst = max(worst, main(argv))
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None)
    sys.exit(run(ap.parse_args().out))
