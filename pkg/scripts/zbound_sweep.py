#!/usr/bin/env python3
"""Log-normalizer bound sweep: Jensen lower bound and unbiased estimate over
a (T, beta) grid, with the theorem-shape constant fitted across the sweep.

Writes zbound.json and manifest.json into --out.
"""

import argparse
import sys
import tempfile
from pathlib import Path

from starpoly.cli import main as cli_main

CONFIG_TEMPLATE = """\
seed = {seed}
model.d = {d}
model.N = {N}
model.T = 1.0
model.beta = 1.0
model.n = {n}
zbound.n_samples = {samples}
sweep.T = {horizons}
sweep.beta = {betas}
"""


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20260826)
    ap.add_argument("--d", type=int, default=2, choices=(1, 2, 3))
    ap.add_argument("--branches", type=int, default=4)
    ap.add_argument("--n", type=int, default=128, help="steps per branch")
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--horizons", default="1,2,4")
    ap.add_argument("--betas", default="0.5,1,2")
    ap.add_argument("--out", default="out/zbound_sweep")
    args = ap.parse_args()

    text = CONFIG_TEMPLATE.format(
        seed=args.seed, d=args.d, N=args.branches, n=args.n,
        samples=args.samples, horizons=args.horizons, betas=args.betas)
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(text)
        cfg_path = fh.name
    try:
        return cli_main(["zbound", "--config", cfg_path,
                         "--out", str(Path(args.out))])
    finally:
        Path(cfg_path).unlink(missing_ok=True)


if __name__ == "__main__":
    sys.exit(main())
