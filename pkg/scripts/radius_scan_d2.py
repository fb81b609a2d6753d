#!/usr/bin/env python3
"""Radius scaling scan in d=2: run chains over a horizon sweep, fit the
log-log slope, and plot it against the theoretical band.

Writes radius_fit.json, radius.svg and manifest.json into --out.
"""

import argparse
import sys
import tempfile
from pathlib import Path

from starpoly.cli import main as cli_main

CONFIG_TEMPLATE = """\
seed = {seed}
model.d = 2
model.N = {N}
model.T = 1.0
model.beta = {beta}
model.n = {n}
sampler.steps = {steps}
sampler.burn_in = {burn_in}
sampler.thinning = 10
sampler.spread = 2.0
sampler.bridge = 0.85
sampler.tail = 0.12
sampler.redraw = 0.03
sampler.mean_segment_frac = 0.0625
sweep.T = {horizons}
"""


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20260826)
    ap.add_argument("--beta", type=float, default=4.0)
    ap.add_argument("--branches", type=int, default=8)
    ap.add_argument("--n", type=int, default=256, help="steps per branch")
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--burn-in", type=int, default=6000)
    ap.add_argument("--horizons", default="1,2,4,8")
    ap.add_argument("--out", default="out/radius_scan_d2")
    args = ap.parse_args()

    text = CONFIG_TEMPLATE.format(
        seed=args.seed, N=args.branches, beta=args.beta, n=args.n,
        steps=args.steps, burn_in=args.burn_in, horizons=args.horizons)
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(text)
        cfg_path = fh.name
    try:
        return cli_main(["radius-scan", "--config", cfg_path,
                         "--out", str(Path(args.out))])
    finally:
        Path(cfg_path).unlink(missing_ok=True)


if __name__ == "__main__":
    sys.exit(main())
