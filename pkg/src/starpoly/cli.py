"""Command-line experiment orchestration.

Subcommands: simulate, zbound, verify, radius-scan, report.  All randomness
flows from the config's master seed; chain c uses the stream
SeedSequence(master_seed, spawn_key=(c,)), so alternate runners can reproduce
individual chains.  Every emitted file is listed in manifest.json with its
SHA-256 digest.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (band_hypothesis_ok, exponent_fit, predicted_radius_band,
                       tail_event_rates)
from .config import ExperimentConfig, load_config
from .paths import StarConfig
from .sampler import MoveMix, run_chain
from .verifier import verify_sweep
from .zbound import (estimate_z, fit_shape_constant, shape_in_hypothesis,
                     theorem_shape)

FLOAT_FMT = "%.17g"


def _fmt(x) -> str:
    if isinstance(x, float):
        return FLOAT_FMT % x
    return str(x)


def chain_seed_sequence(master_seed: int, chain_index: int) -> np.random.SeedSequence:
    """Documented stream-splitting rule for per-chain rngs."""
    return np.random.SeedSequence(master_seed, spawn_key=(chain_index,))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Manifest:
    def __init__(self, cfg: ExperimentConfig, out_dir: Path):
        self.out_dir = out_dir
        self.start = time.time()
        self.data = {
            "artifact_version": __version__,
            "config": cfg.to_dict(),
            "chain_seeds": [],
            "files": {},
        }

    def record_chain_seed(self, chain_index: int):
        self.data["chain_seeds"].append(
            {"chain": chain_index, "spawn_key": [chain_index],
             "entropy": self.data["config"]["seed"]})

    def add_file(self, path: Path):
        self.data["files"][path.name] = _sha256(path)

    def write(self):
        self.data["wall_clock_seconds"] = time.time() - self.start
        path = self.out_dir / "manifest.json"
        if path.exists():
            # keep digests of files written by earlier commands into the same dir
            try:
                previous = json.loads(path.read_text()).get("files", {})
            except (json.JSONDecodeError, OSError):
                previous = {}
            previous.update(self.data["files"])
            self.data["files"] = previous
        path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")


def _star_config(cfg: ExperimentConfig) -> StarConfig:
    m = cfg.model
    return StarConfig(d=m.d, N=m.N, T=m.T, beta=m.beta, n=m.n)


def _move_mix(cfg: ExperimentConfig) -> MoveMix:
    s = cfg.sampler
    return MoveMix(bridge=s.bridge, tail=s.tail, redraw=s.redraw,
                   mean_segment_frac=s.mean_segment_frac)


def run_chains(cfg: ExperimentConfig, star: StarConfig, manifest: Manifest | None = None):
    """All configured chains, each on its own derived stream."""
    s = cfg.sampler
    out = []
    for c in range(s.chains):
        seq = chain_seed_sequence(cfg.seed, c)
        if manifest is not None:
            manifest.record_chain_seed(c)
        rng = np.random.Generator(np.random.PCG64(seq))
        recs = run_chain(star, s.steps, s.burn_in, s.thinning, rng,
                         mix=_move_mix(cfg), spread=s.spread)
        out.append(recs)
    return out


def write_records_csv(path: Path, all_records, N: int):
    header = (["chain", "step", "energy_total", "energy_self", "energy_cross",
               "radius_median"]
              + [f"sup_{k + 1}" for k in range(N)]
              + ["acc_bridge", "acc_tail", "acc_redraw"])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for chain_idx, recs in enumerate(all_records):
            for rec in recs:
                row = [chain_idx, rec.step, rec.energy_total, rec.energy_self,
                       rec.energy_cross, rec.radius_median]
                row += list(rec.suprema)
                row += [rec.acceptance["bridge"], rec.acceptance["tail"],
                        rec.acceptance["redraw"]]
                writer.writerow([_fmt(x) for x in row])


def _simulate_summary(cfg: ExperimentConfig, star: StarConfig, all_records) -> dict:
    energies = np.array([r.energy_total for recs in all_records for r in recs])
    radii = np.array([r.radius_median for recs in all_records for r in recs])
    summary = {
        "config": cfg.to_dict(),
        "record_count": int(len(energies)),
        "mean_energy": float(energies.mean()),
        "energy_sigma": float(energies.std()),
        "radius_quantiles": {q: float(np.quantile(radii, float(q)))
                             for q in ("0.05", "0.25", "0.5", "0.75", "0.95")},
        "acceptance": all_records[-1][-1].acceptance if all_records[-1] else {},
    }
    s = cfg.sampler
    if s.r1 is not None and s.r2 is not None:
        summary["tail_rates"] = tail_event_rates(radii, s.r1, s.r2)
    return summary


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, quiet: bool = False) -> int:
    star = _star_config(cfg)
    manifest = Manifest(cfg, out_dir)
    all_records = run_chains(cfg, star, manifest)
    records_path = out_dir / "records.csv"
    write_records_csv(records_path, all_records, star.N)
    summary = _simulate_summary(cfg, star, all_records)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    manifest.add_file(records_path)
    manifest.add_file(summary_path)
    manifest.write()
    if not quiet:
        print(f"wrote {records_path} ({summary['record_count']} records), "
              f"mean energy {summary['mean_energy']:.6g}")
    return 0


def _zbound_point(cfg: ExperimentConfig, star: StarConfig, rng) -> dict:
    est = estimate_z(star, cfg.zbound.n_samples, rng,
                     resample_theta=cfg.zbound.resample_theta)
    shape = theorem_shape(star.d, star.beta, star.N, star.T)
    return {
        "d": star.d, "N": star.N, "T": star.T, "beta": star.beta, "n": star.n,
        **est.to_dict(),
        "theorem_shape": shape,
        "in_hypothesis": shape_in_hypothesis(star.d, star.beta, star.N, star.T),
    }


def cmd_zbound(cfg: ExperimentConfig, out_dir: Path, quiet: bool = False) -> int:
    manifest = Manifest(cfg, out_dir)
    rng = np.random.Generator(np.random.PCG64(chain_seed_sequence(cfg.seed, 0)))
    base = _star_config(cfg)
    points = []
    sweep_T = cfg.sweep.T or [base.T]
    sweep_beta = cfg.sweep.beta or [base.beta]
    sweep_N = cfg.sweep.N or [base.N]
    for T in sweep_T:
        for beta in sweep_beta:
            for N in sweep_N:
                star = StarConfig(d=base.d, N=N, T=T, beta=beta, n=base.n)
                points.append(_zbound_point(cfg, star, rng))
    out = {"points": points, "note": "jensen_lower uses the nonnegative "
           "divergence form: log Z >= -beta*E[energy] - KL"}
    if len(points) > 1:
        shapes = np.array([p["theorem_shape"] for p in points])
        neg_jl = np.array([-p["jensen_lower"] for p in points])
        out["fitted_C"] = fit_shape_constant(shapes, neg_jl)
    path = out_dir / "zbound.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    manifest.add_file(path)
    manifest.write()
    if not quiet:
        jl = points[0]["jensen_lower"]
        print(f"wrote {path}; first point jensen_lower={jl:.6g}")
    return 0


def cmd_verify(out_dir: Path, quiet: bool = False, self_test_fail: bool = False) -> int:
    results = verify_sweep(include_broken=self_test_fail)
    path = out_dir / "verify.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["inequality", "params", "computed", "reference",
                         "ratio", "error_estimate", "verdict"])
        for r in results:
            writer.writerow([
                r.name, json.dumps(r.params, sort_keys=True), _fmt(r.computed),
                "" if r.reference is None else _fmt(r.reference),
                "" if r.ratio is None else _fmt(r.ratio),
                _fmt(r.error_estimate), "pass" if r.passed else "FAIL",
            ])
    failures = [r for r in results if not r.passed]
    if not quiet:
        print(f"wrote {path}: {len(results) - len(failures)}/{len(results)} pass")
        for r in failures:
            print(f"  FAIL {r.name} {r.params}")
    return 1 if failures else 0


def _radius_svg(path: Path, horizons, radii, bands, fit):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    pts = ax.loglog(horizons, radii, "o", label="measured radius")[0]
    pts.set_gid("series-data")
    low = [b[0] for b in bands]
    high = [b[1] for b in bands]
    l1 = ax.loglog(horizons, low, "--", label="band low")[0]
    l1.set_gid("series-band-low")
    l2 = ax.loglog(horizons, high, "--", label="band high")[0]
    l2.set_gid("series-band-high")
    tgrid = np.array(horizons, dtype=float)
    fit_line = np.exp(fit.intercept) * tgrid**fit.slope
    l3 = ax.loglog(tgrid, fit_line, "-",
                   label=f"fit slope {fit.slope:.3f} ± {fit.half_width:.3f}")[0]
    l3.set_gid("series-fit")
    ax.set_xlabel("horizon T")
    ax.set_ylabel("median branch supremum")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_radius_scan(cfg: ExperimentConfig, out_dir: Path, c_low: float = 1.0,
                    c_high: float = 1.0, quiet: bool = False) -> int:
    if len(cfg.sweep.T) < 3:
        print("radius-scan needs at least 3 sweep horizons (sweep.T)",
              file=sys.stderr)
        return 2
    manifest = Manifest(cfg, out_dir)
    base = _star_config(cfg)
    horizons = sorted(cfg.sweep.T)
    radii = []
    bands = []
    for idx, T in enumerate(horizons):
        star = StarConfig(d=base.d, N=base.N, T=T, beta=base.beta, n=base.n)
        seq = np.random.SeedSequence(cfg.seed, spawn_key=(1000 + idx,))
        rng = np.random.Generator(np.random.PCG64(seq))
        s = cfg.sampler
        recs = run_chain(star, s.steps, s.burn_in, s.thinning, rng,
                         mix=_move_mix(cfg), spread=s.spread)
        med = float(np.median([r.radius_median for r in recs]))
        radii.append(med)
        bands.append(predicted_radius_band(star.d, star.beta, star.N, T,
                                           c_low=c_low, c_high=c_high))
        if not quiet:
            print(f"T={T}: radius median {med:.4g}")
    fit = exponent_fit(horizons, radii)
    fit_out = {
        "horizons": horizons, "radii": radii,
        "slope": fit.slope, "intercept": fit.intercept,
        "half_width": fit.half_width, "residual": fit.residual,
        "bands": bands, "c_low": c_low, "c_high": c_high,
        "hypothesis_ok": [band_hypothesis_ok(base.d, base.beta, base.N, T)
                          for T in horizons],
    }
    fit_path = out_dir / "radius_fit.json"
    fit_path.write_text(json.dumps(fit_out, indent=2, sort_keys=True) + "\n")
    svg_path = out_dir / "radius.svg"
    _radius_svg(svg_path, horizons, radii, bands, fit)
    manifest.add_file(fit_path)
    manifest.add_file(svg_path)
    manifest.write()
    if not quiet:
        print(f"fitted exponent {fit.slope:.4f} ± {fit.half_width:.4f}")
    return 0


def cmd_report(out_dir: Path, quiet: bool = False) -> int:
    report = {}
    for name in ("summary.json", "zbound.json", "radius_fit.json", "manifest.json"):
        p = out_dir / name
        if p.exists():
            report[name.removesuffix(".json")] = json.loads(p.read_text())
    verify = out_dir / "verify.csv"
    if verify.exists():
        with verify.open() as fh:
            rows = list(csv.DictReader(fh))
        report["verify"] = {"rows": len(rows),
                            "failures": [r["inequality"] for r in rows
                                         if r["verdict"] != "pass"]}
    if not report:
        print(f"no artifacts found in {out_dir}", file=sys.stderr)
        return 2
    path = out_dir / "report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if not quiet:
        print(f"wrote {path} (sections: {', '.join(sorted(report))})")
    return 0


def _add_common(parser, needs_config=True):
    if needs_config:
        parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--chains", type=int, default=None,
                        help="override chain count")
    parser.add_argument("--quiet", action="store_true")


def _load(args) -> tuple[ExperimentConfig, Path]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig(seed=args.seed, model=cfg.model,
                               sampler=cfg.sampler, zbound=cfg.zbound,
                               sweep=cfg.sweep, out=cfg.out)
    if getattr(args, "chains", None) is not None:
        cfg.sampler.chains = args.chains
    out_dir = Path(args.out or cfg.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="starpoly",
        description="Star-polymer penalized-measure simulator and verifier")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run MCMC chains and write records")
    _add_common(p)
    p = sub.add_parser("zbound", help="estimate the log-normalizer bounds")
    _add_common(p)
    p = sub.add_parser("verify", help="run the deterministic quadrature sweep")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--self-test-fail", action="store_true",
                   help=argparse.SUPPRESS)
    p = sub.add_parser("radius-scan", help="radius scaling sweep over horizons")
    _add_common(p)
    p.add_argument("--c-low", type=float, default=1.0,
                   help="constant multiplying the lower band")
    p.add_argument("--c-high", type=float, default=1.0,
                   help="constant multiplying the upper band")
    p = sub.add_parser("report", help="aggregate artifacts in an output directory")
    p.add_argument("--out", default=".", help="directory to aggregate")
    p.add_argument("--quiet", action="store_true")

    args = parser.parse_args(argv)
    if args.command == "verify":
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return cmd_verify(out_dir, quiet=args.quiet,
                          self_test_fail=args.self_test_fail)
    if args.command == "report":
        return cmd_report(Path(args.out), quiet=args.quiet)
    cfg, out_dir = _load(args)
    if args.command == "simulate":
        return cmd_simulate(cfg, out_dir, quiet=args.quiet)
    if args.command == "zbound":
        return cmd_zbound(cfg, out_dir, quiet=args.quiet)
    if args.command == "radius-scan":
        return cmd_radius_scan(cfg, out_dir, c_low=args.c_low,
                               c_high=args.c_high, quiet=args.quiet)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
