"""End-to-end command tests: config parsing, artifact layout, determinism,
manifests, and exit codes."""

import csv
import hashlib
import json

import pytest

from starpoly.cli import chain_seed_sequence, main
from starpoly.config import ConfigError, parse_config_text

BASE_CFG = """
# minimal fast experiment
seed = 2718
model.d = 1
model.N = 2
model.T = 1.0
model.beta = 0.3
model.n = 8
sampler.steps = 600
sampler.burn_in = 100
sampler.thinning = 5
sampler.chains = 2
sampler.r1 = 0.5
sampler.r2 = 2.0
zbound.n_samples = 400
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(BASE_CFG)
    return p


def read_manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


def test_config_parsing():
    cfg = parse_config_text(BASE_CFG)
    assert cfg.seed == 2718
    assert cfg.model.N == 2
    assert cfg.sampler.thinning == 5
    assert cfg.sampler.r1 == 0.5


@pytest.mark.parametrize("line,msg", [
    ("model.gamma = 3", "unknown key"),
    ("seed = 1\nseed = 2", "duplicate"),
    ("model.n = many", "bad value"),
    ("model.n 8", "expected"),
])
def test_config_rejects_bad_input(line, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config_text("seed = 1\n" + line if "seed" not in line else line)


def test_config_requires_seed():
    with pytest.raises(ConfigError, match="seed"):
        parse_config_text("model.d = 2")


def test_chain_seed_rule():
    a = chain_seed_sequence(2718, 0)
    b = chain_seed_sequence(2718, 1)
    assert a.entropy == b.entropy == 2718
    assert a.spawn_key == (0,)
    assert a.generate_state(2).tolist() != b.generate_state(2).tolist()


def test_simulate_artifacts_and_bookkeeping(cfg_path, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"]) == 0
    with (out / "records.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    # chains * ceil((steps - burn_in) / thinning)
    assert len(rows) == 2 * 100
    assert set(rows[0]) == {"chain", "step", "energy_total", "energy_self",
                            "energy_cross", "radius_median", "sup_1", "sup_2",
                            "acc_bridge", "acc_tail", "acc_redraw"}
    for row in rows:
        et = float(row["energy_total"])
        assert et > 0
        assert abs(et - float(row["energy_self"]) - float(row["energy_cross"])) \
            < 1e-9 * et
    summary = json.loads((out / "summary.json").read_text())
    assert summary["record_count"] == 200
    assert "tail_rates" in summary
    manifest = read_manifest(out)
    assert len(manifest["chain_seeds"]) == 2
    for name in ("records.csv", "summary.json"):
        digest = hashlib.sha256((out / name).read_bytes()).hexdigest()
        assert manifest["files"][name] == digest


def test_simulate_is_byte_deterministic(cfg_path, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out),
                     "--quiet"]) == 0
    assert (out1 / "records.csv").read_bytes() == (out2 / "records.csv").read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


def test_seed_override_changes_output(cfg_path, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out1),
                 "--quiet"]) == 0
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out2),
                 "--seed", "999", "--quiet"]) == 0
    assert (out1 / "records.csv").read_bytes() != (out2 / "records.csv").read_bytes()


def test_zbound_artifacts(cfg_path, tmp_path):
    sweep_cfg = tmp_path / "sweep.cfg"
    sweep_cfg.write_text(BASE_CFG + "sweep.T = 1.0, 2.0\n")
    out = tmp_path / "zb"
    assert main(["zbound", "--config", str(sweep_cfg), "--out", str(out),
                 "--quiet"]) == 0
    data = json.loads((out / "zbound.json").read_text())
    assert len(data["points"]) == 2
    p = data["points"][0]
    for key in ("jensen_lower", "jensen_sigma", "unbiased_log", "kl",
                "theorem_shape", "in_hypothesis"):
        assert key in p
    assert p["jensen_lower"] <= p["unbiased_log"] + 5 * p["unbiased_sigma"]
    assert "fitted_C" in data


def test_verify_exit_codes(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--out", str(out), "--quiet"]) == 0
    with (out / "verify.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert all(r["verdict"] == "pass" for r in rows)
    assert main(["verify", "--out", str(out), "--quiet",
                 "--self-test-fail"]) == 1


def test_radius_scan_needs_three_horizons(cfg_path, tmp_path):
    assert main(["radius-scan", "--config", str(cfg_path),
                 "--out", str(tmp_path / "r"), "--quiet"]) == 2


def test_radius_scan_artifacts(tmp_path):
    cfg = tmp_path / "scan.cfg"
    cfg.write_text(BASE_CFG + "sweep.T = 1.0, 2.0, 4.0\n")
    out = tmp_path / "scan"
    assert main(["radius-scan", "--config", str(cfg), "--out", str(out),
                 "--quiet"]) == 0
    fit = json.loads((out / "radius_fit.json").read_text())
    assert fit["horizons"] == [1.0, 2.0, 4.0]
    assert len(fit["radii"]) == 3
    assert len(fit["bands"]) == 3
    svg = (out / "radius.svg").read_text()
    for gid in ("series-data", "series-band-low", "series-band-high", "series-fit"):
        assert f'id="{gid}"' in svg
    manifest = read_manifest(out)
    assert {"radius_fit.json", "radius.svg"} <= set(manifest["files"])


def test_report_aggregates_and_manifest_merges(cfg_path, tmp_path):
    out = tmp_path / "all"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"]) == 0
    assert main(["zbound", "--config", str(cfg_path), "--out", str(out),
                 "--quiet"]) == 0
    assert main(["verify", "--out", str(out), "--quiet"]) == 0
    # manifest written by the later command keeps the earlier files' digests
    manifest = read_manifest(out)
    assert {"records.csv", "summary.json", "zbound.json"} <= set(manifest["files"])
    assert main(["report", "--out", str(out), "--quiet"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert {"summary", "zbound", "verify", "manifest"} <= set(report)
    assert report["verify"]["failures"] == []
    # report on an empty directory is an error
    assert main(["report", "--out", str(tmp_path / "empty"), "--quiet"]) == 2
