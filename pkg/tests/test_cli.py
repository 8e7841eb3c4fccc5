"""Configuration loading and the command-line harness.

CLI contracts: exit code 0 on success, 1 on validation errors (with the
offending key named), 2 on solver failures; deterministic TSV reports;
per-row energy equals power/throughput to 1e-9 relative.
"""

import os

import numpy as np
import pytest

from sclink.cli import main
from sclink.config import ConfigError, load_config

BASE_CONFIG = """
[grid]
band_set = {band_set}
[raman]
pump_count = {pumps}
[link]
span_count = {spans}
[amplifiers]
p_mm_w = {p_mm}
[solver]
step_km = {step}
fitness_step_km = 2.0
fitness_bvp_tol = 1e-4
[pso]
particles = 5
iterations = 6
seed = 11
[sweep]
band_sets = CL
span_counts = 1
pump_counts = 0, 1
p_mm_values_w = 0, 8
"""


def write_config(tmp_path, band_set="CL", pumps=0, spans=1, p_mm=8.0,
                 step=1.0, extra=""):
    path = tmp_path / "link.ini"
    path.write_text(BASE_CONFIG.format(band_set=band_set, pumps=pumps,
                                       spans=spans, p_mm=p_mm,
                                       step=step) + extra)
    return str(path)


def read_tsv(path):
    with open(path) as fh:
        lines = [l.rstrip("\n") for l in fh if not l.startswith("#")]
    header = lines[0].split("\t")
    return [dict(zip(header, line.split("\t"))) for line in lines[1:]]


def test_load_default_packaged_config():
    from importlib import resources
    with resources.as_file(resources.files("sclink.data")
                           .joinpath("link_scl.ini")) as p:
        cfg = load_config(str(p))
    assert cfg.band_set == "SCL"
    assert len(cfg.grid) == 127
    assert cfg.p_mm_w == 8.0
    assert cfg.solver.damping == 0.5


def test_unknown_band_set_names_key(tmp_path):
    path = write_config(tmp_path, band_set="XL")
    with pytest.raises(ConfigError, match="grid.band_set"):
        load_config(path)


def test_unknown_key_rejected(tmp_path):
    path = write_config(tmp_path, extra="\n[grid]\nflorb = 1\n")
    with pytest.raises(ConfigError, match="grid.florb"):
        load_config(path)


def test_bad_value_names_key(tmp_path):
    path = write_config(tmp_path, spans="three")
    with pytest.raises(ConfigError, match="link.span_count"):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "nope.ini"))


def test_validate_exit_codes(tmp_path, capsys):
    good = write_config(tmp_path)
    assert main(["validate", "--config", good,
                 "--out-dir", str(tmp_path / "out")]) == 0
    assert "73 channels" in capsys.readouterr().out

    bad = write_config(tmp_path, band_set="QQ")
    assert main(["validate", "--config", bad,
                 "--out-dir", str(tmp_path / "out")]) == 1
    assert "band_set" in capsys.readouterr().err


def test_run_writes_reports(tmp_path, capsys):
    cfg = write_config(tmp_path, band_set="CL", pumps=0, spans=1, p_mm=0.0)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out)]) == 0
    sid = "CL_ns1_np0_pmm0"
    for suffix in ("quality", "ledger", "summary"):
        assert (out / f"{sid}_{suffix}.tsv").exists()
    rows = read_tsv(out / f"{sid}_summary.tsv")
    bands = {r["band"] for r in rows}
    assert bands == {"C", "L", "total"}
    for r in rows:
        power = float(r["power_w"])
        tbps = float(r["throughput_tbps"])
        energy = float(r["energy_pj_bit"])
        assert energy == pytest.approx(power / tbps, rel=1e-9)


def test_quality_report_has_snr_columns(tmp_path):
    cfg = write_config(tmp_path, band_set="CL", pumps=0, spans=1)
    out = tmp_path / "out"
    main(["run", "--config", cfg, "--out-dir", str(out)])
    rows = read_tsv(out / "CL_ns1_np0_pmm8_quality.tsv")
    assert len(rows) == 73
    total = float(rows[0]["snr_total_db"])
    assert total <= float(rows[0]["snr_ase_db"]) + 1e-9
    assert total <= 20.0 + 1e-9  # transceiver ceiling


def test_dump_profile(tmp_path):
    cfg = write_config(tmp_path, band_set="CL")
    out = tmp_path / "out"
    code = main(["dump-profile", "--config", cfg, "--out-dir", str(out),
                 "--pumps", "1425:200,1445:100"])
    assert code == 0
    with open(out / "profile.tsv") as fh:
        header = [l for l in fh if not l.startswith("#")][0].split("\t")
    assert header[0] == "z_km"
    assert sum(1 for c in header if c.startswith("pump_")) == 2
    assert sum(1 for c in header if not c.startswith(("z_km", "pump_"))) == 73


def test_optimize_writes_monotone_trace(tmp_path, capsys):
    cfg = write_config(tmp_path, band_set="CL", pumps=1, spans=10)
    out = tmp_path / "out"
    assert main(["optimize", "--config", cfg, "--out-dir", str(out)]) == 0
    trace = []
    with open(out / "pso_trace.tsv") as fh:
        for line in fh:
            if line.startswith(("#", "iteration")):
                continue
            trace.append(float(line.split("\t")[1]))
    assert len(trace) == 6
    assert np.all(np.diff(trace) >= 0)
    assert (out / "pso_cache.json").exists()


def test_sweep_table_and_baseline_column(tmp_path):
    cfg = write_config(tmp_path, band_set="CL")
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out-dir", str(out)]) == 0
    rows = read_tsv(out / "sweep.tsv")
    # 1 band set x 1 span count x 2 pump counts x 2 p_mm, 3 rows each
    assert len(rows) == 12
    for r in rows:
        energy = float(r["energy_pj_bit"])
        assert energy == pytest.approx(float(r["power_w"])
                                       / float(r["throughput_tbps"]),
                                       rel=1e-9)
        if r["pump_count"] == "0":
            assert float(r["energy_change_pct"]) == 0.0
        if r["band"] == "total":
            assert 0.0 < float(r["power_norm"]) <= 1.0


def test_sweep_deterministic(tmp_path):
    cfg = write_config(tmp_path, band_set="CL")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["sweep", "--config", cfg, "--out-dir", str(out)]) == 0
        outs.append((out / "sweep.tsv").read_text())
    assert outs[0] == outs[1]


def test_sweep_reuses_cache(tmp_path):
    import time
    cfg = write_config(tmp_path, band_set="CL")
    out = tmp_path / "out"
    t0 = time.time()
    main(["sweep", "--config", cfg, "--out-dir", str(out)])
    cold = time.time() - t0
    t0 = time.time()
    main(["sweep", "--config", cfg, "--out-dir", str(out)])
    warm = time.time() - t0
    assert warm < cold


def test_no_format_correction_flag_changes_output(tmp_path):
    cfg = write_config(tmp_path, band_set="CL", p_mm=0.0)
    a = tmp_path / "a"
    b = tmp_path / "b"
    main(["run", "--config", cfg, "--out-dir", str(a)])
    main(["run", "--config", cfg, "--out-dir", str(b),
          "--no-format-correction"])
    qa = read_tsv(a / "CL_ns1_np0_pmm0_quality.tsv")
    qb = read_tsv(b / "CL_ns1_np0_pmm0_quality.tsv")
    assert float(qb[0]["snr_nli_db"]) < float(qa[0]["snr_nli_db"])


def test_fast_raman_flag_runs(tmp_path):
    cfg = write_config(tmp_path, band_set="CL")
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out),
                 "--fast-raman"]) == 0
