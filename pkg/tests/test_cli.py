import subprocess
import sys

import pytest

from streamdse.cli import (EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, Platform,
                           main, platform_presets)


def run_cli(args, **kw):
    return main(list(args))


def test_zc706_preset_resources():
    zc706 = platform_presets()["zc706"]
    assert zc706.usable_dsp == 855
    assert zc706.usable_sram_bytes == 545 * 36 * 1024 * 3 // 4 // 8 == 1883520
    assert abs(zc706.usable_sram_bytes / 2 ** 20 - 1.80) < 0.01
    assert zc706.clock_hz == 200e6


def test_custom_platform_full_caps():
    p = Platform("x", bram_count=100, dsp_count=100, sram_cap_fraction=1.0,
                 dsp_cap_fraction=1.0, clock_mhz=100.0)
    assert p.usable_dsp == 100
    assert p.usable_sram_bytes == 100 * 36 * 1024 // 8


def test_platform_validation():
    with pytest.raises(ValueError):
        Platform("x", 1, 1, sram_cap_fraction=0.0, dsp_cap_fraction=0.5,
                 clock_mhz=100)
    with pytest.raises(ValueError):
        Platform("x", 1, 1, sram_cap_fraction=0.5, dsp_cap_fraction=0.5,
                 clock_mhz=0)


def test_analyze_writes_csv(tmp_path):
    assert run_cli(["analyze", "--network", "mobilenet_v1",
                    "--outdir", str(tmp_path)]) == EXIT_OK
    csv = (tmp_path / "mobilenet_v1_analysis.csv").read_text()
    lines = csv.strip().splitlines()
    assert lines[0] == "id,name,kind,macs,fm_access,weights"
    assert lines[1].startswith("0,conv1,STC,")
    assert lines[-1].startswith("total,")


def test_analyze_empty_file_is_config_error(tmp_path, capsys):
    empty = tmp_path / "empty.net"
    empty.write_text("")
    assert run_cli(["analyze", "--network", str(empty)]) == EXIT_CONFIG
    assert "no network record" in capsys.readouterr().err


def test_missing_file_is_io_error(tmp_path):
    from streamdse.cli import EXIT_IO
    assert run_cli(["analyze", "--network",
                    str(tmp_path / "nope.net")]) == EXIT_IO


def test_unknown_network_name_is_config_error(tmp_path):
    # a bare name that is not a builtin resolves as a path and fails I/O;
    # an invalid boundary value is a config error
    assert run_cli(["tune", "--network", "mobilenet_v2",
                    "--boundary", "999"]) == EXIT_CONFIG


def test_infeasible_budget_exit_code(tmp_path):
    assert run_cli(["tune", "--network", "mobilenet_v2",
                    "--dsp-budget", "3", "--outdir", str(tmp_path)]) == \
        EXIT_INFEASIBLE


def test_tune_summary_contents(tmp_path):
    assert run_cli(["tune", "--network", "shufflenet_v2",
                    "--outdir", str(tmp_path)]) == EXIT_OK
    summary = (tmp_path / "shufflenet_v2_tune_summary.csv").read_text()
    header, row = summary.strip().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert abs(float(fields["fps"]) - 2092.4) / 2092.4 < 0.12
    assert int(fields["dsp_used"]) <= 855
    assert float(fields["mac_efficiency"]) >= 0.90


def test_allocate_sweep_curve(tmp_path):
    assert run_cli(["allocate", "--network", "shufflenet_v2", "--sweep",
                    "--outdir", str(tmp_path)]) == EXIT_OK
    curve = (tmp_path / "shufflenet_v2_memory_sweep.csv").read_text()
    lines = curve.strip().splitlines()
    assert lines[0] == "boundary_layer,sram_bytes,dram_bytes_per_frame"
    assert len(lines) == 77  # 75 layers -> 76 boundaries + header
    alloc = (tmp_path / "shufflenet_v2_allocation.csv").read_text()
    assert "min_sram" in alloc and "budget_extended" in alloc


def test_simulate_with_trace(tmp_path):
    assert run_cli(["simulate", "--f", "7", "--k", "3", "--pad", "1",
                    "--scheme", "direct", "--trace",
                    "--outdir", str(tmp_path)]) == EXIT_OK
    body = (tmp_path / "simulate_f7k3s1p1_direct.csv").read_text()
    assert ",72," in body  # cycles_per_frame for the 7x7 case
    trace = (tmp_path / "simulate_f7k3s1p1_direct_trace.csv").read_text()
    assert trace.splitlines()[0] == "cycle,event,buffer_occupancy,pe_active"


def test_simulate_invalid_config_is_config_error():
    assert run_cli(["simulate", "--f", "2", "--k", "3"]) == EXIT_CONFIG


def test_report_reference_tables(tmp_path):
    assert run_cli(["report", "--reference-tables",
                    "--outdir", str(tmp_path)]) == EXIT_OK
    for name in ("mobilenet_v2_memory_sweep.csv",
                 "shufflenet_v2_memory_sweep.csv",
                 "performance_summary.csv"):
        assert (tmp_path / name).exists()
    summary = (tmp_path / "performance_summary.csv").read_text()
    assert summary.count("min_sram") == 2
    assert summary.count("budget_extended") == 2


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli(["tune", "--network", "mobilenet_v2",
                        "--outdir", str(out)]) == EXIT_OK
    for name in ("mobilenet_v2_tune_summary.csv",
                 "mobilenet_v2_tune_per_layer.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_no_decompose_uses_one_dsp_per_lane(tmp_path):
    assert run_cli(["tune", "--network", "mobilenet_v1", "--no-decompose",
                    "--dsp-budget", "200", "--outdir", str(tmp_path)]) == EXIT_OK
    summary = (tmp_path / "mobilenet_v1_tune_summary.csv").read_text()
    header, row = summary.strip().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert int(fields["dsp_used"]) == int(fields["mac_units"])


def test_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("STREAMDSE_OUTDIR", str(tmp_path / "env"))
    assert run_cli(["analyze", "--network", "shufflenet_v1"]) == EXIT_OK
    assert (tmp_path / "env" / "shufflenet_v1_analysis.csv").exists()


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "streamdse.cli", "analyze",
         "--network", "mobilenet_v2"],
        capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert "conv1,STC" in proc.stdout
