"""CLI behavior: CSV format and stability, exit codes, command semantics."""

import subprocess
import sys

import pytest

from twoway_impair import analytic
from twoway_impair.cli import main, parse_config, parse_coupling

FIG2_CFG = """\
# symmetric noise, 2:1 average channel gains
p1 = 1000
p2 = 1000
p3 = 500
n1 = 1
n2 = 1
n3 = 1
omega1 = 2
omega2 = 1
kappa3t = 0.1
kappa3r = 0.1
"""


def run_cli(argv):
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code)


def write_cfg(tmp_path, text, name="link.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def cfg_with(tmp_path, **overrides):
    lines = []
    for raw in FIG2_CFG.splitlines():
        if "=" in raw:
            key = raw.split("=")[0].strip()
            if key in overrides:
                lines.append(f"{key} = {overrides.pop(key)}")
                continue
        lines.append(raw)
    for key, value in overrides.items():
        lines.append(f"{key} = {value}")
    return write_cfg(tmp_path, "\n".join(lines) + "\n")


def read_rows(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# twoway-impair v1"
    data_start = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    header = lines[data_start].split(",")
    rows = [line.split(",") for line in lines[data_start + 1:]]
    return header, rows


def test_parse_config_round_trip(tmp_path):
    cfg = parse_config(write_cfg(tmp_path, FIG2_CFG))
    assert cfg.p1 == 1000.0 and cfg.omega1 == 2.0
    assert cfg.kappa_t == 0.1 and cfg.kappa_r == 0.1 and cfg.is_matched


def test_parse_config_unknown_key_has_line_number(tmp_path):
    path = write_cfg(tmp_path, FIG2_CFG + "bogus = 1\n")
    with pytest.raises(Exception) as info:
        parse_config(path)
    assert ":12:" in str(info.value) and "bogus" in str(info.value)


def test_parse_config_bad_number_has_line_number(tmp_path):
    path = write_cfg(tmp_path, FIG2_CFG.replace("p3 = 500", "p3 = five-hundred"))
    with pytest.raises(Exception) as info:
        parse_config(path)
    assert ":4:" in str(info.value)


def test_parse_coupling():
    assert parse_coupling("p2=p1, p3=p1/2") == (1.0, 0.5)
    assert parse_coupling("p2=p1*2,p3=p1*0.25") == (2.0, 0.25)
    with pytest.raises(ValueError):
        parse_coupling("p2=p1")
    with pytest.raises(ValueError):
        parse_coupling("p2=p1, p3=p2/2")
    with pytest.raises(ValueError):
        parse_coupling("p2=p1*0, p3=p1")


def test_op_curve_always_outage(tmp_path):
    cfg = cfg_with(tmp_path, kappa3t=0.2, kappa3r=0.2)
    out = tmp_path / "op.csv"
    assert run_cli(["op-curve", "--config", cfg, "--x", "31", "--p1-dbw", "0", "50",
                    "--points", "11", "--out", str(out)]) == 0
    header, rows = read_rows(out)
    assert header == ["p1_dbw", "analytic", "asymptote"]
    assert all(row[1] == "1" for row in rows)
    assert all(row[2] == "1" for row in rows)


def test_op_curve_ideal_hardware_decreases(tmp_path):
    cfg = cfg_with(tmp_path, kappa3t=0, kappa3r=0)
    out = tmp_path / "op.csv"
    assert run_cli(["op-curve", "--config", cfg, "--x", "31", "--p1-dbw", "20", "80",
                    "--points", "7", "--out", str(out)]) == 0
    _, rows = read_rows(out)
    analytic_col = [float(row[1]) for row in rows]
    assert all(a > b for a, b in zip(analytic_col, analytic_col[1:]))
    assert all(float(row[2]) == 0.0 for row in rows)


def test_op_curve_reaches_floor(tmp_path):
    cfg = cfg_with(tmp_path)
    out = tmp_path / "op.csv"
    assert run_cli(["op-curve", "--config", cfg, "--x", "31", "--p1-dbw", "0", "80",
                    "--points", "9", "--out", str(out)]) == 0
    _, rows = read_rows(out)
    floor = float(rows[-1][2])
    assert abs(floor - 0.76779003142135420) < 1e-15
    assert abs(float(rows[-1][1]) - floor) <= 1e-3


def test_op_curve_rejects_mismatched_config(tmp_path):
    cfg = cfg_with(tmp_path, kappa3r_assumed=0.0)
    assert run_cli(["op-curve", "--config", cfg, "--x", "31", "--p1-dbw", "0", "40",
                    "--points", "3", "--out", str(tmp_path / "x.csv")]) == 2


def test_ser_curve_equal_split_floor(tmp_path):
    cfg = cfg_with(tmp_path, omega1=1, omega2=1)
    out = tmp_path / "ser.csv"
    assert run_cli(["ser-curve", "--config", cfg, "--modulation", "bpsk",
                    "--p1-dbw", "0", "40", "--points", "5", "--out", str(out)]) == 0
    header, rows = read_rows(out)
    assert header == ["p1_dbw", "analytic", "asymptote"]
    assert all(abs(float(row[2]) - 0.005025) < 1e-12 for row in rows)


def test_ser_curve_uneven_split_doubles_floor(tmp_path):
    cfg = cfg_with(tmp_path, omega1=1, omega2=1, kappa3t=0, kappa3r=0.2)
    out = tmp_path / "ser.csv"
    assert run_cli(["ser-curve", "--config", cfg, "--p1-dbw", "0", "40",
                    "--points", "3", "--out", str(out)]) == 0
    _, rows = read_rows(out)
    floor = float(rows[0][2])
    assert abs(floor - 0.01) <= 1e-4
    assert 1.97 <= floor / 0.005025 <= 2.01


def test_ser_curve_ideal_omits_asymptote(tmp_path):
    cfg = cfg_with(tmp_path, omega1=1, omega2=1, kappa3t=0, kappa3r=0)
    out = tmp_path / "ser.csv"
    assert run_cli(["ser-curve", "--config", cfg, "--p1-dbw", "0", "40",
                    "--points", "5", "--out", str(out)]) == 0
    header, rows = read_rows(out)
    assert header == ["p1_dbw", "analytic"]
    values = [float(row[1]) for row in rows]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_ser_curve_asymmetric_gains_labels_extension(tmp_path):
    cfg = cfg_with(tmp_path)  # omega 2:1
    out = tmp_path / "ser.csv"
    assert run_cli(["ser-curve", "--config", cfg, "--p1-dbw", "0", "30",
                    "--points", "3", "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# twoway-impair v1"
    assert "extension" in lines[1] and lines[1].startswith("#")


def test_ser_curve_rejects_unknown_modulation(tmp_path):
    cfg = cfg_with(tmp_path)
    assert run_cli(["ser-curve", "--config", cfg, "--modulation", "qam64",
                    "--p1-dbw", "0", "30", "--points", "3",
                    "--out", str(tmp_path / "x.csv")]) == 2


def test_ser_curve_signal_route_requires_bpsk(tmp_path):
    cfg = cfg_with(tmp_path)
    assert run_cli(["ser-curve", "--config", cfg, "--alpha", "2", "--beta", "0.5",
                    "--mc", "--mc-route", "signal", "--samples", "1000",
                    "--p1-dbw", "0", "30", "--points", "3",
                    "--out", str(tmp_path / "x.csv")]) == 2


def test_ser_curve_with_mc_columns(tmp_path):
    cfg = cfg_with(tmp_path, omega1=1, omega2=1)
    out = tmp_path / "ser.csv"
    assert run_cli(["ser-curve", "--config", cfg, "--mc", "--mc-route", "signal",
                    "--samples", "20000", "--seed", "5",
                    "--p1-dbw", "0", "20", "--points", "3", "--out", str(out)]) == 0
    header, rows = read_rows(out)
    assert header == ["p1_dbw", "analytic", "asymptote", "mc_mean", "mc_ci_low", "mc_ci_high"]
    for row in rows:
        assert 0.0 <= float(row[4]) <= float(row[3]) <= float(row[5]) <= 1.0


def test_invert_op_report(capsys):
    assert run_cli(["invert", "op", "--target", "0.201", "--x", "10"]) == 0
    line = capsys.readouterr().out.strip()
    fields = dict(part.rsplit(" = ", 1) for part in line.split("  "))
    assert abs(float(fields["c_max"]) - 0.0201) < 1e-15
    assert abs(float(fields["kappa3t = kappa3r"]) - 0.1) < 1e-12
    assert abs(float(fields["forward_check"]) - 0.201) < 1e-12


def test_invert_ser_report(capsys):
    assert run_cli(["invert", "ser", "--target", "0.005025"]) == 0
    line = capsys.readouterr().out.strip()
    fields = dict(part.rsplit(" = ", 1) for part in line.split("  "))
    assert abs(float(fields["c_max"]) / 0.0201 - 1.0) < 1e-4
    assert abs(float(fields["forward_check"]) / 0.005025 - 1.0) < 1e-6


def test_invert_infeasible_targets():
    assert run_cli(["invert", "op", "--target", "1.0", "--x", "10"]) == 2
    assert run_cli(["invert", "op", "--target", "0.5"]) == 2  # missing --x
    assert run_cli(["invert", "ser", "--target", "0.6"]) == 2


def test_validate_passes(tmp_path, capsys):
    cfg = cfg_with(tmp_path)
    assert run_cli(["validate", "--config", cfg, "--x", "31", "--p1-dbw", "10", "40",
                    "--points", "4", "--samples", "1000000", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 4
    assert "4/4 points passed" in out


def test_validate_low_sample_runs_are_permissive(tmp_path, capsys):
    # tiny sample counts widen the Wilson band; the gate should still pass
    cfg = cfg_with(tmp_path)
    assert run_cli(["validate", "--config", cfg, "--x", "31", "--p1-dbw", "10", "40",
                    "--points", "4", "--samples", "100", "--seed", "3"]) == 0
    assert "4/4 points passed" in capsys.readouterr().out


def test_csv_bytes_stable_across_runs_and_threads(tmp_path, monkeypatch):
    cfg = cfg_with(tmp_path)
    blobs = []
    for run, lanes in ((0, "1"), (1, "1"), (2, "4")):
        monkeypatch.setenv("TWOWAY_IMPAIR_THREADS", lanes)
        out = tmp_path / f"run{run}.csv"
        assert run_cli(["op-curve", "--config", cfg, "--x", "31", "--mc",
                        "--samples", "50000", "--seed", "11",
                        "--p1-dbw", "0", "40", "--points", "5", "--out", str(out)]) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]


def test_db_conversion_only_at_boundary(tmp_path):
    # CSV analytic values must equal direct library evaluation at 10^(dBW/10)
    cfg_path = cfg_with(tmp_path)
    out = tmp_path / "op.csv"
    assert run_cli(["op-curve", "--config", cfg_path, "--x", "31",
                    "--p1-dbw", "10", "30", "--points", "3", "--out", str(out)]) == 0
    _, rows = read_rows(out)
    base = parse_config(cfg_path)
    from twoway_impair.model import Direction, SystemConfig
    for row in rows:
        p1 = 10.0 ** (float(row[0]) / 10.0)
        config = SystemConfig(p1=p1, p2=p1, p3=p1 / 2, n1=base.n1, n2=base.n2, n3=base.n3,
                              omega1=base.omega1, omega2=base.omega2,
                              relay_impairments=base.relay_impairments)
        want = analytic.outage_probability(
            config, analytic.OutageQuery(31.0, Direction(1)))
        assert row[1] == format(want, ".17g")


def test_custom_coupling_honored(tmp_path):
    cfg_path = cfg_with(tmp_path)
    out = tmp_path / "op.csv"
    assert run_cli(["op-curve", "--config", cfg_path, "--x", "31",
                    "--coupling", "p2=p1*2, p3=p1/4",
                    "--p1-dbw", "20", "30", "--points", "2", "--out", str(out)]) == 0
    _, rows = read_rows(out)
    base = parse_config(cfg_path)
    from twoway_impair.model import Direction, SystemConfig
    p1 = 10.0 ** (float(rows[0][0]) / 10.0)
    config = SystemConfig(p1=p1, p2=2 * p1, p3=p1 / 4, n1=base.n1, n2=base.n2, n3=base.n3,
                          omega1=base.omega1, omega2=base.omega2,
                          relay_impairments=base.relay_impairments)
    want = analytic.outage_probability(config, analytic.OutageQuery(31.0, Direction(1)))
    assert rows[0][1] == format(want, ".17g")


def test_bad_coupling_exits_2(tmp_path):
    cfg = cfg_with(tmp_path)
    assert run_cli(["op-curve", "--config", cfg, "--x", "31", "--coupling", "p2=p3",
                    "--p1-dbw", "0", "40", "--points", "3",
                    "--out", str(tmp_path / "x.csv")]) == 2


def test_missing_config_exits_2(tmp_path):
    assert run_cli(["op-curve", "--config", str(tmp_path / "nope.cfg"), "--x", "31",
                    "--p1-dbw", "0", "40", "--points", "3",
                    "--out", str(tmp_path / "x.csv")]) == 2


def test_console_entry_point(tmp_path):
    # end-to-end through `python -m`, the same path the installed script takes
    cfg = cfg_with(tmp_path)
    out = tmp_path / "op.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "twoway_impair.cli", "op-curve", "--config", cfg,
         "--x", "31", "--p1-dbw", "0", "40", "--points", "3", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text(encoding="utf-8").startswith("# twoway-impair v1\n")
