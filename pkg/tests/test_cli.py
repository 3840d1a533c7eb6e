import csv
import subprocess

from rtpteleop.cli import dispatch


def test_unknown_flag_is_usage_error(capsys):
    assert dispatch(["race", "--scenario", "A", "--frobnicate"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error(capsys):
    assert dispatch([]) == 1
    assert "usage:" in capsys.readouterr().err


def test_help_exits_clean(capsys):
    assert dispatch(["--help"]) == 0
    out = capsys.readouterr().out
    for mode in ("serve", "drive", "race", "report", "replicate"):
        assert mode in out


def test_race_preset_writes_csv(tmp_path):
    out = tmp_path / "a.csv"
    assert dispatch(["race", "--scenario", "A", "--seed", "1",
                     "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows
    assert {r["flow"] for r in rows} == {"rtp", "udp", "tcp"}


def test_race_scenario_file_and_duration(tmp_path):
    scen = tmp_path / "mini.scenario"
    scen.write_text("duration = 20\nflow udp_cbr rate=0.5e6\n",
                    encoding="utf-8")
    out = tmp_path / "mini.csv"
    assert dispatch(["race", "--scenario", str(scen),
                     "--duration", "5", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert max(float(r["t"]) for r in rows) <= 5.0 + 1e-9


def test_race_missing_scenario_file(tmp_path):
    assert dispatch(["race", "--scenario", str(tmp_path / "nope.scenario"),
                     "--out", str(tmp_path / "x.csv")]) == 2


def test_report_renders_charts(tmp_path):
    src = tmp_path / "a.csv"
    dispatch(["race", "--scenario", "B", "--duration", "5",
              "--out", str(src)])
    out_dir = tmp_path / "charts"
    assert dispatch(["report", "--in", str(src), "--out", str(out_dir)]) == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["delay.svg", "jitter.svg", "throughput.svg"]
    assert (out_dir / "jitter.svg").read_text().count("svg") >= 2


def test_report_missing_input(tmp_path, capsys):
    assert dispatch(["report", "--in", str(tmp_path / "gone.csv"),
                     "--out", str(tmp_path / "out")]) == 2
    assert "error:" in capsys.readouterr().err


def test_seed_env_overrides_flag(tmp_path, monkeypatch):
    flag2 = tmp_path / "flag2.csv"
    env2 = tmp_path / "env2.csv"
    dispatch(["race", "--scenario", "A", "--seed", "2", "--out", str(flag2)])
    monkeypatch.setenv("TELEOP_SEED", "2")
    dispatch(["race", "--scenario", "A", "--seed", "1", "--out", str(env2)])
    assert env2.read_bytes() == flag2.read_bytes()


def test_seed_env_must_be_integer(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TELEOP_SEED", "soon")
    assert dispatch(["race", "--scenario", "A",
                     "--out", str(tmp_path / "x.csv")]) == 2
    assert "TELEOP_SEED" in capsys.readouterr().err


def test_replicate_writes_verdict(tmp_path, capsys):
    out = tmp_path / "rep"
    assert dispatch(["replicate", "--seed", "1", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["race_a.csv", "race_b.csv", "replication.csv",
                     "verdict.txt"]
    printed = capsys.readouterr().out
    assert "goal_reached = yes" in printed
    assert "mean_delay_ms" in printed
    assert "mean_jitter_ms" in printed


def test_drive_unreachable_server_fails(capsys):
    rc = dispatch(["drive", "--command-port", "9", "--duration", "1.0"])
    assert rc == 2
    assert "goal_reached = no" in capsys.readouterr().out


def test_console_script_installed():
    result = subprocess.run(["rtpteleop", "--help"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert "replicate" in result.stdout
