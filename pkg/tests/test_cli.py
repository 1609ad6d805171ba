import csv
import json

import pytest
import yaml

from ri_evolve.cli import main, sweep_workers
from ri_evolve.config import ConfigError, RunConfig


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_ode_mm_writes_trajectory_and_report(tmp_path):
    out, rep = tmp_path / "traj.csv", tmp_path / "report.json"
    code = main(["ode", "--scheme", "mm", "--energy", "cubic_paper", "--loading", "paper_f",
                 "--out", str(out), "--report", str(rep)])
    data = rows(out)
    assert len(data) == 16001  # initial sample plus 16000 steps
    records = json.load(open(rep))
    assert {"check", "pass", "worst", "where", "tol"} <= set(records[0])
    by_name = {r["check"]: r for r in records}
    assert by_name["mm_optimality"]["pass"]
    # the literal global-minimizer scheme leaves e_m on the first ramp
    assert code == (0 if all(r["pass"] for r in records) else 1)


def test_ode_mm_extremal_checks_pass(tmp_path):
    code = main(["ode", "--energy", "cubic_paper", "--selection", "extremal", "--steps", "1600", "--check"])
    assert code == 0


def test_missing_energy_is_config_error(capsys):
    assert main(["ode", "--scheme", "mm"]) == 2
    assert "energy" in capsys.readouterr().err


def test_guard_violation_exit_code(capsys):
    code = main(["ode", "--scheme", "vv", "--energy", "cubic_paper", "--loading", "ramp:1",
                 "--eps", "1e-3", "--h", "0.1"])
    assert code == 3
    assert "guard" in capsys.readouterr().err


def test_reproducible_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["ode", "--energy", "cubic_paper", "--steps", "800"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_dump_config_round_trip(tmp_path):
    dump = tmp_path / "cfg.yaml"
    main(["ode", "--energy", "linear", "--loading", "ramp:3", "--steps", "30", "--eps", "0.05",
          "--dump-config", str(dump)])
    cfg = RunConfig.load(dump)
    assert cfg.energy == "linear" and cfg.mm_steps == 30 and cfg.vv_eps == 0.05
    assert yaml.safe_load(cfg.dump()) == yaml.safe_load(dump.read_text())
    # the dumped file reproduces the run through --config
    assert main(["--config", str(dump), "ode"]) == 0


def test_config_flags_override_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("energy: cubic_paper\nmm.steps: 50\n")
    cfg = RunConfig.load(p).merged({"mm.steps": 70})
    assert cfg.mm_steps == 70 and cfg.energy == "cubic_paper"
    with pytest.raises(ConfigError):
        RunConfig.from_flat({"mm.bogus": 1})


def test_hysteresis_figure1_outputs(tmp_path):
    code = main(["hysteresis", "--figure1", "--steps", "1600", "--eps", "0.02", "--out", str(tmp_path)])
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    for panel in ("e_graph", "f_graph", "vis_loop", "mm_loop"):
        assert f"{panel}.csv" in names and f"{panel}.svg" in names
    summary = json.load(open(tmp_path / "jumps.json"))
    assert {s["scheme"] for s in summary} == {"vv", "mm", "mm_global"}


def test_verify_subcommand(tmp_path):
    traj = tmp_path / "t.csv"
    main(["ode", "--energy", "cubic_paper", "--selection", "extremal", "--steps", "1600", "--out", str(traj)])
    rep = tmp_path / "r.json"
    assert main(["verify", "--run", str(traj), "--suite", "mm_lemmas", "--report", str(rep)]) == 0
    assert all(r["pass"] for r in json.load(open(rep)))
    assert main(["verify", "--suite", "mm_lemmas"]) == 2


def test_sweep_empty_values():
    assert main(["sweep", "--energy", "cubic_paper", "--axis", "N"]) == 2


def test_sweep_N_converges(tmp_path, monkeypatch):
    monkeypatch.setenv("RI_EVOLVE_THREADS", "1")
    out = tmp_path / "s.csv"
    code = main(["sweep", "--energy", "cubic_paper", "--loading", "ramp:4", "--axis", "N",
                 "--values", "100,1000,10000", "--selection", "extremal", "--out", str(out)])
    assert code == 0
    errs = [abs(float(r["jump_f"].split(";")[0]) - 1.9618) for r in rows(out)]
    assert errs[-1] <= errs[0] and errs[-1] < 0.01


def test_sweep_eps_monotone(tmp_path, monkeypatch):
    monkeypatch.setenv("RI_EVOLVE_THREADS", "1")
    out = tmp_path / "s.csv"
    code = main(["sweep", "--energy", "cubic_paper", "--loading", "ramp:4", "--axis", "eps",
                 "--values", "0.1,0.05", "--scheme", "vv", "--out", str(out)])
    data = rows(out)
    assert all(r["monotone_in_eps"] == "True" for r in data)
    assert code == 0


def test_sweep_workers_env(monkeypatch):
    monkeypatch.setenv("RI_EVOLVE_THREADS", "2")
    assert sweep_workers(5) == 2
    assert sweep_workers(1) == 1


def test_pde_radial_and_sticktion(tmp_path):
    assert main(["pde", "--scenario", "mcf_radial", "--n", "2", "--r0", "0.5", "--T", "0.005",
                 "--out", str(tmp_path / "rad")]) == 0
    assert (tmp_path / "rad" / "radius.csv").exists()
    assert main(["pde", "--scenario", "sticktion_heat", "--nx", "21", "--T", "0.05",
                 "--forcing", "const:3", "--snapshots", "2", "--out", str(tmp_path / "st")]) == 0
    assert len(list((tmp_path / "st").glob("snapshot_*.csv"))) == 3
    assert main(["pde", "--scenario", "sticktion_heat", "--forcing", "wobble:1"]) == 2
