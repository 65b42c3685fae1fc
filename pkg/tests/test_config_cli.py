import json

import numpy as np
import pytest

from ks1d.cli import main
from ks1d.config import ScenarioConfig, load_config, parse_config
from ks1d.errors import ConfigError
from ks1d.scenarios import CSV_COLUMNS, build_initial_state, build_model
from ks1d.model import GridSpec, PowerLawDiffusion


def test_defaults_validate():
    cfg = ScenarioConfig()
    cfg.validate()
    assert cfg.scenario == "custom"
    assert cfg.n_cells == 256


def test_parse_config_preset_and_overrides():
    cfg = parse_config("""
        # comments and blanks are ignored
        scenario = subcritical
        n_cells = 128          # inline comment
        t_end = 1.5
    """)
    assert cfg.scenario == "subcritical"
    assert cfg.n_cells == 128 and isinstance(cfg.n_cells, int)
    assert cfg.t_end == 1.5
    assert cfg.alpha == 0.5        # preset fills what was not overridden


def test_parse_config_unknown_key_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = custom\nalpa = 2\n")
    assert "alpa" in str(err.value)
    assert "line 2" in str(err.value)


def test_parse_config_range_error_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = custom\nalpha = -1\n")
    assert "alpha" in str(err.value)
    assert "line 2" in str(err.value)


def test_parse_config_shape_errors():
    with pytest.raises(ConfigError):
        parse_config("just a line without equals\n")
    with pytest.raises(ConfigError):
        parse_config("n_cells = lots\n")


def test_build_model_and_initial_presets(tmp_path):
    cfg = ScenarioConfig(alpha=1.5)
    model = build_model(cfg)
    assert isinstance(model, PowerLawDiffusion)

    g = GridSpec(64)
    cfg = ScenarioConfig(initial="constant", mass=2.0)
    st = build_initial_state(cfg, g)
    assert np.allclose(st.u, 2.0)

    cfg = ScenarioConfig(initial="perturbed", mass=2.0, perturb_amp=0.25,
                         perturb_mode=2)
    st = build_initial_state(cfg, g)
    assert g.h * np.sum(st.u) == pytest.approx(2.0, rel=1e-13)
    assert np.min(st.u) > 0.0
    assert np.max(st.u) > 2.0

    table = tmp_path / "initial.csv"
    rows = np.column_stack([np.full(64, 3.0), np.zeros(64)])
    np.savetxt(table, rows, delimiter=",", header="u,v")
    cfg = ScenarioConfig(initial="file", initial_file=str(table), mass=3.0)
    st = build_initial_state(cfg, g)
    assert np.allclose(st.u, 3.0)


def _write(tmp_path, text):
    p = tmp_path / "case.cfg"
    p.write_text(text)
    return p


def test_cli_run_writes_artifacts(tmp_path):
    cfg = _write(tmp_path, """
        scenario = custom
        n_cells = 48
        mass = 2
        alpha = 1
        t_end = 0.02
        sample_cadence = 0.005
        dt_max = 1e-3
    """)
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["outcome"] == "completed"
    assert summary["dissipation_violations"]["slope"] == []
    header = (out / "trajectory.csv").read_text().splitlines()
    assert header[0].startswith("#")
    assert header[1].split(",") == list(CSV_COLUMNS)
    assert len(header) > 4


def test_cli_run_csv_deterministic(tmp_path):
    cfg = _write(tmp_path, """
        scenario = custom
        n_cells = 32
        mass = 1.5
        alpha = 0.5
        t_end = 0.01
        sample_cadence = 0.002
    """)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        outs.append(lines[1:])        # drop the timestamped comment
    assert outs[0] == outs[1]


def test_cli_certify_fixed_mass(tmp_path):
    out = tmp_path / "cert"
    code = main(["certify", "--alpha", "2", "--q", "5", "--mass", "50",
                 "--out", str(out)])
    assert code == 0
    rep = json.loads((out / "certificate.json").read_text())
    assert rep["certified"] is True
    assert rep["eps_choice"] == pytest.approx(50.0 ** -4.0)


def test_cli_certify_search(tmp_path):
    out = tmp_path / "scan"
    code = main(["certify", "--alpha", "2", "--q", "5", "--search", "2:8",
                 "--n", "256", "--out", str(out)])
    assert code == 0
    rep = json.loads((out / "threshold.json").read_text())
    assert rep["found"] is True
    assert 3.0 < rep["m0"] < 5.0
    assert rep["monotone_ok"] is True


def test_cli_inequalities_subset(tmp_path):
    out = tmp_path / "ineq"
    code = main(["inequalities", "--suite", "sobolev,counterexample",
                 "--samples", "25", "--n", "128", "--out", str(out)])
    assert code == 0
    rep = json.loads((out / "inequalities.json").read_text())
    assert set(rep["suites"]) == {"sobolev", "counterexample"}
    assert rep["suites"]["sobolev"]["violations"] == 0
    # the concentrating family is supposed to break the candidate bound;
    # a finding is not an invariant violation
    assert rep["suites"]["counterexample"]["violated"] is True


def test_cli_inequalities_unknown_suite(tmp_path):
    code = main(["inequalities", "--suite", "nope",
                 "--out", str(tmp_path / "x")])
    assert code == 1


def test_cli_missing_config_is_an_error(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.cfg")]) == 1


def test_cli_sweep_isolates_failures(tmp_path):
    cfg = _write(tmp_path, """
        scenario = custom
        n_cells = 32
        mass = 2
        alpha = 1
        t_end = 0.005
        sample_cadence = 0.001
    """)
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", str(cfg), "--axis", "chi=0.5,-1.0",
                 "--out", str(out)])
    assert code == 0      # the valid run succeeded; the bad value is recorded
    index = json.loads((out / "index.json").read_text())
    assert index["axis"] == "chi"
    runs = index["runs"]
    assert runs["chi=0.5"]["status"] == "ok"
    assert runs["chi=-1"]["status"] == "error"
    sub = json.loads((out / "chi=0.5" / "summary.json").read_text())
    assert sub["outcome"] == "completed"


def test_cli_sweep_parallel_matches_serial(tmp_path):
    cfg = _write(tmp_path, """
        scenario = custom
        n_cells = 32
        mass = 2
        alpha = 1
        t_end = 0.005
        sample_cadence = 0.001
    """)
    results = {}
    for jobs, name in ((1, "serial"), (2, "parallel")):
        out = tmp_path / name
        assert main(["sweep", "--config", str(cfg), "--axis",
                     "chi=0.25,0.75", "--jobs", str(jobs),
                     "--out", str(out)]) == 0
        rows = {}
        for label in ("chi=0.25", "chi=0.75"):
            lines = (out / label / "trajectory.csv").read_text().splitlines()
            rows[label] = lines[1:]
        results[name] = rows
    assert results["serial"] == results["parallel"]
