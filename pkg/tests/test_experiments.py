import json
import math
from pathlib import Path

import numpy as np
import pytest

from tfgamma.cli import EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, build_parser, main
from tfgamma.errors import ValidationError
from tfgamma.experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    box_well_energy,
    config_from_dict,
    emit,
    parse_config_text,
    quantum_energy,
    run_gamma_experiment,
    run_gse_experiment,
)
from tfgamma.tf import kcl

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_parse_config_with_comments():
    cfg = parse_config_text(
        '# header\nexperiment = "gamma"  # trailing\n\nNList = [10, 20]\n'
        'density = {"kind": "gaussian", "sigma": 1.0}\ngrid = {"lower": [-4], "upper": [4], "n": 64}\n'
    )
    assert cfg.NList == [10, 20]
    assert cfg.tolerances["tf"] == 1e-9
    assert cfg.ladder == {"M0": 10.0, "growth": 1.25}


@pytest.mark.parametrize(
    "text",
    [
        'experiment = "gamma"\nNList = []\n',
        'experiment = "gamma"\n',
        'experiment = "gamma"\nNList = [20, 10]\n',
        'experiment = "gamma"\nNList = [10.5]\n',
        'experiment = "nope"\n',
        'experiment = "weyl"\nbogus = 1\n',
        'experiment = "weyl"\nq = 1\nq = 2\n',
        'experiment = "weyl"\nq 1\n',
        'experiment = "weyl"\nq = {bad json}\n',
        'experiment = "weyl"\ntolerances = {"tf": 0}\n',
        'experiment = "weyl"\nhList = [0.01, 0.1]\n',
        'dimension = 1\n',
    ],
)
def test_config_errors(text):
    with pytest.raises(ValidationError):
        parse_config_text(text)


def test_experiment_name_mismatch():
    with pytest.raises(ValidationError):
        parse_config_text('experiment = "weyl"\n', "gamma")
    assert parse_config_text("q = 2\n", "weyl").q == 2


def test_config_from_dict_round_trip():
    cfg = parse_config_text((CONFIGS / "gamma_gaussian.cfg").read_text())
    again = config_from_dict(cfg.as_dict())
    assert again == cfg
    with pytest.raises(ValidationError):
        config_from_dict({**cfg.as_dict(), "extra": 1})


def gamma_cfg(**kw):
    base = dict(experiment="gamma", dimension=1, density={"kind": "indicator", "lower": 0, "upper": 1},
                grid={"lower": [0], "upper": [1], "n": 1024}, NList=[100, 400, 1600])
    base.update(kw)
    return ExperimentConfig(**base)


def test_gamma_free_indicator():
    rep = run_gamma_experiment(gamma_cfg())
    assert rep.tf_energy["total"] == pytest.approx(kcl(1))
    gaps = [r.gap for r in rep.rows]
    for r in rep.rows:
        # one cube holding N modes: (pi^2/N^3) sum k^2
        N = r.N
        assert r.kinetic == pytest.approx(math.pi**2 * (N + 1) * (2 * N + 1) / (6 * N**2), rel=1e-12)
        assert r.total == r.kinetic + r.external + r.interaction
        assert r.h_scaled == 1.0 and r.lam_scaled == 1.0
    assert all(g > 0 for g in gaps)
    # O(1/N): quadrupling N divides the gap by about four
    assert gaps[0] / gaps[1] == pytest.approx(4, rel=0.02)


def test_gamma_harmonic_semicircle():
    cfg = gamma_cfg(density={"kind": "semicircle", "a2": 2.0}, grid={"lower": [-2], "upper": [2], "n": 4096},
                    external={"type": "harmonic", "strength": 1.0}, NList=[200, 2000])
    rep = run_gamma_experiment(cfg)
    assert rep.tf_energy["total"] == pytest.approx(1.0, abs=1e-4)
    assert rep.rows[-1].total >= 1.0 - 1e-4
    assert abs(rep.rows[-1].gap) < abs(rep.rows[0].gap)
    assert rep.rows[-1].l1_distance < rep.rows[0].l1_distance


def test_gse_harmonic_exact():
    cfg = ExperimentConfig("gse", external={"type": "harmonic", "strength": 1.0},
                           grid={"lower": [-8], "upper": [8], "n": 1024}, NList=[1, 5, 50, 500])
    rep = run_gse_experiment(cfg)
    for r in rep.rows:
        assert r.quantum_per_particle == pytest.approx(1.0, rel=1e-14)
        assert r.method == "harmonic-exact"
        assert abs(r.gap) < 1e-4
    assert "not computed" in rep.footer


def test_gse_box_sum_of_squares():
    cfg = ExperimentConfig("gse", external={"type": "box"}, grid={"lower": [0], "upper": [2], "n": 64},
                           NList=[1, 10, 1000])
    rep = run_gse_experiment(cfg)
    assert rep.rows[0].quantum_per_particle == pytest.approx(math.pi**2 / 4)  # one-body ground level
    assert rep.rows[-1].quantum_per_particle == pytest.approx(kcl(1) / 4, rel=2e-3)
    assert box_well_energy(3, 1, 1.0, 1.0) == pytest.approx(14 * math.pi**2)


def test_gse_finite_difference_fallback():
    cfg = ExperimentConfig("gse", external={"type": "piecewise_constant_radial",
                                            "shells": [{"rMin": 1, "rMax": 50, "value": 4.0}]},
                           grid={"lower": [-3], "upper": [3], "n": 512}, NList=[1], fd_nodes=4000)
    e, method = quantum_energy(cfg, 1)
    assert method == "finite-difference"
    # N = 1, h = 1: ground level of a finite square well of depth 4 and half width 1
    from scipy import optimize

    k = optimize.brentq(lambda k: k * math.tan(k) - math.sqrt(4 - k * k), 1e-6, math.pi / 2 - 1e-9)
    assert e == pytest.approx(k * k, rel=1e-3)


def test_gse_rejects_interaction():
    cfg = ExperimentConfig("gse", external={"type": "harmonic"}, interaction={"type": "constant", "value": 1, "support": 1},
                           grid={"lower": [-8], "upper": [8], "n": 128}, NList=[10])
    with pytest.raises(ValidationError):
        run_gse_experiment(cfg)


def test_parser_subcommands():
    parser = build_parser()
    for name in EXPERIMENTS:
        args = parser.parse_args([name, "--config", "c", "--out", "o"])
        assert args.workers == 1 and args.log_level == "info"
    with pytest.raises(SystemExit):
        parser.parse_args(["gamma", "--config", "c", "--out", "o", "--log-level", "loud"])


def _csvs(path):
    return {p.name: p.read_bytes() for p in sorted(path.glob("*.csv"))}


def test_cli_gamma_deterministic(tmp_path):
    cfg = CONFIGS / "gamma_gaussian.cfg"
    assert main(["gamma", "--config", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["gamma", "--config", str(cfg), "--out", str(tmp_path / "b"), "--workers", "2"]) == EXIT_OK
    a, b = _csvs(tmp_path / "a"), _csvs(tmp_path / "b")
    assert a and a == b
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert {"config", "versions", "backend", "wall_times", "files"} <= set(manifest)
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert len(report["rows"]) == 2
    lines = (tmp_path / "a" / "gamma.csv").read_text().splitlines()
    assert len(lines) == 3


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.cfg")))
def test_shipped_configs_run(name, tmp_path):
    cfg = CONFIGS / name
    experiment = parse_config_text(cfg.read_text()).experiment
    if experiment == "weyl":
        pytest.skip("covered by the acceptance suite")
    assert main([experiment, "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "manifest.json").exists()
    assert (tmp_path / "report.json").exists()


def test_cli_validation_exit(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text('experiment = "gamma"\nNList = []\n')
    assert main(["gamma", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_VALIDATION
    assert main(["gamma", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "o")]) == EXIT_VALIDATION
    assert main(["fdll-verify", "--config", str(CONFIGS / "fdll.cfg"), "--out", str(tmp_path), "--workers", "0"]) == EXIT_VALIDATION


def test_cli_numeric_exit(tmp_path):
    cfg = tmp_path / "slow.cfg"
    cfg.write_text(
        'experiment = "tf-minimize"\n'
        'external = {"type": "harmonic", "strength": 1.0}\n'
        'interaction = {"type": "constant", "value": 1.0, "support": 1.0}\n'
        'grid = {"lower": [-8], "upper": [8], "n": 128}\n'
        "damping = 0.001\n"
    )
    assert main(["tf-minimize", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_NUMERIC


def test_partial_report_flushed(tmp_path, monkeypatch):
    from tfgamma import experiments
    from tfgamma.errors import ConvergenceError

    real_job = experiments._gamma_job

    def flaky(doc, N, k):
        if N > 200:
            raise ConvergenceError("forced failure")
        return real_job(doc, N, k)

    monkeypatch.setattr(experiments, "_gamma_job", flaky)
    code = main(["gamma", "--config", str(CONFIGS / "gamma_gaussian.cfg"), "--out", str(tmp_path)])
    assert code == EXIT_NUMERIC
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["complete"] is False
    assert [r["N"] for r in report["rows"]] == [200]
    assert (tmp_path / "manifest.json").exists()


def test_emit_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rep = run_gamma_experiment(gamma_cfg(NList=[10]))
    with pytest.raises(OSError, match=str(blocker)):
        emit(rep, blocker / "sub")
