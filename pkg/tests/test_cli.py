import json

import numpy as np
import pytest
import yaml

from gapinn.cli import EXIT_DIVERGED, EXIT_OK, EXIT_USAGE, main, report_table
from gapinn.config import ExperimentConfig, load_config, preset_config, save_config
from gapinn.training import TrainRecord

SMALL = dict(generator=(1, 8), discriminator=(1, 8), n_interior=60, n_boundary=8, n_labeled=3, test_size=200,
             max_epochs=2, tc=1e-12)


@pytest.fixture(autouse=True)
def no_data_root(monkeypatch):
    monkeypatch.delenv("GAPINN_DATA_ROOT", raising=False)


def write_exp(path, runs, seeds=(0,), **kw):
    exp = ExperimentConfig(runs=runs, seeds=list(seeds), output_dir=str(path.parent / "results"), **kw)
    save_config(exp, path)
    return path


def small(problem="poisson", mode="pinn", **kw):
    return preset_config(problem, mode, **{**SMALL, **kw})


# -- init ------------------------------------------------------------------------------


def test_init_poisson(tmp_path):
    out = tmp_path / "p.yaml"
    assert main(["init", "poisson", "pinn", "-o", str(out)]) == EXIT_OK
    exp = load_config(out)
    run = exp.runs[0]
    assert run.tc == 5e-5 and run.generator == (4, 100) and run.eta_P == 1e-6
    raw = yaml.safe_load(out.read_text())
    assert raw["runs"][0]["generator"] == [4, 100]


def test_init_burgers_gapinn(tmp_path):
    out = tmp_path / "b.yaml"
    assert main(["init", "burgers", "gapinn", "-o", str(out), "--seeds", "0", "1", "2"]) == EXIT_OK
    exp = load_config(out)
    assert (exp.runs[0].eta_G, exp.runs[0].eta_D) == (0.001, 0.005)
    assert exp.seeds == [0, 1, 2]


def test_init_unknown_problem(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["init", "navier", "pinn"])
    assert exc.value.code == EXIT_USAGE
    assert "poisson" in capsys.readouterr().err


def test_init_refuses_overwrite(tmp_path):
    out = tmp_path / "p.yaml"
    out.write_text("keep")
    assert main(["init", "poisson", "pinn", "-o", str(out)]) == EXIT_USAGE
    assert out.read_text() == "keep"
    assert main(["init", "poisson", "pinn", "-o", str(out), "--force"]) == EXIT_OK


# -- run -----------------------------------------------------------------------------------


def test_run_one_epoch(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small(max_epochs=1)])
    assert main(["run", str(cfg)]) == EXIT_OK
    d = tmp_path / "results" / "poisson-pinn" / "seed-0"
    rec = TrainRecord.read_csv(d / "record.csv")
    assert rec.epochs == 1
    summary = json.loads((d / "summary.json").read_text())
    assert summary["reason"] == "max_epochs" and summary["termination_epoch"] == 1
    assert (d / "checkpoint.ckpt").exists()
    assert load_config(d / "config.yaml").runs[0].max_epochs == 1


def test_run_invalid_config(tmp_path, capsys):
    path = tmp_path / "c.yaml"
    path.write_text("schema_version: 1\nruns: []\n")
    assert main(["run", str(path)]) == EXIT_USAGE
    assert "no runs" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml")]) == EXIT_USAGE


def test_run_burgers_without_dataset(tmp_path, capsys):
    cfg = write_exp(tmp_path / "c.yaml", [small("poisson"), small("burgers")])
    assert main(["run", str(cfg)]) == EXIT_USAGE
    assert "--fallback-reference" in capsys.readouterr().err
    # validated before anything ran
    assert not (tmp_path / "results").exists()


def test_run_burgers_with_fallback(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small("burgers", reference_resolution="coarse")])
    assert main(["run", str(cfg), "--fallback-reference"]) == EXIT_OK


def test_divergent_run(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small(eta_P=1e3, max_epochs=300)])
    assert main(["run", str(cfg)]) == EXIT_DIVERGED
    d = tmp_path / "results" / "poisson-pinn" / "seed-0"
    summary = json.loads((d / "summary.json").read_text())
    assert summary["reason"] == "numeric_error" and summary["error"]
    rec = TrainRecord.read_csv(d / "record.csv")
    assert rec.epochs == summary["termination_epoch"] >= 1


def test_rerun_skips_and_resumes(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small(max_epochs=4)], checkpoint_every=2)
    assert main(["run", str(cfg)]) == EXIT_OK
    d = tmp_path / "results" / "poisson-pinn" / "seed-0"
    straight = (d / "record.csv").read_text()
    # finished run is left alone
    assert main(["run", str(cfg)]) == EXIT_OK
    assert (d / "record.csv").read_text() == straight

    # interrupted run: keep the epoch-2 checkpoint only
    other = tmp_path / "o"
    other.mkdir()
    cfg2 = write_exp(other / "c.yaml", [small(max_epochs=2)], checkpoint_every=2)
    assert main(["run", str(cfg2)]) == EXIT_OK
    d2 = other / "results" / "poisson-pinn" / "seed-0"
    (d2 / "summary.json").unlink()
    from gapinn.checkpoint import load_checkpoint, save_checkpoint

    meta, arrays = load_checkpoint(d2 / "checkpoint.ckpt")
    meta["config"]["max_epochs"] = 4
    meta["record"] = {"termination_epoch": None, "reason": None, "final_nrmse": None, "error": None, "epochs": 2}
    save_checkpoint(d2 / "checkpoint.ckpt", meta, arrays)
    cfg4 = write_exp(other / "c.yaml", [small(max_epochs=4)], checkpoint_every=2)
    assert main(["run", str(cfg4)]) == EXIT_OK
    assert (d2 / "record.csv").read_text() == straight


# -- report ----------------------------------------------------------------------------------


def test_report_single_run(tmp_path, capsys):
    cfg = write_exp(tmp_path / "c.yaml", [small()])
    main(["run", str(cfg)])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "results")]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 2 and out[0].split()[:2] == ["problem", "mode"]
    lines = (tmp_path / "results" / "report.csv").read_text().splitlines()
    assert len(lines) == 2


def test_report_three_seeds(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small(), small(mode="gapinn")], seeds=(0, 1, 2))
    assert main(["run", str(cfg)]) == EXIT_OK
    main(["report", str(tmp_path / "results")])
    import csv

    rows = list(csv.DictReader((tmp_path / "results" / "report.csv").open()))
    assert [r["mode"] for r in rows] == ["gapinn", "pinn"]
    for r in rows:
        assert r["seeds"] == "0 1 2" and r["median_nrmse"] != "" and r["aborted"] == "0"


def _summary(seed, reason, epoch, nr):
    return dict(problem="poisson", mode="pinn", seed=seed, reason=reason, termination_epoch=epoch,
                final_nrmse=nr)


def test_report_marks_aborted_runs():
    rows = report_table([_summary(0, "tc_reached", 10, 0.1), _summary(1, "numeric_error", 4, None),
                         _summary(2, "max_epochs", 30, 0.3)])
    (row,) = rows
    assert row["epochs"] == "10 4* 30"
    assert row["nrmse"] == "0.1 aborted 0.3"
    assert row["median_epoch"] == 20 and row["median_nrmse"] == pytest.approx(0.2)
    assert row["aborted"] == 1


def test_report_empty_dir(tmp_path):
    assert main(["report", str(tmp_path)]) == EXIT_USAGE
    assert main(["report", str(tmp_path / "nothing")]) == EXIT_USAGE


# -- export ------------------------------------------------------------------------------------


@pytest.fixture
def finished(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small(max_epochs=3)])
    main(["run", str(cfg)])
    return tmp_path / "results"


def test_export_curves(finished):
    assert main(["export", str(finished), "--kind", "curves", "--quantities", "L_f", "L_b"]) == EXIT_OK
    lines = (finished / "poisson-pinn" / "seed-0" / "curves.csv").read_text().splitlines()
    assert lines[0] == "epoch,L_f,L_b" and len(lines) == 4


def test_export_unknown_quantity(finished, capsys):
    assert main(["export", str(finished), "--kind", "curves", "--quantities", "rho_f"]) == EXIT_USAGE
    assert "rho_f" in capsys.readouterr().err


def test_export_heatmap(finished):
    assert main(["export", str(finished), "--kind", "heatmap"]) == EXIT_OK
    text = (finished / "poisson-pinn" / "seed-0" / "heatmap.csv").read_text().splitlines()
    body = [line for line in text if not line.startswith("#")]
    assert len(body) == 129 and len(body[1].split(",")) == 129
    vals = np.array([[float(v) for v in line.split(",")[1:]] for line in body[1:]])
    assert np.all(vals >= 0) and np.all(np.isfinite(vals))


def test_export_heatmap_bad_slice(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small("hd_poisson", n_boundary=2, max_epochs=1)])
    main(["run", str(cfg)])
    res = tmp_path / "results"
    args = ["export", str(res), "--kind", "heatmap", "--resolution", "4", "--slice"]
    assert main(args + [f"x{j}=0.5" for j in range(3, 11)]) == EXIT_OK
    assert main(args + ["x3=2.0"] + [f"x{j}=0.5" for j in range(4, 11)]) == EXIT_USAGE
    assert main(args + ["y=0.5"]) == EXIT_USAGE


def test_export_reference_heatmap(tmp_path):
    cfg = write_exp(tmp_path / "c.yaml", [small("burgers", reference_resolution="coarse")])
    assert main(["run", str(cfg), "--fallback-reference"]) == EXIT_OK
    res = tmp_path / "results"
    # the run config stored the fallback flag, so export resolves it too
    assert main(["export", str(res), "--kind", "heatmap"]) == EXIT_OK
    lines = (res / "burgers-pinn" / "seed-0" / "heatmap.csv").read_text().splitlines()
    assert lines[0] == "# rows: t; columns: x"
    # without the fallback flag the missing dataset is a usage error
    snap = res / "burgers-pinn" / "seed-0" / "config.yaml"
    snap.write_text(snap.read_text().replace("fallback_reference: true", "fallback_reference: false"))
    assert main(["export", str(res), "--kind", "heatmap"]) == EXIT_USAGE
