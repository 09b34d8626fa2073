"""Tests for the experiment runner and its outputs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import pytest

from rumorsim import (
    CovarianceForm,
    Experiment,
    ExperimentConfig,
    ExperimentRunner,
    Model,
    OutputError,
    RateFunction,
    StatReport,
    default_lmr_laws,
    run,
)
from rumorsim.harness import atomic_write_text, csv_text

from .conftest import make_exponential_laws


def make_config(tmp_path: Path, experiment: Experiment, **overrides: Any) -> ExperimentConfig:
    """Build a small experiment writing under tmp_path."""
    values: dict[str, Any] = {
        "experiment": experiment,
        "n": (50,),
        "replications": 2,
        "horizon": 2.0,
        "step": 0.05,
        "seed": 11,
        "out": str(tmp_path),
        "cov_times": (1.0, 2.0),
        "noise_step": 0.5,
    }
    if overrides.get("model") == Model.LMR:
        values["laws"] = default_lmr_laws()
        values["init"] = (0.0, 0.05, 0.0)
    values.update(overrides)
    return ExperimentConfig(**values)


def read_rows(path: Path) -> list[str]:
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#schema: ")
    return lines[1:]


class TestStatReport:
    """Tests for StatReport."""

    def test_empty_passes(self) -> None:
        assert StatReport("flln").verdict

    def test_verdict_is_conjunction(self) -> None:
        report = StatReport("verify-fclt")
        report.check("a", 1.0, 4.0, True)
        report.check("b", 5.0, 4.0, False)

        text = report.to_text()

        assert not report.verdict
        assert text.endswith("verdict: FAIL\n")
        assert "experiment: verify-fclt" in text
        assert text.count("PASS") == 1


class TestPersistence:
    """Tests for csv_text() and atomic_write_text()."""

    def test_csv_text(self) -> None:
        """The schema line leads and floats keep full precision."""
        text = csv_text(("name", "value", "ok"), [("a", 0.1, True), ("b", 2, False)])

        assert text.splitlines() == ["#schema: name,value,ok", "a,0.10000000000000001,true", "b,2,false"]

    def test_atomic_write(self, tmp_path: Path) -> None:
        path = atomic_write_text(tmp_path / "sub" / "x.txt", "hello\n")

        assert path.read_text() == "hello\n"
        assert [p.name for p in path.parent.iterdir()] == ["x.txt"]

    def test_unwritable(self, tmp_path: Path) -> None:
        """A file in place of the directory is an output error."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")

        with pytest.raises(OutputError) as exc_info:
            atomic_write_text(blocker / "x.txt", "hello")

        assert exc_info.value.details["path"] == str(blocker / "x.txt")


class TestExperimentRunner:
    """Tests for ExperimentRunner executor handling."""

    def test_owns_executor(self, tmp_path: Path) -> None:
        runner = ExperimentRunner(make_config(tmp_path, Experiment.SIMULATE, threads=2))

        assert runner.map_replications(lambda k: k * k, range(5)) == [0, 1, 4, 9, 16]
        runner.close()
        with pytest.raises(RuntimeError):
            runner.map_replications(lambda k: k, range(2))

    def test_injected_executor_left_open(self, tmp_path: Path) -> None:
        with ThreadPoolExecutor(max_workers=2) as pool:
            with ExperimentRunner(make_config(tmp_path, Experiment.SIMULATE), executor=pool) as runner:
                runner.map_replications(lambda k: k, range(3))

            assert pool.submit(lambda: 7).result() == 7

    def test_thread_count_does_not_change_outputs(self, tmp_path: Path) -> None:
        """Replications merge in order whatever the pool size."""
        serial = run(make_config(tmp_path / "one", Experiment.SIMULATE, replications=4))
        threaded = run(make_config(tmp_path / "four", Experiment.SIMULATE, replications=4, threads=4))

        assert serial.verdict and threaded.verdict
        one = (tmp_path / "one" / "simulate" / "summary.csv").read_text()
        four = (tmp_path / "four" / "simulate" / "summary.csv").read_text()
        assert one == four


class TestExperiments:
    """End-to-end runs of each experiment on tiny configurations."""

    @pytest.mark.parametrize("model", [Model.CONTESTANT, Model.LMR])
    def test_simulate(self, tmp_path: Path, model: Model) -> None:
        report = run(make_config(tmp_path, Experiment.SIMULATE, model=model))

        out = tmp_path / "simulate"
        assert report.verdict
        assert len(read_rows(out / "summary.csv")) == 2
        assert (out / "n50_r0.jsonl").exists()
        assert (out / "report.txt").read_text().endswith("verdict: PASS\n")

    @pytest.mark.parametrize("model", [Model.CONTESTANT, Model.LMR])
    def test_flln(self, tmp_path: Path, model: Model) -> None:
        report = run(make_config(tmp_path, Experiment.FLLN, model=model))

        assert report.verdict
        assert [r.name for r in report.rows] == ["residual", "closure"]
        assert len(read_rows(tmp_path / "flln" / "flln.csv")) == 41

    def test_flln_without_interactions(self, tmp_path: Path) -> None:
        """With zero rates the written limit is W(0) exp(-t) for exponential delays."""
        laws = make_exponential_laws().with_rates(RateFunction.constant(0.0), RateFunction.constant(0.0))

        run(make_config(tmp_path, Experiment.FLLN, laws=laws))

        for row in read_rows(tmp_path / "flln" / "flln.csv"):
            t, _, w, y, z = (float(v) for v in row.split(","))
            assert w == pytest.approx(0.1 * math.exp(-t), abs=1e-6)
            assert y == pytest.approx(0.1 * (0.6 * t + 0.5) * math.exp(-t), abs=1e-6)
            assert z == pytest.approx(0.1 * (0.4 * t + 0.5) * math.exp(-t), abs=1e-6)

    def test_simulate_reproducible(self, tmp_path: Path) -> None:
        """The same config writes byte-identical event logs."""
        run(make_config(tmp_path / "a", Experiment.SIMULATE))
        run(make_config(tmp_path / "b", Experiment.SIMULATE))

        for k in range(2):
            name = f"simulate/n50_r{k}.jsonl"
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    @pytest.mark.parametrize("form", list(CovarianceForm))
    def test_fclt_cov(self, tmp_path: Path, form: CovarianceForm) -> None:
        report = run(make_config(tmp_path, Experiment.FCLT_COV, cov_form=form, laws=make_exponential_laws()))

        assert report.verdict
        rows = read_rows(tmp_path / "fclt-cov" / "covariances.csv")
        assert any(row.startswith("w0:w0,1,1,") for row in rows)

    def test_fclt_cov_lmr(self, tmp_path: Path) -> None:
        report = run(make_config(tmp_path, Experiment.FCLT_COV, model=Model.LMR))

        assert report.verdict
        assert len(read_rows(tmp_path / "fclt-cov" / "covariances.csv")) == 6 * 4

    def test_verify_thinning(self, tmp_path: Path) -> None:
        report = run(
            make_config(tmp_path, Experiment.VERIFY_THINNING, n=(200,), replications=10, horizon=5.0, sampler="thinning")
        )

        names = [r.name for r in report.rows]
        assert "ks-A" in names
        assert report.verdict

    def test_verify_flln(self, tmp_path: Path) -> None:
        """Writes a sup-error per size and component and compares neighbouring sizes."""
        report = run(make_config(tmp_path, Experiment.VERIFY_FLLN, n=(20, 200), step=0.1))

        assert len(read_rows(tmp_path / "verify-flln" / "flln_errors.csv")) == 8
        assert {r.name.split("-")[0] for r in report.rows} == {"ratio"}

    def test_verify_fclt(self, tmp_path: Path) -> None:
        cfg = make_config(tmp_path, Experiment.VERIFY_FCLT, n=(100,), replications=30, laws=make_exponential_laws())

        report = run(cfg)

        out = tmp_path / "verify-fclt"
        assert len(read_rows(out / "fclt_cov.csv")) == 16 * 4
        assert len(read_rows(out / "noise_means.csv")) == 10 * 4
        assert len(report.rows) == 16 * 4 + 10 * 4
        assert any(r.name.startswith("mean-w0-") for r in report.rows)
        assert any(r.name.startswith("mean-z02-") for r in report.rows)

    def test_verify_fclt_lmr(self, tmp_path: Path) -> None:
        report = run(make_config(tmp_path, Experiment.VERIFY_FCLT, model=Model.LMR, n=(200,), replications=30))

        assert len(read_rows(tmp_path / "verify-fclt" / "fclt_cov.csv")) == 6 * 4
        assert any(r.name.startswith("mean-y3-") for r in report.rows)
        assert any(r.name.startswith("mean-y1-") for r in report.rows)

    @pytest.mark.parametrize(
        ("model", "experiment", "name"),
        [(Model.CONTESTANT, Experiment.ESTIMATE_QB, "qb.csv"), (Model.LMR, Experiment.ESTIMATE_QC, "qc.csv")],
    )
    def test_estimate_epochs(self, tmp_path: Path, model: Model, experiment: Experiment, name: str) -> None:
        cfg = make_config(tmp_path, experiment, model=model, n=(100,), replications=20, horizon=3.0)

        report = run(cfg)

        assert len(read_rows(tmp_path / experiment.value / name)) == 3
        assert all(r.name.startswith("agree-") for r in report.rows)
