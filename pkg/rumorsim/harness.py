"""Experiment orchestration, persistence and statistical verification."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import os
import tempfile
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar, Union

import numpy as np

from .config import Experiment, ExperimentConfig, Model
from .errors import ERR_OUTPUT, DegenerateEnsembleError, OutputError
from .fclt import (
    NOISE_NAMES,
    CovarianceForm,
    CovarianceModel,
    NoiseExtractor,
    empirical_cov,
    epoch_product,
)
from .flln import FllnSolution, residual, solve_contestant, solve_lmr
from .laws import LmrLaws, ModelLaws
from .lmr import LMR_NOISE_NAMES, LmrCovarianceModel, extract_lmr_noise, simulate_lmr
from .simulator import counts_on_grid, simulate, time_rescaled_interarrivals
from .stats import ks_exp1, zscore
from .types import Grid, LmrSimConfig, Process, Trajectory

logger = logging.getLogger(__name__)

T = TypeVar("T")

Z_THRESHOLD = 4.0
KS_P_THRESHOLD = 1e-3
FLLN_RESIDUAL_TOL = 1e-8
FLLN_ERROR_AT_1E4 = 0.015
FLLN_RATIO_BAND = (2.0, 5.0)

# (a, b) pairs with a closed form, per covariance form
CONTESTANT_PAIRS: dict[CovarianceForm, tuple[str, ...]] = {
    CovarianceForm.TABLE: (
        "w0:w0", "y01:y01", "y02:y02", "z01:z01", "z02:z02", "w0:y01", "w0:z01",
        "w1:w1", "y1:y1", "z1:z1", "w1:y1", "w1:z1", "y1:z1", "z2:z2", "y2:z2",
    ),
    CovarianceForm.MARKED: (
        "w0:w0", "y01:y01", "y02:y02", "z01:z01", "z02:z02", "w0:y01", "w0:z01", "y01:z01",
        "w1:w1", "y1:y1", "z1:z1", "w1:y1", "w1:z1", "y2:y2", "z2:z2", "y2:z2",
    ),
}
LMR_PAIRS = ("u1:u1", "y1:y1", "u1:y1", "y2:y2", "z1:z1", "y2:z1")


# --- Reports ---


@dataclass(frozen=True)
class CheckRow:
    name: str
    statistic: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "statistic": self.statistic, "threshold": self.threshold, "passed": self.passed}


@dataclass
class StatReport:
    """Named pass/fail checks of one experiment; the verdict is their conjunction."""

    experiment: str
    model: str = Model.CONTESTANT.value
    rows: list[CheckRow] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(row.passed for row in self.rows)

    def check(self, name: str, statistic: float, threshold: float, passed: bool) -> CheckRow:
        row = CheckRow(name, float(statistic), float(threshold), bool(passed))
        self.rows.append(row)
        return row

    def to_text(self) -> str:
        lines = [f"experiment: {self.experiment}", f"model: {self.model}", ""]
        width = max([len(r.name) for r in self.rows] + [5])
        for r in self.rows:
            mark = "PASS" if r.passed else "FAIL"
            lines.append(f"{r.name:<{width}}  {_fmt(r.statistic):>24}  {_fmt(r.threshold):>24}  {mark}")
        lines.append("")
        lines.append(f"verdict: {'PASS' if self.verdict else 'FAIL'}")
        return "\n".join(lines) + "\n"


# --- Persistence ---


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV led by a ``#schema:`` comment naming the columns."""
    buf = io.StringIO()
    buf.write("#schema: " + ",".join(columns) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}", code=ERR_OUTPUT, details={"path": str(path)}) from exc
    return path


# --- Runner ---


class ExperimentRunner:
    """Runs one configured experiment.

    Replications may run on an executor; results are always merged in
    replication order, so outputs do not depend on the thread count.
    """

    def __init__(self, config: ExperimentConfig, *, executor: Optional[Executor] = None) -> None:
        self._config = config
        if executor is None and config.threads > 1:
            executor = ThreadPoolExecutor(max_workers=config.threads)
            self._owns_executor = True
        else:
            self._owns_executor = False
        self._executor = executor
        self._out = Path(config.out) / config.experiment.value

    def close(self) -> None:
        """Shut down the worker pool if this runner created it."""
        if self._owns_executor and self._executor is not None:
            self._executor.shutdown()

    def __enter__(self) -> ExperimentRunner:
        return self

    def __exit__(self, *args: Any) -> None:
        self.close()

    @property
    def config(self) -> ExperimentConfig:
        return self._config

    # --- building blocks ---

    def map_replications(self, fn: Callable[[int], T], indices: Iterable[int]) -> list[T]:
        indices = list(indices)
        if self._executor is None:
            return [fn(k) for k in indices]
        return list(self._executor.map(fn, indices))

    def simulate_one(self, n: int, replication: int, *, retain_marks: bool = False) -> Trajectory:
        sim = self._config.sim_config(n, replication, retain_marks=retain_marks)
        if isinstance(sim, LmrSimConfig):
            return simulate_lmr(sim)
        return simulate(sim)

    def ensemble(self, n: int, *, retain_marks: bool = False, offset: int = 0) -> list[Trajectory]:
        logger.debug("simulating %d replications at n=%d", self._config.replications, n)
        return self.map_replications(
            lambda k: self.simulate_one(n, k, retain_marks=retain_marks),
            range(offset, offset + self._config.replications),
        )

    def grid(self) -> Grid:
        return Grid.over(self._config.horizon, self._config.step)

    def noise_grid(self) -> Grid:
        return Grid.over(self._config.horizon, self._config.noise_step)

    def fluid_limit(self, grid: Optional[Grid] = None) -> FllnSolution:
        cfg = self._config
        grid = grid or self.grid()
        if cfg.model is Model.LMR:
            assert isinstance(cfg.laws, LmrLaws)
            return solve_lmr(cfg.laws, cfg.init, grid)
        assert isinstance(cfg.laws, ModelLaws)
        return solve_contestant(cfg.laws, cfg.init, grid)

    def _write(self, name: str, text: str, report: StatReport) -> Path:
        path = atomic_write_text(self._out / name, text)
        report.files.append(str(path))
        logger.info("wrote %s", path)
        return path

    # --- dispatch ---

    def run(self) -> StatReport:
        cfg = self._config
        logger.info("running %s for the %s model", cfg.experiment.value, cfg.model.value)
        report = StatReport(cfg.experiment.value, cfg.model.value)
        handler = {
            Experiment.SIMULATE: self._simulate,
            Experiment.FLLN: self._flln,
            Experiment.FCLT_COV: self._fclt_cov,
            Experiment.VERIFY_THINNING: self._verify_thinning,
            Experiment.VERIFY_FLLN: self._verify_flln,
            Experiment.VERIFY_FCLT: self._verify_fclt,
            Experiment.ESTIMATE_QB: lambda rep: self._estimate_epochs(Process.B, rep),
            Experiment.ESTIMATE_QC: lambda rep: self._estimate_epochs(Process.C, rep),
        }[cfg.experiment]
        handler(report)
        rows = [(r.name, r.statistic, r.threshold, r.passed) for r in report.rows]
        self._write("report.csv", csv_text(("name", "statistic", "threshold", "passed"), rows), report)
        self._write("report.txt", report.to_text(), report)
        logger.info("%s finished: %s", cfg.experiment.value, "pass" if report.verdict else "fail")
        return report

    # --- experiments ---

    def _simulate(self, report: StatReport) -> None:
        summary = []
        worst = 0
        for n in self._config.n:
            for k, traj in enumerate(self.ensemble(n)):
                self._write(f"n{n}_r{k}.jsonl", "".join(line + "\n" for line in traj.jsonl_lines()), report)
                final = traj.final
                summary.append((traj.model, n, k, len(traj.events), final.x, final.w, final.y, final.z))
                worst = max(worst, int(np.max(np.abs(traj.counts.sum(axis=1) - n))))
        self._write("summary.csv", csv_text(("model", "n", "replication", "events", "x", "w", "y", "z"), summary), report)
        report.check("conservation", worst, 0, worst == 0)

    def _flln(self, report: StatReport) -> None:
        solution = self.fluid_limit()
        self._write("flln.csv", csv_text(solution.columns, solution.rows()), report)
        res = residual(solution, self._config.laws)
        report.check("residual", res, FLLN_RESIDUAL_TOL, res <= FLLN_RESIDUAL_TOL)
        closure = solution.max_conservation_error()
        report.check("closure", closure, FLLN_RESIDUAL_TOL, closure <= FLLN_RESIDUAL_TOL)

    def _fclt_cov(self, report: StatReport) -> None:
        cfg = self._config
        solution = self.fluid_limit()
        times = cfg.cov_times
        rows = []
        if cfg.model is Model.LMR:
            assert isinstance(cfg.laws, LmrLaws)
            lmr_model = LmrCovarianceModel(solution, cfg.laws)
            for pair, (t, r) in itertools.product(LMR_PAIRS, itertools.product(times, times)):
                rows.append((pair, t, r, lmr_model.cov(pair, t, r)))
        else:
            assert isinstance(cfg.laws, ModelLaws)
            model = CovarianceModel(solution, cfg.laws, form=cfg.cov_form)
            for pair, (t, r) in itertools.product(CONTESTANT_PAIRS[cfg.cov_form], itertools.product(times, times)):
                rows.append((pair, t, r, model.cov(pair, t, r)))
        self._write("covariances.csv", csv_text(("pair", "t", "r", "analytic"), rows), report)
        variances = [v for pair, t, r, v in rows if pair.split(":")[0] == pair.split(":")[1] and t == r]
        lowest = min(variances) if variances else 0.0
        report.check("variances-nonnegative", lowest, 0.0, lowest >= -1e-12)

    def _verify_thinning(self, report: StatReport) -> None:
        cfg = self._config
        processes = (Process.A, Process.B, Process.C) if cfg.model is Model.LMR else (Process.A, Process.B)
        trajs = self.ensemble(cfg.n[0])
        rows = []
        for process in processes:
            pooled = list(itertools.chain.from_iterable(time_rescaled_interarrivals(tr, process) for tr in trajs))
            if len(pooled) < 20:
                logger.info("process %s has %d interarrivals; skipping KS", process.value, len(pooled))
                continue
            d, p = ks_exp1(pooled)
            rows.append((process.value, len(pooled), d, p))
            report.check(f"ks-{process.value}", p, KS_P_THRESHOLD, p > KS_P_THRESHOLD)
        self._write("ks.csv", csv_text(("process", "samples", "D", "p"), rows), report)

    def _verify_flln(self, report: StatReport) -> None:
        cfg = self._config
        solution = self.fluid_limit()
        nodes = solution.grid.nodes
        limit = np.stack([solution.x, solution.w, solution.y, solution.z], axis=1)
        names = solution.columns[1:]
        errors: dict[int, np.ndarray] = {}
        rows = []
        for n in sorted(cfg.n):
            trajs = self.ensemble(n)
            mean = np.mean(np.stack([counts_on_grid(tr, nodes) / n for tr in trajs]), axis=0)
            errors[n] = np.max(np.abs(mean - limit), axis=0)
            rows.extend((n, name, errors[n][j]) for j, name in enumerate(names))
        self._write("flln_errors.csv", csv_text(("n", "component", "sup_error"), rows), report)

        sizes = sorted(errors)
        for small, large in zip(sizes, sizes[1:]):
            for j, name in enumerate(names):
                ratio = errors[small][j] / errors[large][j] if errors[large][j] > 0 else math.inf
                if large == 10 * small:
                    lo, hi = FLLN_RATIO_BAND
                    report.check(f"ratio-{name}-n{small}-n{large}", ratio, lo, lo <= ratio <= hi)
                else:
                    report.check(f"decrease-{name}-n{small}-n{large}", ratio, 1.0, ratio > 1.0)
        if 10_000 in errors:
            for j, name in enumerate(names):
                report.check(f"error-{name}-n10000", errors[10_000][j], FLLN_ERROR_AT_1E4, errors[10_000][j] <= FLLN_ERROR_AT_1E4)

    def _verify_fclt(self, report: StatReport) -> None:
        cfg = self._config
        n = max(cfg.n)
        grid = self.noise_grid()
        solution = self.fluid_limit()
        trajs = self.ensemble(n, retain_marks=True)
        if cfg.model is Model.LMR:
            assert isinstance(cfg.laws, LmrLaws)
            paths = [extract_lmr_noise(tr, cfg.laws, grid) for tr in trajs]
            lmr_model = LmrCovarianceModel(solution, cfg.laws)
            analytic: Callable[[str, float, float], float] = lmr_model.cov
            pairs: Sequence[str] = LMR_PAIRS
            martingales: Sequence[str] = LMR_NOISE_NAMES
        else:
            assert isinstance(cfg.laws, ModelLaws)
            paths = NoiseExtractor(cfg.laws, grid).extract_all(trajs)
            model = CovarianceModel(solution, cfg.laws, form=cfg.cov_form)
            analytic = model.cov
            pairs = CONTESTANT_PAIRS[cfg.cov_form]
            martingales = NOISE_NAMES

        rows = []
        for pair, (t, r) in itertools.product(pairs, itertools.product(cfg.cov_times, cfg.cov_times)):
            target = analytic(pair, t, r)
            estimate, se = empirical_cov(paths, pair, t, r)
            z = _zscore(estimate, se, target)
            rows.append((pair, t, r, target, estimate, se, z))
            report.check(f"cov-{pair}-{_fmt(t)}-{_fmt(r)}", abs(z), Z_THRESHOLD, abs(z) <= Z_THRESHOLD)
        self._write("fclt_cov.csv", csv_text(("pair", "t", "r", "analytic", "empirical", "se", "zscore"), rows), report)

        mean_rows = []
        for name in martingales:
            values = np.stack([p[name] for p in paths])
            for k, t in enumerate(grid.nodes):
                if t == 0:
                    continue
                column = values[:, k]
                mean = float(np.mean(column))
                se = float(np.std(column, ddof=1)) / math.sqrt(len(column)) if len(column) > 1 else 0.0
                z = _zscore(mean, se, 0.0)
                mean_rows.append((name, t, mean, se, z))
                report.check(f"mean-{name}-{_fmt(t)}", abs(z), Z_THRESHOLD, abs(z) <= Z_THRESHOLD)
        self._write("noise_means.csv", csv_text(("noise", "t", "mean", "se", "zscore"), mean_rows), report)

    def _estimate_epochs(self, process: Process, report: StatReport) -> None:
        cfg = self._config
        n = max(cfg.n)
        first = self.ensemble(n)
        second = self.ensemble(n, offset=cfg.replications)
        times = sorted(cfg.cov_times)
        pairs = [(t, r) for t, r in itertools.combinations_with_replacement(times, 2)][:4]
        before_first = process is Process.B
        rows = []
        for t, r in pairs:
            est_a, se_a = epoch_product(first, process, t, r, before_first=before_first, seed=cfg.seed)
            est_b, se_b = epoch_product(second, process, t, r, before_first=before_first, seed=cfg.seed + 1)
            z = _zscore(est_a, math.hypot(se_a, se_b), est_b)
            rows.append((t, r, est_a, se_a, est_b, se_b, z))
            report.check(f"agree-{_fmt(t)}-{_fmt(r)}", abs(z), Z_THRESHOLD, abs(z) <= Z_THRESHOLD)
        name = "qb.csv" if process is Process.B else "qc.csv"
        columns = ("t", "r", "estimate_a", "se_a", "estimate_b", "se_b", "zscore")
        self._write(name, csv_text(columns, rows), report)


def _zscore(estimate: float, se: float, target: float) -> float:
    """As ``zscore``, but an exact match with zero spread scores 0."""
    try:
        return zscore(estimate, se, target)
    except DegenerateEnsembleError:
        return 0.0 if abs(estimate - target) <= 1e-12 else math.inf


def run(config: ExperimentConfig, *, executor: Optional[Executor] = None) -> StatReport:
    """Run ``config.experiment`` and write its outputs under ``config.out``."""
    with ExperimentRunner(config, executor=executor) as runner:
        return runner.run()
