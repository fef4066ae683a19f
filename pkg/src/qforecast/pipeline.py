"""End-to-end forecasting runs over a monthly series.

One pipeline run differences the series, scales the differences by the
training maximum, slides windows over the scaled values, fits each
requested model on the rows whose label falls before the split date, and
scores one-step-ahead predictions on both sides of the split.  Scaled
errors are comparable across models; predictions are also mapped back to
original units against the actual previous value.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from . import baselines, pqc, vqls
from .linsys import (
    Scaler,
    TimeSeries,
    WindowSystem,
    build_windows,
    condition_number,
    difference,
    fit_scaler,
    normal_equations,
    split_mask,
    write_csv,
)

DEFAULT_SPLIT = date(2021, 9, 1)
DEFAULT_WINDOW = 12
VQLS_WINDOW = 4

KINDS = ("linear", "mlp", "pqc", "vqls")


def subseed(seed: int, *names: str) -> int:
    """Deterministic named sub-stream of a master seed."""
    tag = "%d/%s" % (seed, "/".join(names))
    digest = hashlib.sha256(tag.encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class ModelSpec:
    """What to fit: a model kind plus its knobs.

    window 0 and max_iters 0 mean the kind's default (window 12, except 4
    for the variational solver whose matrix dimension must stay a power of
    two; 300 evaluations for the circuit model, 2000 otherwise).
    """

    kind: str
    name: str = ""
    window: int = 0
    optimizer: str = "cobyla"
    max_iters: int = 0
    restarts: int = 5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("kind must be one of %s, got %r"
                             % (", ".join(KINDS), self.kind))
        if not self.name:
            object.__setattr__(self, "name", self.kind)
        if self.window == 0:
            object.__setattr__(
                self, "window",
                VQLS_WINDOW if self.kind == "vqls" else DEFAULT_WINDOW)
        if self.window < 1:
            raise ValueError("window must be positive")
        if self.max_iters == 0:
            defaults = {"pqc": 300, "vqls": 2000, "mlp": 2000, "linear": 0}
            object.__setattr__(self, "max_iters", defaults[self.kind])


def default_specs() -> tuple[ModelSpec, ...]:
    return tuple(ModelSpec(kind=k) for k in KINDS)


@dataclass(frozen=True)
class ModelReport:
    name: str
    kind: str
    window: int
    train_mse: float
    test_mse: float
    num_train: int
    num_test: int
    predictions: TimeSeries
    actuals: TimeSeries
    trace: tuple[float, ...]
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunReport:
    split_date: date
    seed: int
    scaler: Scaler
    scaled_diffs: TimeSeries
    reports: tuple[ModelReport, ...]

    def table(self) -> str:
        """Scaled one-step MSE per model, five decimal places."""
        name_width = max(len("Model"), max(len(r.name) for r in self.reports))
        lines = ["%-*s  %-10s  %-10s" % (name_width, "Model",
                                         "Train MSE", "Test MSE")]
        for r in self.reports:
            lines.append("%-*s  %-10.5f  %-10.5f"
                         % (name_width, r.name, r.train_mse, r.test_mse))
        return "\n".join(lines)

    def details(self) -> str:
        lines = []
        for r in self.reports:
            parts = []
            for key in ("condition_number", "final_cost", "residual",
                        "converged", "evaluations"):
                if key in r.extras:
                    value = r.extras[key]
                    text = ("%.6g" % value if isinstance(value, float)
                            else str(value))
                    parts.append("%s %s" % (key.replace("_", " "), text))
            if parts:
                lines.append("%s: %s" % (r.name, ", ".join(parts)))
        return "\n".join(lines)


def _fit_and_predict(spec: ModelSpec, train: WindowSystem, full_X: np.ndarray,
                     seed: int):
    """Returns (scaled predictions over all rows, trace, extras)."""
    if spec.kind == "linear":
        model = baselines.fit_linear(train.X, train.y)
        return model.predict(full_X), (), {}

    if spec.kind == "mlp":
        init = baselines.MlpModel.initialized(
            num_inputs=spec.window, seed=subseed(seed, spec.name, "init"))
        trained, trace = baselines.mlp_train(init, train.X, train.y,
                                             epochs=spec.max_iters)
        return (baselines.mlp_predict(trained, full_X), tuple(trace),
                {"evaluations": len(trace), "model": trained})

    if spec.kind == "pqc":
        init = pqc.PqcModel.initialized(
            num_qubits=spec.window, seed=subseed(seed, spec.name, "init"))
        config = pqc.TrainConfig(optimizer=spec.optimizer,
                                 max_iters=spec.max_iters)
        trained, result = pqc.train(init, train.X, train.y, config)
        return (pqc.predict_batch(trained, full_X), tuple(result.trace),
                {"converged": result.converged,
                 "evaluations": result.evaluations,
                 "final_loss": result.fun, "model": trained})

    system = normal_equations(train)
    problem = vqls.VqlsProblem.from_system(system.A, system.b)
    result = vqls.solve(problem, optimizer=spec.optimizer,
                        seed=subseed(seed, spec.name, "solver"),
                        restarts=spec.restarts, max_iters=spec.max_iters)
    # the solution is realigned toward the real axis; for these real
    # symmetric systems the leftover imaginary part is numerical noise
    weights = np.asarray(result.w).real
    return (full_X @ weights, tuple(result.cost_trace),
            {"condition_number": condition_number(system.A),
             "final_cost": result.final_cost,
             "residual": result.residual,
             "converged": result.converged,
             "evaluations": result.evaluations,
             "weights": weights})


def run_pipeline(series: TimeSeries, specs=None,
                 split_date: date = DEFAULT_SPLIT, seed: int = 0,
                 out_dir: str | None = None) -> RunReport:
    specs = tuple(specs) if specs is not None else default_specs()
    if len({s.name for s in specs}) != len(specs):
        raise ValueError("model names must be unique")

    diffs = difference(series)
    train_diffs = split_mask(diffs.dates, split_date)
    if not train_diffs.any():
        raise ValueError("no observations before the split date")
    scaler = fit_scaler(diffs.values[train_diffs])
    scaled = scaler.apply(diffs.values)
    scaled_series = TimeSeries(diffs.dates, scaled)

    reports = []
    for spec in specs:
        windows = build_windows(scaled, spec.window)
        label_dates = diffs.dates[spec.window:]
        train_rows = split_mask(label_dates, split_date)
        if not train_rows.any() or train_rows.all():
            raise ValueError(
                "split %s leaves no %s data for window %d" % (
                    split_date,
                    "training" if not train_rows.any() else "test",
                    spec.window))
        train = WindowSystem(X=windows.X[train_rows],
                             y=windows.y[train_rows], window=spec.window)
        preds, trace, extras = _fit_and_predict(spec, train, windows.X, seed)
        train_mse = baselines.mse(preds[train_rows], windows.y[train_rows])
        test_mse = baselines.mse(preds[~train_rows], windows.y[~train_rows])

        # back to original units: previous actual value plus the predicted
        # difference; label at scaled index j pairs with series index j+1
        anchors = series.values[spec.window:-1]
        euro_preds = anchors + scaler.invert(preds)
        euro_dates = series.dates[spec.window + 1:]
        predictions = TimeSeries(euro_dates, euro_preds)
        actuals = TimeSeries(euro_dates, series.values[spec.window + 1:])
        reports.append(ModelReport(
            name=spec.name, kind=spec.kind, window=spec.window,
            train_mse=train_mse, test_mse=test_mse,
            num_train=int(train_rows.sum()),
            num_test=int((~train_rows).sum()),
            predictions=predictions, actuals=actuals,
            trace=trace, extras=extras))

    run = RunReport(split_date=split_date, seed=seed, scaler=scaler,
                    scaled_diffs=scaled_series, reports=tuple(reports))
    if out_dir is not None:
        write_artifacts(run, out_dir)
    return run


def roll_predictions(predict_fn, values, window: int,
                     horizon: int) -> np.ndarray:
    """Feed each prediction back in to forecast `horizon` steps ahead.

    predict_fn maps a (1, window) array to a length-1 array of predictions,
    matching the batch-prediction interface of every model here.
    """
    values = np.asarray(values, dtype=float)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if values.size < window:
        raise ValueError("need at least %d history values, got %d"
                         % (window, values.size))
    buf = list(values[-window:])
    out = []
    for _ in range(horizon):
        nxt = float(np.asarray(predict_fn(np.array([buf[-window:]])))[0])
        out.append(nxt)
        buf.append(nxt)
    return np.array(out)


def write_artifacts(run: RunReport, out_dir: str) -> None:
    """CSV and text outputs; all writes are atomic renames."""
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "preprocessed.csv"), ("Date", "Value"),
              [(d.isoformat(), repr(float(v)))
               for d, v in zip(run.scaled_diffs.dates,
                               run.scaled_diffs.values)])
    for report in run.reports:
        write_csv(
            os.path.join(out_dir, "predictions_%s.csv" % report.name),
            ("Date", "Actual", "Predicted"),
            [(d.isoformat(), "%.2f" % a, "%.2f" % p)
             for d, a, p in zip(report.predictions.dates,
                                report.actuals.values,
                                report.predictions.values)])
        if report.trace:
            label = "cost" if report.kind == "vqls" else "loss"
            write_csv(
                os.path.join(out_dir, "trace_%s.csv" % report.name),
                ("iteration", label),
                [(i, repr(float(v))) for i, v in enumerate(report.trace)])
    text = "split %s, seed %d, scale %r\n\n%s\n" % (
        run.split_date.isoformat(), run.seed, float(run.scaler.max_abs),
        run.table())
    details = run.details()
    if details:
        text += "\n" + details + "\n"
    tmp = os.path.join(out_dir, "report.txt.tmp")
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, os.path.join(out_dir, "report.txt"))
