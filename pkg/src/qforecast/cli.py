"""Command line entry points for data generation, training, and forecasting.

Exit codes: 0 on success, 1 for bad input (unparseable arguments, missing
or malformed files, impossible configurations), 2 when a variational solve
finishes without reaching its convergence tolerance.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date

import numpy as np

from . import baselines, pauli, pqc, vqls
from .datagen import GeneratorConfig, generate
from .linsys import (
    TimeSeries,
    build_windows,
    condition_number,
    difference,
    fit_scaler,
    normal_equations,
    read_series_csv,
    split_mask,
    write_csv,
    write_series_csv,
    WindowSystem,
)
from .pipeline import (
    DEFAULT_SPLIT,
    KINDS,
    ModelSpec,
    roll_predictions,
    run_pipeline,
    subseed,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad arguments; that code is reserved
    for convergence failures here, so remap parse errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, "%s: error: %s\n" % (self.prog, message))


def _iso_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected an ISO date (YYYY-MM-DD), got %r" % text)


def read_matrix_csv(path: str) -> np.ndarray:
    """Numeric matrix, one comma-separated row per line, no header."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ValueError("%s:%d: %s" % (path, lineno, exc))
    if not rows:
        raise ValueError(path + ": no rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError("%s: row %d has %d entries, expected %d"
                             % (path, i + 1, len(row), width))
    return np.array(rows)


def read_vector_csv(path: str) -> np.ndarray:
    """Numeric vector, one value per line."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValueError("%s:%d: %s" % (path, lineno, exc))
    if not values:
        raise ValueError(path + ": no values")
    return np.array(values)


def load_any_model(path: str):
    """Sniff the header line and dispatch to the right loader."""
    with open(path) as fh:
        first = fh.readline().strip()
    if first.startswith("linear "):
        return "linear", baselines.load_linear(path)
    if first.startswith("mlp "):
        return "mlp", baselines.load_mlp(path)
    if first.startswith("num_qubits "):
        return "pqc", pqc.load_model(path)
    raise ValueError(path + ": unrecognized model file (header %r)" % first)


def _model_window(kind: str, model) -> int:
    if kind == "linear":
        return model.weights.size
    if kind == "mlp":
        return model.num_inputs
    return model.num_qubits


def _model_predictor(kind: str, model):
    if kind == "linear":
        return model.predict
    if kind == "mlp":
        return lambda X: baselines.mlp_predict(model, X)
    return lambda X: pqc.predict_batch(model, X)


def _prepare(series: TimeSeries, split: date, window: int):
    """Differenced, scaled windows plus the bits needed to undo the scaling.

    Returns (scaler, scaled values, windows, train-row mask).
    """
    diffs = difference(series)
    training = split_mask(diffs.dates, split)
    if not training.any():
        raise ValueError("no observations before the split date %s" % split)
    scaler = fit_scaler(diffs.values[training])
    scaled = scaler.apply(diffs.values)
    windows = build_windows(scaled, window)
    train_rows = split_mask(diffs.dates[window:], split)
    if not train_rows.any():
        raise ValueError(
            "window %d leaves no training rows before %s" % (window, split))
    return scaler, scaled, windows, train_rows


def _write_trace(path: str, trace, label: str) -> None:
    write_csv(path, ("iteration", label),
              [(i, repr(float(v))) for i, v in enumerate(trace)])


def cmd_generate(args) -> int:
    config = GeneratorConfig(start=args.start, num_months=args.months,
                             base=args.base, trend=args.trend,
                             growth=args.growth, amplitude=args.amplitude,
                             phase=args.phase, noise_std=args.noise_std,
                             seed=args.seed)
    series = generate(config)
    write_series_csv(args.out, series)
    print("wrote %d months to %s" % (len(series), args.out))
    return EXIT_OK


def cmd_preprocess(args) -> int:
    series = read_series_csv(args.input, value_column=args.value_column)
    diffs = difference(series)
    training = split_mask(diffs.dates, args.split)
    if not training.any():
        raise ValueError("no observations before the split date %s"
                         % args.split)
    scaler = fit_scaler(diffs.values[training], half_width=args.half_width)
    scaled = scaler.apply(diffs.values)
    write_csv(args.out, ("Date", "Value"),
              [(d.isoformat(), repr(float(v)))
               for d, v in zip(diffs.dates, scaled)])
    print("scale %r" % float(scaler.max_abs))
    print("wrote %d scaled differences to %s (%d training)"
          % (scaled.size, args.out, int(training.sum())))
    return EXIT_OK


def cmd_train_pqc(args) -> int:
    series = read_series_csv(args.input, value_column=args.value_column)
    _, _, windows, train_rows = _prepare(series, args.split, args.window)
    X, y = windows.X[train_rows], windows.y[train_rows]
    init = pqc.PqcModel.initialized(num_qubits=args.window,
                                    seed=subseed(args.seed, "pqc", "init"))
    config = pqc.TrainConfig(optimizer=args.optimizer,
                             max_iters=args.max_iters)
    trained, result = pqc.train(init, X, y, config)
    pqc.save_model(trained, args.model_out)
    if args.trace_out:
        _write_trace(args.trace_out, result.trace, "loss")
    print("trained on %d windows" % X.shape[0])
    print("loss %r -> %r in %d evaluations"
          % (result.trace[0], result.fun, result.evaluations))
    print("converged %s" % result.converged)
    print("saved model to %s" % args.model_out)
    return EXIT_OK


def cmd_train_baseline(args) -> int:
    series = read_series_csv(args.input, value_column=args.value_column)
    _, _, windows, train_rows = _prepare(series, args.split, args.window)
    X, y = windows.X[train_rows], windows.y[train_rows]
    if args.kind == "linear":
        model = baselines.fit_linear(X, y)
        baselines.save_linear(model, args.model_out)
        train_mse = baselines.mse(model.predict(X), y)
        print("trained on %d windows" % X.shape[0])
        print("training mse %r" % train_mse)
    else:
        init = baselines.MlpModel.initialized(
            num_inputs=args.window, seed=subseed(args.seed, "mlp", "init"))
        model, trace = baselines.mlp_train(
            init, X, y, learning_rate=args.learning_rate, epochs=args.epochs)
        baselines.save_mlp(model, args.model_out)
        if args.trace_out:
            _write_trace(args.trace_out, trace, "loss")
        print("trained on %d windows" % X.shape[0])
        print("loss %r -> %r over %d epochs"
              % (trace[0], baselines.mse(baselines.mlp_predict(model, X), y),
                 len(trace)))
    print("saved model to %s" % args.model_out)
    return EXIT_OK


def cmd_solve_vqls(args) -> int:
    a = read_matrix_csv(args.matrix)
    b = read_vector_csv(args.rhs)
    problem = vqls.VqlsProblem.from_system(a, b)
    result = vqls.solve(problem, optimizer=args.optimizer, seed=args.seed,
                        restarts=args.restarts, max_iters=args.max_iters,
                        estimator=args.estimator, shots=args.shots,
                        cost_tol=args.cost_tol)
    print("condition number %.6g" % condition_number(a))
    weights = np.asarray(result.w).real
    for i, w in enumerate(weights):
        print("w[%d] = %r" % (i, float(w)))
    print("cost %r" % result.final_cost)
    print("residual %r" % result.residual)
    print("evaluations %d" % result.evaluations)
    print("converged %s" % result.converged)
    if args.trace_out:
        _write_trace(args.trace_out, result.cost_trace, "cost")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_decompose(args) -> int:
    a = read_matrix_csv(args.matrix)
    decomposition = pauli.decompose(a, prune_tol=args.prune_tol)
    for coefficient, string in decomposition.terms:
        print("%r\t%s" % (coefficient, string.label))
    return EXIT_OK


def _forecast_with_model(args) -> int:
    kind, model = load_any_model(args.model)
    window = _model_window(kind, model)
    predictor = _model_predictor(kind, model)
    series = read_series_csv(args.input, value_column=args.value_column)
    # the scaler is refit on the pre-split data, so pass the same series
    # and split the model was trained with
    scaler, scaled, windows, train_rows = _prepare(series, args.split, window)
    preds = np.asarray(predictor(windows.X), dtype=float)
    anchors = series.values[window:-1]
    euro_preds = anchors + scaler.invert(preds)
    euro_dates = series.dates[window + 1:]
    actuals = series.values[window + 1:]
    if args.out:
        write_csv(args.out, ("Date", "Actual", "Predicted"),
                  [(d.isoformat(), "%.2f" % a, "%.2f" % p)
                   for d, a, p in zip(euro_dates, actuals, euro_preds)])
        print("wrote %d predictions to %s" % (len(euro_dates), args.out))
    test = ~train_rows
    print("loaded %s model (window %d)" % (kind, window))
    print("train mse %.5f" % baselines.mse(preds[train_rows],
                                           windows.y[train_rows]))
    if test.any():
        print("test mse %.5f" % baselines.mse(preds[test], windows.y[test]))
    if args.horizon:
        future_scaled = roll_predictions(predictor, scaled, window,
                                         args.horizon)
        future_values = series.values[-1] + np.cumsum(
            scaler.invert(future_scaled))
        day = series.dates[-1]
        from .linsys import add_months
        for step, value in enumerate(future_values, start=1):
            print("%s %.2f" % (add_months(day, step).isoformat(), value))
    return EXIT_OK


def cmd_forecast(args) -> int:
    if args.model:
        return _forecast_with_model(args)
    series = read_series_csv(args.input, value_column=args.value_column)
    kinds = [k.strip() for k in args.models.split(",") if k.strip()]
    for kind in kinds:
        if kind not in KINDS:
            raise ValueError("unknown model kind %r (choose from %s)"
                             % (kind, ", ".join(KINDS)))
    specs = []
    for kind in kinds:
        overrides = {"pqc": args.pqc_iters, "vqls": args.vqls_iters,
                     "mlp": args.mlp_epochs}.get(kind, 0)
        specs.append(ModelSpec(kind=kind, max_iters=overrides or 0,
                               restarts=args.vqls_restarts))
    run = run_pipeline(series, specs=specs, split_date=args.split,
                       seed=args.seed, out_dir=args.out_dir)
    print(run.table())
    details = run.details()
    if details:
        print()
        print(details)
    if args.out_dir:
        print()
        print("artifacts in %s" % args.out_dir)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    predicted = read_series_csv(args.predictions, value_column="Predicted")
    if args.actuals:
        actual = read_series_csv(args.actuals,
                                 value_column=args.value_column)
    else:
        actual = read_series_csv(args.predictions, value_column="Actual")
    if predicted.dates != actual.dates:
        for p, a in zip(predicted.dates, actual.dates):
            if p != a:
                raise ValueError("dates differ: predictions have %s where "
                                 "actuals have %s" % (p, a))
        raise ValueError("date ranges differ: %d predictions vs %d actuals"
                         % (len(predicted), len(actual)))
    errors = predicted.values - actual.values
    print("n %d" % errors.size)
    print("mse %r" % float(np.mean(errors ** 2)))
    print("rmse %r" % float(np.sqrt(np.mean(errors ** 2))))
    print("mae %r" % float(np.mean(np.abs(errors))))
    nonzero = actual.values != 0
    if nonzero.any():
        mape = float(np.mean(np.abs(errors[nonzero]
                                    / actual.values[nonzero])) * 100)
        print("mape %.4f%%" % mape)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="qforecast",
                     description="Quantum-assisted monthly forecasting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic monthly series")
    p.add_argument("--out", required=True)
    p.add_argument("--months", type=int, default=67)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", type=_iso_date, default=date(2019, 1, 1))
    p.add_argument("--base", type=float, default=1.2e6)
    p.add_argument("--trend", type=float, default=25_000.0)
    p.add_argument("--growth", type=float, default=1.008)
    p.add_argument("--amplitude", type=float, default=0.25)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--noise-std", type=float, default=1.2e5)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("preprocess",
                       help="difference and scale a series into [-w, w]")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--split", type=_iso_date, default=DEFAULT_SPLIT)
    p.add_argument("--half-width", type=float, default=0.25)
    p.add_argument("--value-column", default=None)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train-pqc",
                       help="fit the parameterized-circuit regressor")
    p.add_argument("input")
    p.add_argument("--model-out", required=True)
    p.add_argument("--trace-out", default=None)
    p.add_argument("--window", type=int, default=12)
    p.add_argument("--split", type=_iso_date, default=DEFAULT_SPLIT)
    p.add_argument("--optimizer", choices=("cobyla", "lbfgs"),
                   default="cobyla")
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--value-column", default=None)
    p.set_defaults(func=cmd_train_pqc)

    p = sub.add_parser("train-baseline",
                       help="fit the linear or neural reference model")
    p.add_argument("input")
    p.add_argument("--kind", choices=("linear", "mlp"), required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--trace-out", default=None)
    p.add_argument("--window", type=int, default=12)
    p.add_argument("--split", type=_iso_date, default=DEFAULT_SPLIT)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--value-column", default=None)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("solve-vqls",
                       help="variationally solve A x = b from CSV files")
    p.add_argument("--matrix", required=True,
                   help="comma-separated rows, no header")
    p.add_argument("--rhs", required=True, help="one value per line")
    p.add_argument("--optimizer", choices=("cobyla", "lbfgs"),
                   default="cobyla")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--estimator", choices=("analytic", "hadamard"),
                   default="analytic")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--cost-tol", type=float, default=vqls.DEFAULT_COST_TOL)
    p.add_argument("--trace-out", default=None)
    p.set_defaults(func=cmd_solve_vqls)

    p = sub.add_parser("decompose",
                       help="print the Pauli expansion of a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--prune-tol", type=float,
                   default=pauli.DEFAULT_PRUNE_TOL)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("forecast",
                       help="run the full pipeline, or apply a saved model")
    p.add_argument("input")
    p.add_argument("--model", default=None,
                   help="apply this saved model instead of training")
    p.add_argument("--out", default=None,
                   help="predictions CSV (saved-model mode)")
    p.add_argument("--horizon", type=int, default=0,
                   help="months to forecast past the end of the data")
    p.add_argument("--out-dir", default=None,
                   help="artifact directory (pipeline mode)")
    p.add_argument("--models", default="linear,mlp,pqc,vqls")
    p.add_argument("--split", type=_iso_date, default=DEFAULT_SPLIT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pqc-iters", type=int, default=0)
    p.add_argument("--vqls-iters", type=int, default=0)
    p.add_argument("--vqls-restarts", type=int, default=5)
    p.add_argument("--mlp-epochs", type=int, default=0)
    p.add_argument("--value-column", default=None)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate",
                       help="score a Date,Actual,Predicted CSV")
    p.add_argument("predictions")
    p.add_argument("--actuals", default=None,
                   help="compare against this series instead of the "
                        "Actual column")
    p.add_argument("--value-column", default=None)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
