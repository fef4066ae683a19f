"""Derivative-free and quasi-Newton minimizers with per-evaluation traces.

Both optimizers are deterministic, record every objective evaluation, and
return the best point seen rather than the last iterate. Gradient calls are
not counted as objective evaluations.

minimize_derivative_free builds a linear interpolation model on a simplex
of n+1 points and takes trust-region steps, shrinking the radius when the
model stops predicting actual decrease (the classic linear-approximation
trust-region scheme). minimize_quasi_newton is a limited-memory BFGS with
Armijo backtracking and optional box bounds handled by projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimOptions:
    max_iters: int = 1000
    max_evals: int | None = None
    initial_step: float = 0.5
    step_tol: float = 1e-8          # quasi-Newton step-size stop
    f_tol: float = 1e-10            # quasi-Newton objective-delta stop
    trust_radius_end: float = 1e-6  # derivative-free radius stop
    grad_tol: float = 1e-8          # quasi-Newton gradient stop
    history: int = 10               # L-BFGS memory
    bounds: tuple | None = None     # (lower, upper) arrays or None


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    converged: bool
    evaluations: int
    trace: list[float] = field(default_factory=list)
    message: str = ""


class _BudgetExhausted(Exception):
    pass


class _Recorder:
    """Wraps the objective: traces every call, tracks the best point."""

    def __init__(self, fun, max_evals):
        self._fun = fun
        self._max = max_evals
        self.trace: list[float] = []
        self.best_x: np.ndarray | None = None
        self.best_f = math.inf

    def __call__(self, x):
        if self._max is not None and len(self.trace) >= self._max:
            raise _BudgetExhausted
        value = float(self._fun(np.asarray(x, dtype=float)))
        if math.isnan(value):
            value = math.inf
        self.trace.append(value)
        if value < self.best_f:
            self.best_f = value
            self.best_x = np.array(x, dtype=float)
        return value

    def result(self, converged, message=""):
        return OptimResult(x=self.best_x, fun=self.best_f, converged=converged,
                           evaluations=len(self.trace), trace=self.trace,
                           message=message)


def _check_start(x0, recorder):
    f0 = recorder(x0)
    if not math.isfinite(f0):
        raise ValueError(f"objective is not finite at the start point ({f0})")
    return f0


def finite_diff_gradient(fun, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient estimate."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (fun(x + step) - fun(x - step)) / (2 * h)
    return grad


def minimize_derivative_free(fun, x0, options: OptimOptions | None = None,
                             ) -> OptimResult:
    """Linear-model trust-region search needing only objective values."""
    opts = options or OptimOptions()
    x0 = np.array(x0, dtype=float)
    n = x0.size
    if n == 0:
        raise ValueError("empty start point")
    rec = _Recorder(fun, opts.max_evals)
    rho = opts.initial_step
    rho_end = opts.trust_radius_end
    try:
        _check_start(x0, rec)
        sim = np.tile(x0, (n + 1, 1))
        fs = np.empty(n + 1)
        fs[0] = rec.trace[0]
        for i in range(n):
            sim[i + 1, i] += rho
            fs[i + 1] = rec(sim[i + 1])
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        for _ in range(opts.max_iters):
            if rho <= rho_end:
                return rec.result(True, "trust radius below tolerance")
            diffs = sim[1:] - sim[0]
            dvals = fs[1:] - fs[0]
            grad, *_ = np.linalg.lstsq(diffs, dvals, rcond=None)
            gnorm = float(np.linalg.norm(grad))
            if gnorm > 1e-15:
                pole_value = fs[0]
                trial = sim[0] - (rho / gnorm) * grad
                f_trial = rec(trial)
                worst = int(np.argmax(fs[1:])) + 1
                sim[worst], fs[worst] = trial, f_trial
                order = np.argsort(fs, kind="stable")
                sim, fs = sim[order], fs[order]
                if pole_value - f_trial >= 0.1 * rho * gnorm:
                    continue  # model predicted well enough; keep the radius
            # no useful model decrease: repair geometry or shrink
            dists = np.linalg.norm(sim[1:] - sim[0], axis=1)
            far = int(np.argmax(dists)) + 1
            sing = np.linalg.svd(sim[1:] - sim[0], compute_uv=False)
            if dists.max() > 2.0 * rho or sing[-1] < 0.1 * rho:
                _, _, vt = np.linalg.svd(sim[1:] - sim[0])
                probe = vt[-1]
                if gnorm > 1e-15 and float(probe @ grad) > 0:
                    probe = -probe
                trial = sim[0] + rho * probe
                fs[far] = rec(trial)
                sim[far] = trial
                order = np.argsort(fs, kind="stable")
                sim, fs = sim[order], fs[order]
            else:
                rho *= 0.5
        return rec.result(False, "iteration limit reached")
    except _BudgetExhausted:
        return rec.result(False, "evaluation budget exhausted")


def _project(x, bounds):
    if bounds is None:
        return np.array(x, dtype=float)
    lo, hi = bounds
    return np.clip(x, lo, hi)


def _two_loop(grad, s_list, y_list):
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), a in zip(zip(s_list, y_list), reversed(alphas)):
        rho = 1.0 / float(y @ s)
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def minimize_quasi_newton(fun, x0, grad, options: OptimOptions | None = None,
                          ) -> OptimResult:
    """Limited-memory BFGS with Armijo backtracking and box projection."""
    opts = options or OptimOptions()
    x = _project(np.array(x0, dtype=float), opts.bounds)
    if x.size == 0:
        raise ValueError("empty start point")
    rec = _Recorder(fun, opts.max_evals)
    try:
        f = _check_start(x, rec)
        g = np.asarray(grad(x), dtype=float)
        s_list: list[np.ndarray] = []
        y_list: list[np.ndarray] = []
        for iteration in range(opts.max_iters):
            projected_grad = x - _project(x - g, opts.bounds)
            if float(np.max(np.abs(projected_grad))) <= opts.grad_tol:
                return rec.result(True, "gradient below tolerance")
            direction = -_two_loop(g, s_list, y_list)
            if float(direction @ g) > -1e-14 * np.linalg.norm(direction) * \
                    np.linalg.norm(g):
                direction = -g
            if s_list:
                alpha = 1.0
            else:
                dnorm = float(np.linalg.norm(direction))
                alpha = min(1.0, opts.initial_step / max(dnorm, 1e-15))
            accepted = False
            for _ in range(50):
                trial = _project(x + alpha * direction, opts.bounds)
                step = trial - x
                if float(np.max(np.abs(step))) == 0.0:
                    break
                f_trial = rec(trial)
                if f_trial <= f + 1e-4 * float(g @ step):
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                return rec.result(True, "no further decrease along search line")
            g_trial = np.asarray(grad(trial), dtype=float)
            s = trial - x
            y = g_trial - g
            curvature = float(s @ y)
            if curvature > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
                s_list.append(s)
                y_list.append(y)
                if len(s_list) > opts.history:
                    s_list.pop(0)
                    y_list.pop(0)
            delta = f - f_trial
            x, f, g = trial, f_trial, g_trial
            if delta <= opts.f_tol * max(1.0, abs(f)):
                return rec.result(True, "objective delta below tolerance")
            if float(np.linalg.norm(s)) <= opts.step_tol:
                return rec.result(True, "step size below tolerance")
        return rec.result(False, "iteration limit reached")
    except _BudgetExhausted:
        return rec.result(False, "evaluation budget exhausted")
