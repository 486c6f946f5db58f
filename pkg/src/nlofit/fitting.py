"""Damped Gauss-Newton least squares with numeric Jacobians.

Small dense problems only. Damping is Levenberg-Marquardt style and
multiplicative (lambda scales diag(J^T J)), raised x10 on a rejected step
and lowered /10 on an accepted one. Parameter uncertainties come from the
covariance s^2 (J^T W J)^-1 with s^2 the reduced residual norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

Model = Callable[[np.ndarray, np.ndarray], np.ndarray]

_DAMPING_MAX = 1e14
_DAMPING_MIN = 1e-14


@dataclass(frozen=True)
class FitOptions:
    """Iteration controls; defaults suit double precision."""

    max_iter: int = 200
    step_tol: float = 1e-10
    grad_tol: float = 1e-10
    damping_init: float = 1e-3
    jac_rel_step: float = 1e-6
    jac_abs_step: float = 1e-9


@dataclass
class FitProblem:
    """A weighted nonlinear least-squares problem.

    ``model(theta, x)`` maps a parameter vector and abscissa array to
    predicted ordinates. ``weights`` default to 1; ``bounds`` is an optional
    per-parameter (lower, upper) sequence with None for unbounded sides;
    ``fixed_mask`` pins parameters at their theta0 values.
    """

    model: Model
    x: np.ndarray
    y: np.ndarray
    theta0: np.ndarray
    weights: np.ndarray | None = None
    bounds: Sequence[tuple[float | None, float | None]] | None = None
    fixed_mask: Sequence[bool] | None = None

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.theta0 = np.asarray(self.theta0, dtype=float)
        if self.x.size == 0:
            raise ValueError("data must be non-empty")
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have matching shapes")
        if self.weights is None:
            self.weights = np.ones_like(self.y)
        else:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != self.y.shape:
                raise ValueError("weights must match data shape")
            if np.any(self.weights < 0):
                raise ValueError("weights must be >= 0")
        n_free = self.theta0.size - int(np.sum(self.fixed()))
        if n_free > self.x.size:
            raise ValueError(
                f"{n_free} free parameters exceed {self.x.size} data points"
            )
        lo, hi = self.bound_arrays()
        if np.any(self.theta0 < lo) or np.any(self.theta0 > hi):
            raise ValueError("theta0 violates the given bounds")

    def fixed(self) -> np.ndarray:
        if self.fixed_mask is None:
            return np.zeros(self.theta0.size, dtype=bool)
        mask = np.asarray(self.fixed_mask, dtype=bool)
        if mask.size != self.theta0.size:
            raise ValueError("fixed_mask must match theta0 length")
        return mask

    def bound_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.theta0.size, -np.inf)
        hi = np.full(self.theta0.size, np.inf)
        if self.bounds is not None:
            if len(self.bounds) != self.theta0.size:
                raise ValueError("bounds must match theta0 length")
            for j, (low, high) in enumerate(self.bounds):
                if low is not None:
                    lo[j] = low
                if high is not None:
                    hi[j] = high
        return lo, hi


@dataclass
class FitResult:
    """Outcome of :func:`fit_least_squares`.

    ``residual_norm`` is the sum of squared weighted residuals at ``theta``;
    ``objective_history`` records it at theta0 and after every accepted step
    (non-increasing by construction). ``condition_flag`` is "near-singular"
    when a pseudo-inverse fallback was needed anywhere.
    """

    theta: np.ndarray
    sigma: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    condition_flag: str = "ok"
    objective_history: list[float] = field(default_factory=list)


class UncertaintyEstimate(NamedTuple):
    sigma: np.ndarray
    covariance: np.ndarray
    condition_flag: str


def numeric_jacobian(
    model: Model,
    theta: np.ndarray,
    x: np.ndarray,
    rel_step: float = 1e-6,
    abs_step: float = 1e-9,
) -> np.ndarray:
    """Central-difference Jacobian d model / d theta, shape (n_points, n_params).

    Per-parameter step h_j = max(rel_step*|theta_j|, abs_step).
    """
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    jac = np.empty((x.size, theta.size))
    for j in range(theta.size):
        h = max(rel_step * abs(theta[j]), abs_step)
        up = theta.copy()
        dn = theta.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (np.asarray(model(up, x), dtype=float)
                     - np.asarray(model(dn, x), dtype=float)) / (2.0 * h)
    if not np.all(np.isfinite(jac)):
        raise ValueError("model returned non-finite values while forming the Jacobian")
    return jac


def parameter_uncertainties(
    jacobian: np.ndarray,
    residuals: np.ndarray,
    n_free_params: int,
    weights: np.ndarray | None = None,
) -> UncertaintyEstimate:
    """Sigma vector and covariance from a Jacobian and residuals.

    covariance = s^2 (J^T W J)^-1 with s^2 = sum(w r^2)/(n - p). A singular
    normal matrix is flagged "near-singular" and inverted with a
    pseudo-inverse.
    """
    jacobian = np.asarray(jacobian, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    n_points = residuals.size
    if n_points <= n_free_params:
        raise ValueError("need more data points than free parameters")
    if weights is None:
        weights = np.ones(n_points)
    s2 = float(np.sum(weights * residuals**2)) / (n_points - n_free_params)
    jtj = (jacobian * weights[:, None]).T @ jacobian
    # Jacobi scaling keeps the inversion sane when parameter scales differ
    # by many orders of magnitude (e.g. quadratic models in W/m^2).
    diag = np.diag(jtj).copy()
    diag[diag <= 0] = 1.0
    scale = 1.0 / np.sqrt(diag)
    scaled = jtj * scale[:, None] * scale[None, :]
    flag = "ok"
    try:
        inv_scaled = np.linalg.inv(scaled)
        if not np.all(np.isfinite(inv_scaled)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        inv_scaled = np.linalg.pinv(scaled)
        flag = "near-singular"
    covariance = s2 * inv_scaled * scale[:, None] * scale[None, :]
    sigma = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    return UncertaintyEstimate(sigma, covariance, flag)


def fit_least_squares(problem: FitProblem, options: FitOptions | None = None) -> FitResult:
    """Minimize sum of w_i (y_i - model(theta, x_i))^2 by damped Gauss-Newton.

    Accepted steps never increase the objective. Convergence means the
    relative step norm fell below ``step_tol`` or the gradient norm below
    ``grad_tol`` within ``max_iter`` iterations; otherwise the best
    parameters seen are returned with ``converged=False``. Bounds are
    enforced by projecting each candidate step.
    """
    opt = options or FitOptions()
    free = ~problem.fixed()
    lo, hi = problem.bound_arrays()
    sqrt_w = np.sqrt(problem.weights)
    theta = problem.theta0.copy()

    def residuals(th: np.ndarray) -> np.ndarray:
        return sqrt_w * (problem.y - np.asarray(problem.model(th, problem.x), dtype=float))

    def model_free(th_free: np.ndarray, x: np.ndarray) -> np.ndarray:
        full = theta.copy()
        full[free] = th_free
        return problem.model(full, x)

    res = residuals(theta)
    if not np.all(np.isfinite(res)):
        raise ValueError("model evaluates to non-finite values at theta0")
    objective = float(res @ res)
    history = [objective]
    damping = opt.damping_init
    flag = "ok"
    converged = False
    iterations = 0
    n_free = int(np.sum(free))

    for iterations in range(1, opt.max_iter + 1):
        if n_free == 0:
            converged = True
            break
        jac = numeric_jacobian(model_free, theta[free], problem.x,
                               opt.jac_rel_step, opt.jac_abs_step)
        jac_w = jac * sqrt_w[:, None]
        gradient = jac_w.T @ res
        if np.linalg.norm(gradient, np.inf) < opt.grad_tol:
            converged = True
            break
        normal = jac_w.T @ jac_w
        diag = np.diag(normal).copy()
        diag[diag <= 0] = 1.0
        # Solve in Jacobi-scaled variables: identical to damping by
        # lambda*diag(J^T J) but conditioned like a correlation matrix.
        scale = 1.0 / np.sqrt(diag)
        normal_scaled = normal * scale[:, None] * scale[None, :]
        gradient_scaled = gradient * scale
        eye = np.eye(n_free)
        accepted = False
        step_rel = np.inf
        while damping <= _DAMPING_MAX:
            damped = normal_scaled + damping * eye
            try:
                step = np.linalg.solve(damped, gradient_scaled) * scale
                if not np.all(np.isfinite(step)):
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                flag = "near-singular"
                step = (np.linalg.pinv(damped) @ gradient_scaled) * scale
            candidate = theta.copy()
            candidate[free] = candidate[free] + step
            candidate = np.clip(candidate, lo, hi)
            step_rel = float(np.linalg.norm(candidate - theta)
                             / (np.linalg.norm(theta) + 1e-300))
            cand_res = residuals(candidate)
            if np.all(np.isfinite(cand_res)):
                cand_objective = float(cand_res @ cand_res)
                if cand_objective < objective:
                    theta = candidate
                    res = cand_res
                    objective = cand_objective
                    history.append(objective)
                    damping = max(damping / 10.0, _DAMPING_MIN)
                    accepted = True
                    break
            if step_rel < opt.step_tol:
                # No descent possible within the step tolerance: local
                # minimum (possibly at a bound) to the requested accuracy.
                break
            damping *= 10.0
        if not accepted:
            converged = step_rel < opt.step_tol
            break
        if step_rel < opt.step_tol:
            converged = True
            break

    sigma = np.zeros(theta.size)
    covariance = np.zeros((theta.size, theta.size))
    if n_free > 0 and problem.x.size > n_free:
        jac = numeric_jacobian(model_free, theta[free], problem.x,
                               opt.jac_rel_step, opt.jac_abs_step)
        unweighted = problem.y - np.asarray(problem.model(theta, problem.x), dtype=float)
        estimate = parameter_uncertainties(jac, unweighted, n_free, problem.weights)
        if estimate.condition_flag != "ok":
            flag = estimate.condition_flag
        idx = np.flatnonzero(free)
        sigma[idx] = estimate.sigma
        covariance[np.ix_(idx, idx)] = estimate.covariance

    return FitResult(
        theta=theta,
        sigma=sigma,
        covariance=covariance,
        residual_norm=objective,
        iterations=iterations,
        converged=converged,
        condition_flag=flag,
        objective_history=history,
    )
