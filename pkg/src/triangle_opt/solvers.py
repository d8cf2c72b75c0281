"""The similar-triangles solver family.

Four modes share one iteration skeleton: coefficient update, estimate-function
fold, a single prox step, and triangle interpolation of the next query point.

* ``mst_exact_L``: the Lipschitz constant is known; no backtracking.  With
  ``mu > 0`` the strongly convex coefficient recursion is used.
* ``amst_adaptive``: per-iteration doubling of a trial constant with a warm
  start at half the previously accepted value; slack 0, or eps*alpha/A when a
  target accuracy is configured.
* ``umst_universal``: same loop with slack eps*alpha/(2A); the slack is what
  lets the doubling terminate for merely Hölder-continuous gradients, without
  knowing the exponent.
* ``sumst_stochastic_universal``: slack 3*eps*alpha/(2A) and mini-batched
  stochastic gradients with the batch size tied to the trial constant; a fresh
  batch is drawn at every backtracking trial.

The per-iterate certificate A_k F(x^k) <= phi_k(u^k) + A_k * c * eps (with the
mode's accumulated slack factor c) is recorded in the trace and drives the
certified-gap stopping rule and the reported gap bound R^2/A_N + c*eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import BacktrackLimitExceeded, CoefficientOverflow, ConfigError
from .oracles import (CompositeObjective, EvalCounter, StochasticGradientOracle,
                      grad, minibatch_gradient, substream, value)
from .prox_geometry import (EstimateFunction, ProxSetup, composite_prox_solve,
                            estimate_value, initial_estimate)
from .traces import Trace

MODES = ("mst_exact_L", "amst_adaptive", "umst_universal", "sumst_stochastic_universal")
A_OVERFLOW_LIMIT = 1e300


@dataclass(frozen=True)
class StoppingRule:
    """iterations_only, gradient_mapping (threshold), or certified_gap (r_sq)."""

    kind: str = "iterations_only"
    threshold: float | None = None
    r_sq: float | None = None

    def __post_init__(self):
        if self.kind not in ("iterations_only", "gradient_mapping", "certified_gap"):
            raise ConfigError(f"unknown stopping rule {self.kind!r}")
        if self.kind == "gradient_mapping" and (self.threshold is None or self.threshold <= 0):
            raise ConfigError("gradient_mapping stopping needs a positive threshold")
        if self.kind == "certified_gap" and (self.r_sq is None or self.r_sq <= 0):
            raise ConfigError("certified_gap stopping needs a positive r_sq bound")


@dataclass(frozen=True)
class SolverConfig:
    mode: str
    L_known: float | None = None
    L0: float = 1.0
    mu: float = 0.0
    omega_tilde: float = 1.0
    epsilon: float | None = None
    D: float | None = None
    max_iters: int = 100
    max_backtracks_per_iter: int = 60
    stopping: StoppingRule = field(default_factory=StoppingRule)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown solver mode {self.mode!r}")
        if self.mode == "mst_exact_L" and (self.L_known is None or self.L_known <= 0):
            raise ConfigError("mst_exact_L requires a positive L_known")
        if self.mode in ("umst_universal", "sumst_stochastic_universal"):
            if self.epsilon is None or self.epsilon <= 0:
                raise ConfigError(f"{self.mode} requires a positive epsilon")
        if self.mode == "sumst_stochastic_universal" and self.D is None:
            raise ConfigError("sumst_stochastic_universal requires the variance bound D")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ConfigError("epsilon must be positive when given")
        if self.L0 <= 0:
            raise ConfigError("L0 must be positive")
        if self.mu < 0:
            raise ConfigError("mu must be nonnegative")
        if self.omega_tilde < 1.0:
            raise ConfigError("omega_tilde must be >= 1")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.max_backtracks_per_iter < 1:
            raise ConfigError("max_backtracks_per_iter must be >= 1")
        if self.stopping.kind == "certified_gap" and self.epsilon is None:
            raise ConfigError("certified_gap stopping needs config.epsilon as its target")

    @property
    def mu_tilde(self) -> float:
        return self.mu / self.omega_tilde

    @property
    def slack_factor(self) -> float:
        """Accumulated-slack coefficient c: per-trial slack is c*eps*alpha/A."""
        if self.mode == "umst_universal":
            return 0.5
        if self.mode == "sumst_stochastic_universal":
            return 1.5
        if self.mode == "amst_adaptive" and self.epsilon is not None:
            return 1.0
        return 0.0


@dataclass
class SolverState:
    k: int
    A: float
    alpha: float
    u: np.ndarray
    x: np.ndarray
    y: np.ndarray
    phi: EstimateFunction
    L_trial: float
    j: int
    m: int
    mu_tilde: float
    counters: EvalCounter
    trace: Trace


@dataclass
class RunReport:
    final_x: np.ndarray
    iterations: int
    total_f_calls: int
    total_grad_calls: int
    total_stoch_calls: int
    trace: Trace
    certified_gap: float | None = None


def alpha_next(L: float, A_k: float, mu_tilde: float) -> tuple[float, float]:
    """Positive root of L*a^2 - (1+A_k*mu~)*a - A_k*(1+A_k*mu~) = 0 and A_{k+1}.

    Written as b*(1 + sqrt(1 + 4*L*A_k/b))/(2L) with b = 1 + A_k*mu~ so the
    radical never overflows even when A_k is near the 1e300 guard.  The
    defining identity A_{k+1}*(1+A_k*mu~) = L*alpha^2 is re-checked on every
    call at 1e-12 relative.
    """
    b = 1.0 + A_k * mu_tilde
    alpha = b * (1.0 + math.sqrt(1.0 + 4.0 * L * A_k / b)) / (2.0 * L)
    a_next = A_k + alpha
    if not (math.isfinite(alpha) and math.isfinite(a_next)):
        raise CoefficientOverflow("coefficient recursion left double range")
    # identity check in overflow-safe ratio form: (A_next/alpha)*(b/alpha) == L
    drift = abs((a_next / alpha) * (b / alpha) - L)
    if drift > 1e-12 * max(1.0, L):
        raise CoefficientOverflow(f"coefficient identity drifted by {drift:.3e}")
    return alpha, a_next


def fold_estimate(phi: EstimateFunction, alpha: float, y: np.ndarray, g: np.ndarray,
                  f_y: float, mu_tilde: float, setup: ProxSetup) -> EstimateFunction:
    """phi + alpha*[f_y + <g, x-y> + mu~*V(x,y) + h(x)] in canonical form."""
    gd = setup.d_grad(y)
    d_scale = phi.d_scale + alpha * mu_tilde
    linear = phi.linear + alpha * (g - mu_tilde * gd)
    constant = (phi.constant + alpha * (f_y - float(np.dot(g, y)))
                + alpha * mu_tilde * (-setup.d_value(y) + float(np.dot(gd, y))))
    return EstimateFunction(d_scale=d_scale, linear=linear,
                            h_scale=phi.h_scale + alpha, constant=constant)


def descent_check(f_y: float, g_dot_dx: float, dx_norm_sq: float,
                  L_trial: float, slack: float, f_x_new: float) -> bool:
    return f_y + g_dot_dx + 0.5 * L_trial * dx_norm_sq + slack >= f_x_new


def batch_size(D: float, A_next: float, alpha: float, L_trial: float, epsilon: float) -> int:
    """ceil(2*D*A_{k+1} / (L_trial * alpha_{k+1} * eps)), clamped to >= 1."""
    if D is None or epsilon is None:
        raise ConfigError("batch size needs both D and epsilon")
    if D == 0.0:
        return 1
    return max(1, math.ceil(2.0 * D * A_next / (L_trial * alpha * epsilon)))


class StepCandidate(NamedTuple):
    y_next: np.ndarray
    u_next: np.ndarray
    x_next: np.ndarray
    alpha: float
    A_next: float
    phi_next: EstimateFunction
    f_y: float
    g: np.ndarray
    m: int


def _base_objective(objective) -> CompositeObjective:
    if isinstance(objective, StochasticGradientOracle):
        return objective.base
    return objective


def _candidate(state: SolverState, objective, setup: ProxSetup, L_for_step: float,
               gradient_fn) -> StepCandidate:
    """One trial: coefficients, query point, fold, prox, interpolation."""
    obj = _base_objective(objective)
    alpha, a_next = alpha_next(L_for_step, state.A, state.mu_tilde)
    y = (alpha * state.u + state.A * state.x) / a_next
    f_y = value(obj, y, state.counters)
    g, m = gradient_fn(y)
    phi = fold_estimate(state.phi, alpha, y, g, f_y, state.mu_tilde, setup)
    u = composite_prox_solve(setup, phi, obj.h)
    x = (alpha * u + state.A * state.x) / a_next
    return StepCandidate(y, u, x, alpha, a_next, phi, f_y, g, m)


def mst_step(state: SolverState, objective, setup: ProxSetup, L_for_step: float) -> StepCandidate:
    """Deterministic candidate triple for the exact-L step (counts 1 f + 1 grad)."""
    obj = _base_objective(objective)

    def gradient_fn(y):
        return grad(obj, y, state.counters), 1

    return _candidate(state, objective, setup, L_for_step, gradient_fn)


def _accept(state: SolverState, cand: StepCandidate, L_trial: float, j: int) -> SolverState:
    return replace(state, k=state.k + 1, A=cand.A_next, alpha=cand.alpha,
                   u=cand.u_next, x=cand.x_next, y=cand.y_next, phi=cand.phi_next,
                   L_trial=L_trial, j=j, m=cand.m)


def backtrack_iteration(state: SolverState, objective, setup: ProxSetup,
                        config: SolverConfig, rng) -> SolverState:
    """One accepted adaptive iteration: doubles L_trial until the slack descent
    check passes, recomputing the whole candidate (and, in sumst, drawing a
    fresh mini-batch) at every trial.  Warm-starts at half the last accepted L."""
    obj = _base_objective(objective)
    stochastic = config.mode == "sumst_stochastic_universal"
    seed = 0 if rng is None else int(rng)
    eps = config.epsilon
    factor = config.slack_factor
    L_trial = state.L_trial / 2.0
    j = 0
    while True:
        if stochastic:
            def gradient_fn(y, _j=j, _L=L_trial):
                alpha, a_next = alpha_next(_L, state.A, state.mu_tilde)
                m = batch_size(config.D, a_next, alpha, _L, eps)
                stream = substream(seed, state.k + 1, _j)
                return minibatch_gradient(objective, y, m, stream, state.counters), m
        else:
            def gradient_fn(y):
                return grad(obj, y, state.counters), 1
        cand = _candidate(state, objective, setup, L_trial, gradient_fn)
        f_x = value(obj, cand.x_next, state.counters)
        dx = cand.x_next - cand.y_next
        slack = 0.0 if factor == 0.0 else factor * eps * cand.alpha / cand.A_next
        if descent_check(cand.f_y, float(np.dot(cand.g, dx)),
                         setup.norms.primal(dx) ** 2, L_trial, slack, f_x):
            return _accept(state, cand, L_trial, j)
        j += 1
        if j > config.max_backtracks_per_iter:
            raise BacktrackLimitExceeded(
                f"no acceptable L after {config.max_backtracks_per_iter} doublings at k={state.k + 1}")
        L_trial *= 2.0


def init_phase(objective, setup: ProxSetup, config: SolverConfig, rng=None) -> SolverState:
    """k=0 state: x0 = u0 = argmin phi_0 with alpha_0 = A_0 = 1/L, where L is
    L_known (exact mode) or the doubled trial constant (adaptive modes, slack
    ratio alpha_0/A_0 = 1).  f(y0) and the exact gradient at y0 are evaluated
    once and reused across trials; only f(x0) is recomputed per trial."""
    config.validate()
    obj = _base_objective(objective)
    stochastic = config.mode == "sumst_stochastic_universal"
    if stochastic and not isinstance(objective, StochasticGradientOracle):
        raise ConfigError("sumst mode needs a StochasticGradientOracle")
    seed = 0 if rng is None else int(rng)
    mu_tilde = config.mu_tilde
    counters = EvalCounter()
    y0 = setup.center
    phi_base = initial_estimate(setup)
    f0 = value(obj, y0, counters)

    if config.mode == "mst_exact_L":
        L_trial = config.L_known
        g0 = grad(obj, y0, counters)
        alpha0 = 1.0 / L_trial
        phi0 = fold_estimate(phi_base, alpha0, y0, g0, f0, mu_tilde, setup)
        u0 = composite_prox_solve(setup, phi0, obj.h)
        return SolverState(k=0, A=alpha0, alpha=alpha0, u=u0, x=u0, y=y0, phi=phi0,
                           L_trial=L_trial, j=0, m=1, mu_tilde=mu_tilde,
                           counters=counters, trace=Trace())

    g0_exact = None if stochastic else grad(obj, y0, counters)
    slack0 = config.slack_factor * (config.epsilon or 0.0)
    L_trial = config.L0
    j = 0
    while True:
        alpha0 = 1.0 / L_trial
        if stochastic:
            m0 = batch_size(config.D, alpha0, alpha0, L_trial, config.epsilon)
            g0 = minibatch_gradient(objective, y0, m0, substream(seed, 0, j), counters)
        else:
            g0, m0 = g0_exact, 1
        phi0 = fold_estimate(phi_base, alpha0, y0, g0, f0, mu_tilde, setup)
        u0 = composite_prox_solve(setup, phi0, obj.h)
        f_x0 = value(obj, u0, counters)
        dx = u0 - y0
        if descent_check(f0, float(np.dot(g0, dx)), setup.norms.primal(dx) ** 2,
                         L_trial, slack0, f_x0):
            return SolverState(k=0, A=alpha0, alpha=alpha0, u=u0, x=u0, y=y0, phi=phi0,
                               L_trial=L_trial, j=j, m=m0, mu_tilde=mu_tilde,
                               counters=counters, trace=Trace())
        j += 1
        if j > config.max_backtracks_per_iter:
            raise BacktrackLimitExceeded(
                f"no acceptable L0 after {config.max_backtracks_per_iter} doublings at k=0")
        L_trial *= 2.0


def gradient_mapping_residual(objective, setup: ProxSetup, x: np.ndarray, L: float,
                              counter: EvalCounter | None = None) -> float:
    """Primal-norm distance from x to the minimizer of the local composite model
    <grad f(x), z-x> + (L/2)||z-x||^2 + h(z) over Q; 0 iff x is stationary.

    Defined for the euclidean geometry; the entropy setup has no norm-squared
    model and raises UnsupportedGeometry (via the prox dispatch)."""
    if L <= 0:
        raise ConfigError("gradient mapping needs L > 0")
    obj = _base_objective(objective)
    if setup.geometry != "euclidean":
        from .errors import UnsupportedGeometry
        raise UnsupportedGeometry("gradient mapping residual is defined for the euclidean geometry")
    g = grad(obj, x, counter)
    # (L/2)||z-x||^2 = L*d(z) + L*<y0-x, z> + const with d(z) = 1/2||z-y0||^2
    model = EstimateFunction(d_scale=L, linear=g + L * (setup.center - x),
                             h_scale=1.0, constant=0.0)
    z = composite_prox_solve(setup, model, obj.h)
    return setup.norms.primal(x - z)


def _certified_bound(config: SolverConfig, A: float) -> float | None:
    r_sq = config.stopping.r_sq
    if r_sq is None:
        return None
    return r_sq / A + config.slack_factor * (config.epsilon or 0.0)


def _certified_target(config: SolverConfig) -> float:
    # total-budget reading: plain modes certify eps; the eps-slack modes
    # (amst-with-eps, sumst) certify 2*eps
    if config.mode in ("amst_adaptive", "sumst_stochastic_universal"):
        return 2.0 * config.epsilon
    return config.epsilon


def _should_stop(state: SolverState, objective, setup: ProxSetup, config: SolverConfig) -> bool:
    rule = config.stopping
    if rule.kind == "iterations_only":
        return False
    if rule.kind == "certified_gap":
        return _certified_bound(config, state.A) <= _certified_target(config)
    residual = gradient_mapping_residual(objective, setup, state.x, state.L_trial,
                                         state.counters)
    return residual <= rule.threshold


def _record_row(state: SolverState, objective, setup: ProxSetup, config: SolverConfig) -> None:
    obj = _base_objective(objective)
    counters = state.counters
    row = {
        "k": state.k, "A": state.A, "alpha": state.alpha, "L_trial": state.L_trial,
        "j": state.j, "m": state.m, "cum_f": counters.f_calls,
        "cum_grad": counters.grad_calls, "cum_stoch": counters.stochastic_grad_calls,
    }
    # observer quantities below are uncounted: they are evidence, not method work
    f_x = obj.composite_value(state.x)
    phi_at_u = estimate_value(setup, state.phi, obj.h, state.u)
    slack_abs = state.A * config.slack_factor * (config.epsilon or 0.0)
    row["cert_margin"] = phi_at_u + slack_abs - state.A * f_x
    if obj.known_optimum is not None:
        x_star, f_star = obj.known_optimum
        row["gap"] = f_x - f_star
        row["gap_y"] = obj.composite_value(state.y) - f_star
        if x_star is not None:
            row["dist_u_sq"] = setup.norms.primal(state.u - x_star) ** 2
            row["dist_x_sq"] = setup.norms.primal(state.x - x_star) ** 2
            row["dist_y_sq"] = setup.norms.primal(state.y - x_star) ** 2
        else:
            row["dist_u_sq"] = row["dist_x_sq"] = row["dist_y_sq"] = math.nan
    else:
        row["gap"] = math.nan
        row["gap_y"] = math.nan
        row["dist_u_sq"] = row["dist_x_sq"] = row["dist_y_sq"] = math.nan
    state.trace.append(**row)


def run(objective, setup: ProxSetup, config: SolverConfig, rng=None) -> RunReport:
    """Run the configured mode until its stopping rule fires or max_iters
    accepted iterates (including k=0) are recorded."""
    state = init_phase(objective, setup, config, rng)
    state.trace.meta["x0_y0_sq"] = setup.norms.primal(state.x - setup.center) ** 2
    _record_row(state, objective, setup, config)
    while len(state.trace) < config.max_iters:
        if _should_stop(state, objective, setup, config):
            break
        if config.mode == "mst_exact_L":
            cand = mst_step(state, objective, setup, config.L_known)
            state = _accept(state, cand, config.L_known, 0)
        else:
            state = backtrack_iteration(state, objective, setup, config, rng)
        if not math.isfinite(state.A) or state.A > A_OVERFLOW_LIMIT:
            raise CoefficientOverflow(f"A_k = {state.A:.3e} past the 1e300 guard at k={state.k}")
        _record_row(state, objective, setup, config)
    counters = state.counters
    return RunReport(final_x=state.x, iterations=state.k,
                     total_f_calls=counters.f_calls,
                     total_grad_calls=counters.grad_calls,
                     total_stoch_calls=counters.stochastic_grad_calls,
                     trace=state.trace,
                     certified_gap=_certified_bound(config, state.A))
