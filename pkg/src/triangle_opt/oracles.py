"""First-order oracles: exact value/gradient access with call counting,
stochastic gradients with bounded variance, mini-batch averaging, and the
finite-difference / Hölder validation probes used by the tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .prox_geometry import SimpleTerm


@dataclass
class EvalCounter:
    """Cumulative oracle call counts for one solver run."""

    f_calls: int = 0
    grad_calls: int = 0
    stochastic_grad_calls: int = 0


@dataclass
class CompositeObjective:
    """F = f + h with f accessed through value/grad oracles and h simple.

    known_optimum, when present, is (x_star, F_star); x_star may be None for
    problems where only the optimal value was precomputed.  smoothness_meta
    carries whatever constants are known: keys among "L", "mu", "L_nu", "nu".
    """

    smooth_value: callable
    smooth_grad: callable
    h: SimpleTerm = field(default_factory=SimpleTerm)
    known_optimum: tuple | None = None
    smoothness_meta: dict | None = None

    def composite_value(self, x: np.ndarray) -> float:
        """F(x) = f(x) + h(x), uncounted (observer use only)."""
        return float(self.smooth_value(x)) + self.h.value(x)


def value(obj: CompositeObjective, x: np.ndarray, counter: EvalCounter | None = None) -> float:
    """f(x), counted."""
    out = float(obj.smooth_value(x))
    if not np.isfinite(out):
        raise DomainError("objective value is not finite at the queried point")
    if counter is not None:
        counter.f_calls += 1
    return out


def grad(obj: CompositeObjective, x: np.ndarray, counter: EvalCounter | None = None) -> np.ndarray:
    """grad f(x), counted."""
    g = np.asarray(obj.smooth_grad(x), dtype=float)
    if not np.all(np.isfinite(g)):
        raise DomainError("gradient is not finite at the queried point")
    if counter is not None:
        counter.grad_calls += 1
    return g


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic gradient model: "none", "gaussian" (needs D), or "finite_sum"
    (components is a list of per-component gradient callables averaging to grad f)."""

    kind: str = "none"
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "finite_sum"):
            raise ConfigError(f"unknown noise model {self.kind!r}")
        if self.kind == "finite_sum" and len(self.components) == 0:
            raise ConfigError("finite_sum noise model needs at least one component")


@dataclass
class StochasticGradientOracle:
    base: CompositeObjective
    noise_model: NoiseModel = field(default_factory=NoiseModel)
    variance_bound: float | None = None  # D

    def __post_init__(self):
        if self.noise_model.kind == "gaussian" and self.variance_bound is None:
            raise ConfigError("gaussian noise model requires the variance bound D")
        if self.variance_bound is not None and self.variance_bound < 0:
            raise ConfigError("variance bound D must be nonnegative")


def substream(seed: int, iteration: int, draw_index: int) -> np.random.Generator:
    """Independent counter-based stream for (seed, iteration, draw index).

    Philox keyed through SeedSequence: bit-reproducible and collision-free
    across iterations and backtracking trials of one run.
    """
    ss = np.random.SeedSequence(entropy=(int(seed), int(iteration), int(draw_index)))
    return np.random.Generator(np.random.Philox(ss))


def _one_draw(oracle: StochasticGradientOracle, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    kind = oracle.noise_model.kind
    g = np.asarray(oracle.base.smooth_grad(x), dtype=float)
    if kind == "none":
        return g
    if kind == "gaussian":
        d_var = oracle.variance_bound
        if d_var == 0.0:
            return g
        # per-coordinate variance D/n so E||noise||_2^2 = D exactly
        return g + rng.standard_normal(x.size) * np.sqrt(d_var / x.size)
    idx = int(rng.integers(len(oracle.noise_model.components)))
    return np.asarray(oracle.noise_model.components[idx](x), dtype=float)


def sample_gradient(oracle: StochasticGradientOracle, x: np.ndarray,
                    rng: np.random.Generator, counter: EvalCounter | None = None) -> np.ndarray:
    """One unbiased stochastic gradient draw; stochastic counter += 1."""
    out = _one_draw(oracle, x, rng)
    if counter is not None:
        counter.stochastic_grad_calls += 1
    return out


def minibatch_gradient(oracle: StochasticGradientOracle, x: np.ndarray, m: int,
                       rng: np.random.Generator, counter: EvalCounter | None = None) -> np.ndarray:
    """Mean of m independent draws; stochastic counter += m.

    The average uses numpy's fixed-order pairwise reduction over the draw axis,
    so results are deterministic for a given stream and m=1 reproduces a single
    draw bit-for-bit.
    """
    if m < 1:
        raise ConfigError("mini-batch size must be >= 1")
    kind = oracle.noise_model.kind
    if kind == "gaussian":
        g = np.asarray(oracle.base.smooth_grad(x), dtype=float)
        d_var = oracle.variance_bound
        if d_var == 0.0:
            batch_mean = g
        else:
            noise = rng.standard_normal((m, x.size)) * np.sqrt(d_var / x.size)
            batch_mean = g + noise.mean(axis=0)
    elif kind == "finite_sum":
        idx = rng.integers(len(oracle.noise_model.components), size=m)
        draws = np.stack([np.asarray(oracle.noise_model.components[int(i)](x), dtype=float)
                          for i in idx])
        batch_mean = draws.mean(axis=0)
    else:
        batch_mean = np.asarray(oracle.base.smooth_grad(x), dtype=float)
    if counter is not None:
        counter.stochastic_grad_calls += int(m)
    return batch_mean


def finite_difference_gradient(obj: CompositeObjective, x: np.ndarray, step: float) -> np.ndarray:
    """Central differences per coordinate (validation oracle, uncounted)."""
    if step <= 0:
        raise ConfigError("finite-difference step must be positive")
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        out[i] = (obj.smooth_value(x + e) - obj.smooth_value(x - e)) / (2.0 * step)
    return out


def holder_probe(obj: CompositeObjective, dimension: int, n_pairs: int,
                 rng: np.random.Generator, nu_grid=(0.0, 0.25, 0.5, 0.75, 1.0),
                 dual_norm=None, radius: float = 1.0) -> dict:
    """Lower estimates of the Hölder constants: for each nu in the grid, the max
    over pairs sampled in a radius-ball of ||grad f(y) - grad f(x)||_* / ||y - x||^nu."""
    if dual_norm is None:
        dual_norm = lambda v: float(np.linalg.norm(v))
    estimates = {float(nu): 0.0 for nu in nu_grid}
    for _ in range(n_pairs):
        x = rng.standard_normal(dimension)
        x *= radius * rng.random() ** (1.0 / dimension) / np.linalg.norm(x)
        y = rng.standard_normal(dimension)
        y *= radius * rng.random() ** (1.0 / dimension) / np.linalg.norm(y)
        dist = float(np.linalg.norm(y - x))
        if dist == 0.0:
            continue
        dg = dual_norm(np.asarray(obj.smooth_grad(y)) - np.asarray(obj.smooth_grad(x)))
        for nu in estimates:
            estimates[nu] = max(estimates[nu], dg / dist ** nu)
    return estimates


__all__ = [
    "EvalCounter", "CompositeObjective", "value", "grad", "NoiseModel",
    "StochasticGradientOracle", "substream", "sample_gradient",
    "minibatch_gradient", "finite_difference_gradient", "holder_probe",
]
