"""Prox-function geometry: norms, feasible sets, Bregman divergences, and the
canonical estimate function with its closed-form composite prox step.

Two geometries are supported: euclidean, d(x) = 1/2 ||x - y0||_2^2 over free
space, boxes, euclidean balls, or the simplex; and entropy, d(x) = sum_i x_i
ln x_i + ln n over the simplex with the uniform point as center.  Estimate
functions are kept in the canonical form

    phi(x) = d_scale * d(x) + <linear, x> + h_scale * h(x) + constant

so that folding in a new linearization is O(n) and the prox step is a single
closed-form solve.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, UnsupportedGeometry

_LOG_FLOOR = 1e-300  # clamp before logs on the simplex


@dataclass(frozen=True)
class NormPair:
    """A primal norm together with its dual."""

    tag: str  # "euclidean" or "l1_linf"

    def primal(self, v: np.ndarray) -> float:
        if self.tag == "euclidean":
            return float(np.linalg.norm(v))
        return float(np.sum(np.abs(v)))

    def dual(self, v: np.ndarray) -> float:
        if self.tag == "euclidean":
            return float(np.linalg.norm(v))
        return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass(frozen=True)
class FeasibleSet:
    """Constraint set Q. kind is one of free_space, box, simplex, euclidean_ball."""

    kind: str
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    ball_center: np.ndarray | None = None
    radius: float | None = None

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        if self.kind == "free_space":
            return True
        if self.kind == "box":
            return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))
        if self.kind == "simplex":
            return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - 1.0) <= tol)
        if self.kind == "euclidean_ball":
            return float(np.linalg.norm(x - self.ball_center)) <= self.radius + tol
        raise UnsupportedGeometry(f"unknown feasible set kind {self.kind!r}")


def free_space() -> FeasibleSet:
    return FeasibleSet(kind="free_space")


def box(lower, upper) -> FeasibleSet:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or np.any(lower > upper):
        raise DomainError("box bounds must satisfy lower <= upper componentwise")
    return FeasibleSet(kind="box", lower=lower, upper=upper)


def simplex() -> FeasibleSet:
    return FeasibleSet(kind="simplex")


def euclidean_ball(center, radius: float) -> FeasibleSet:
    if radius <= 0:
        raise DomainError("ball radius must be positive")
    return FeasibleSet(kind="euclidean_ball", ball_center=np.asarray(center, dtype=float), radius=float(radius))


@dataclass(frozen=True)
class ProxSetup:
    """A prox geometry: norms, center y0, prox-function d, and feasible set Q.

    d is 1-strongly convex in the primal norm with d(center) = 0; omega_tilde
    and omega are the user-supplied constants comparing V to the squared norm
    (both 1 in the euclidean setup).
    """

    geometry: str  # "euclidean" or "entropy"
    norms: NormPair
    center: np.ndarray
    feasible_set: FeasibleSet
    omega_tilde: float = 1.0
    omega: float = 1.0

    def d_value(self, x: np.ndarray) -> float:
        if self.geometry == "euclidean":
            diff = x - self.center
            return 0.5 * float(np.dot(diff, diff))
        return float(np.sum(_xlogx(x)) + np.log(x.size))

    def d_grad(self, x: np.ndarray) -> np.ndarray:
        if self.geometry == "euclidean":
            return x - self.center
        if np.any(x <= 0.0):
            raise DomainError("entropy gradient undefined at a boundary point")
        return np.log(x) + 1.0


def _xlogx(x: np.ndarray) -> np.ndarray:
    safe = np.maximum(x, _LOG_FLOOR)
    return np.where(x > 0.0, x * np.log(safe), 0.0)


def euclidean_setup(center, feasible_set: FeasibleSet | None = None,
                    omega_tilde: float = 1.0, omega: float = 1.0) -> ProxSetup:
    center = np.asarray(center, dtype=float)
    fs = feasible_set if feasible_set is not None else free_space()
    if omega_tilde < 1.0 or omega < 1.0:
        raise DomainError("omega constants must be >= 1")
    return ProxSetup(geometry="euclidean", norms=NormPair("euclidean"), center=center,
                     feasible_set=fs, omega_tilde=float(omega_tilde), omega=float(omega))


def entropy_setup(dimension: int, omega_tilde: float = 1.0, omega: float = 1.0) -> ProxSetup:
    if dimension < 2:
        raise DomainError("entropy setup needs dimension >= 2")
    if omega_tilde < 1.0 or omega < 1.0:
        raise DomainError("omega constants must be >= 1")
    center = np.full(dimension, 1.0 / dimension)
    return ProxSetup(geometry="entropy", norms=NormPair("l1_linf"), center=center,
                     feasible_set=simplex(), omega_tilde=float(omega_tilde), omega=float(omega))


def bregman_divergence(setup: ProxSetup, x: np.ndarray, z: np.ndarray) -> float:
    """V(x, z) = d(x) - d(z) - <grad d(z), x - z>, nonnegative for feasible points."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    gz = setup.d_grad(z)  # DomainError on the entropy boundary
    return float(setup.d_value(x) - setup.d_value(z) - np.dot(gz, x - z))


def _sample_feasible(setup: ProxSetup, rng: np.random.Generator, n_points: int) -> np.ndarray:
    n = setup.center.size
    fs = setup.feasible_set
    if fs.kind == "free_space":
        return setup.center + rng.standard_normal((n_points, n))
    if fs.kind == "box":
        return rng.uniform(fs.lower, fs.upper, size=(n_points, n))
    if fs.kind == "simplex":
        return rng.dirichlet(np.ones(n), size=n_points)
    if fs.kind == "euclidean_ball":
        direction = rng.standard_normal((n_points, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        scale = fs.radius * rng.random(n_points) ** (1.0 / n)
        return fs.ball_center + direction * scale[:, None]
    raise UnsupportedGeometry(f"cannot sample from feasible set {fs.kind!r}")


def strong_convexity_probe(setup: ProxSetup, rng_seed: int, n_pairs: int) -> float:
    """Max over sampled feasible pairs of 1/2 ||x - z||^2 - V(x, z).

    Values <= 0 confirm 1-strong convexity of d in the primal norm on the
    sample; a positive return is the worst violation found.
    """
    if n_pairs == 0:
        return 0.0
    rng = np.random.default_rng(rng_seed)
    xs = _sample_feasible(setup, rng, n_pairs)
    zs = _sample_feasible(setup, rng, n_pairs)
    worst = -np.inf
    for x, z in zip(xs, zs):
        gap = 0.5 * setup.norms.primal(x - z) ** 2 - bregman_divergence(setup, x, z)
        worst = max(worst, gap)
    return float(worst)


@dataclass
class SimpleTerm:
    """The simple composite term h: zero, lam * ||x||_1, or the indicator of Q."""

    kind: str = "zero"  # "zero", "l1", "indicator"
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "l1", "indicator"):
            raise DomainError(f"unknown composite term kind {self.kind!r}")
        if self.kind == "l1" and self.lam < 0:
            raise DomainError("l1 weight must be nonnegative")

    def value(self, x: np.ndarray) -> float:
        if self.kind == "l1":
            return self.lam * float(np.sum(np.abs(x)))
        # zero, or indicator evaluated at a feasible point
        return 0.0


@dataclass
class EstimateFunction:
    """Canonical accumulated lower model d_scale*d(x) + <linear,x> + h_scale*h(x) + constant."""

    d_scale: float
    linear: np.ndarray
    h_scale: float
    constant: float

    def copy(self) -> "EstimateFunction":
        return replace(self, linear=self.linear.copy())


def initial_estimate(setup: ProxSetup) -> EstimateFunction:
    """V(x, y0) in canonical form: the d_scale=1 base before any folds."""
    g0 = setup.d_grad(setup.center)
    const = -setup.d_value(setup.center) + float(np.dot(g0, setup.center))
    return EstimateFunction(d_scale=1.0, linear=-g0, h_scale=0.0, constant=const)


def estimate_value(setup: ProxSetup, phi: EstimateFunction, h: SimpleTerm, x: np.ndarray) -> float:
    return float(phi.d_scale * setup.d_value(x) + np.dot(phi.linear, x)
                 + phi.h_scale * h.value(x) + phi.constant)


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sorting construction)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _project_ball(v: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    diff = v - center
    nrm = float(np.linalg.norm(diff))
    if nrm <= radius:
        return v
    return center + diff * (radius / nrm)


def composite_prox_solve(setup: ProxSetup, phi: EstimateFunction, h: SimpleTerm) -> np.ndarray:
    """argmin over Q of d_scale*d(x) + <linear, x> + h_scale*h(x), in closed form.

    Raises UnsupportedGeometry when the (geometry, feasible set, h) combination
    has no implemented solver.
    """
    if phi.d_scale <= 0:
        raise DomainError("estimate function must keep d_scale > 0")
    fs = setup.feasible_set

    if setup.geometry == "entropy":
        if fs.kind != "simplex":
            raise UnsupportedGeometry("entropy prox is defined on the simplex only")
        # h = l1 is constant (= lam) on the simplex, so every supported h
        # reduces to the plain entropy-linear solve: x_i ~ exp(-linear_i/d_scale).
        w = -phi.linear / phi.d_scale
        w -= np.max(w)
        ex = np.exp(w)
        return ex / np.sum(ex)

    # euclidean: unconstrained smooth minimizer is center - linear/d_scale
    v = setup.center - phi.linear / phi.d_scale
    if h.kind == "l1" and phi.h_scale > 0.0 and h.lam > 0.0:
        if fs.kind in ("free_space", "box"):
            v = soft_threshold(v, phi.h_scale * h.lam / phi.d_scale)
        elif fs.kind == "simplex":
            pass  # ||x||_1 = 1 on the simplex: constant shift, same minimizer
        else:
            raise UnsupportedGeometry(f"l1 composite prox on {fs.kind!r} is not implemented")
    if fs.kind == "free_space":
        return v
    if fs.kind == "box":
        # 1-D convex pieces: clipping the componentwise minimizer is exact
        return np.clip(v, fs.lower, fs.upper)
    if fs.kind == "simplex":
        return project_to_simplex(v)
    if fs.kind == "euclidean_ball":
        return _project_ball(v, fs.ball_center, fs.radius)
    raise UnsupportedGeometry(f"no euclidean prox for feasible set {fs.kind!r}")


def recenter(setup: ProxSetup, new_center) -> ProxSetup:
    """Same geometry and feasible set with the prox-function centered at new_center."""
    if setup.geometry != "euclidean":
        raise UnsupportedGeometry("only the euclidean prox-function can be re-centered")
    new_center = np.asarray(new_center, dtype=float)
    if new_center.shape != setup.center.shape:
        raise DomainError("new center has wrong shape")
    return replace(setup, center=new_center)


__all__ = [
    "NormPair", "FeasibleSet", "free_space", "box", "simplex", "euclidean_ball",
    "ProxSetup", "euclidean_setup", "entropy_setup", "bregman_divergence",
    "strong_convexity_probe", "SimpleTerm", "EstimateFunction", "initial_estimate",
    "estimate_value", "soft_threshold", "project_to_simplex", "composite_prox_solve",
    "recenter",
]
