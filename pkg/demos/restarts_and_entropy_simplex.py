"""Restart halving on a strongly convex problem, and the entropy geometry.

Part one runs the distance-halving restart scheme on a strongly convex
quadratic and prints the certified halving schedule against the measured gap
at each restart boundary.  Part two minimizes a linear function over the
probability simplex under the entropy prox-function, where each step is a
softmax with no projection, and checks the iterate distance bounds in the
l1 norm.

Usage: python demos/restarts_and_entropy_simplex.py [--restarts 8]
"""

import argparse

import numpy as np

from triangle_opt import (SolverConfig, bregman_divergence, check_bounds,
                          inner_iterations, make_problem, restart_run, run)


def restart_part(n_restarts):
    problem = make_problem("quadratic", dimension=10, seed=1, lam_min=0.1)
    big_l = problem.objective.smoothness_meta["L"]
    mu = problem.objective.smoothness_meta["mu"]
    n_bar = inner_iterations(big_l, mu, 1.0)
    print(f"restart scheme: L = {big_l:g}, mu = {mu:g}, "
          f"{n_bar} inner iterations per restart")

    report = restart_run(problem.objective, problem.setup, L=big_l, mu=mu,
                         omega=1.0, K=n_restarts)
    dist0 = report.trace.meta["y0_dist_sq"]
    print(f"{'restart':>8} {'gap':>12} {'bound':>12}")
    for k, gap in zip(report.trace.column("k").astype(int),
                      report.trace.column("gap")):
        print(f"{k:>8d} {gap:>12.3e} {mu * dist0 / 2.0 ** (k + 1):>12.3e}")
    check = check_bounds(report.trace, "t5_halving", {})
    print(f"t5_halving: {'pass' if check.passed else 'FAIL'} "
          f"(worst margin {check.worst_margin:.3e})")


def entropy_part():
    problem = make_problem("simplex_linear", dimension=6, seed=0)
    costs = problem.data["costs"]
    x_star, f_star = problem.objective.known_optimum
    r_sq = bregman_divergence(problem.setup, x_star, problem.setup.center)
    print(f"\nlinear costs on the simplex: best vertex {int(np.argmin(costs))}, "
          f"F* = {f_star:.4f}, R^2 = KL(x*, uniform) = {r_sq:.4f}")

    config = SolverConfig(mode="mst_exact_L", L_known=1.0, max_iters=200)
    report = run(problem.objective, problem.setup, config)
    trace = report.trace
    print(f"{'k':>5} {'gap':>11} {'||x-x*||_1^2':>13}")
    for mark in (0, 5, 20, 50, 100, 199):
        print(f"{int(trace.column('k')[mark]):>5d} {trace.column('gap')[mark]:>11.3e} "
              f"{trace.column('dist_x_sq')[mark]:>13.3e}")
    check = check_bounds(trace, "c1", {"R2": r_sq})
    print(f"c1 distance bounds: {'pass' if check.passed else 'FAIL'} "
          f"(worst margin {check.worst_margin:.3e})")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--restarts", type=int, default=8)
    args = parser.parse_args()
    restart_part(args.restarts)
    entropy_part()


if __name__ == "__main__":
    main()
