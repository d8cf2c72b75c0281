"""Backtracking without knowing L: the adaptive and universal modes.

Part one starts the adaptive mode from a deliberately bad guess L0 = L/1024
and shows how the trial constant recovers within the guaranteed oracle budget
(about four value calls and two gradient calls per iteration plus a one-time
log2 recovery term).  Part two runs the universal mode on the norm-power
problem, whose gradient is only Holder continuous, across a grid of target
accuracies, and fits the iteration-count scaling law.

Usage: python demos/adaptive_and_universal.py [--iters 500]
"""

import argparse
import math

import numpy as np

from triangle_opt import (SolverConfig, StoppingRule, bregman_divergence,
                          check_bounds, make_problem, recenter, run)


def adaptive_part(iters):
    problem = make_problem("quadratic", dimension=20, seed=0, lam_min=0.9)
    big_l = problem.objective.smoothness_meta["L"]
    l0 = big_l / 1024.0
    config = SolverConfig(mode="amst_adaptive", L0=l0, max_iters=iters + 1)
    report = run(problem.objective, problem.setup, config)
    trace = report.trace

    print(f"adaptive mode from L0 = L/1024 = {l0:g} (true L = {big_l:g})")
    print(f"{'k':>5} {'L_trial':>10} {'j':>3} {'cum_f':>7} {'cum_grad':>9}")
    ks = trace.column("k").astype(int)
    for mark in (0, 1, 2, 3, 5, 10, 50, 200, iters):
        if mark < len(ks):
            print(f"{ks[mark]:>5d} {trace.column('L_trial')[mark]:>10.4f} "
                  f"{int(trace.column('j')[mark]):>3d} "
                  f"{int(trace.column('cum_f')[mark]):>7d} "
                  f"{int(trace.column('cum_grad')[mark]):>9d}")

    n_final = int(trace.last("k"))
    log_term = math.log2(2.0 * big_l / l0)
    print(f"totals at N = {n_final}: {report.total_f_calls} value calls "
          f"(budget {4 * n_final + log_term + 4:.0f}), {report.total_grad_calls} "
          f"gradient calls (budget {2 * n_final + log_term + 2:.0f})")
    check = check_bounds(trace, "t6_work", {"L": big_l})
    print(f"t6_work: {'pass' if check.passed else 'FAIL'}")


def universal_part():
    problem = make_problem("holder_norm_power", dimension=5, p=1.5)
    center = 10.0 * np.ones(5) / math.sqrt(5.0)
    setup = recenter(problem.setup, center)
    x_star = problem.objective.known_optimum[0]
    r_sq = bregman_divergence(setup, x_star, center)
    nu = problem.objective.smoothness_meta["nu"]

    print(f"\nuniversal mode on f(x) = (2/3)||x||^1.5 (nu = {nu:g}, R^2 = {r_sq:g})")
    print(f"{'epsilon':>10} {'iterations':>11} {'certified gap':>14}")
    points = []
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        config = SolverConfig(mode="umst_universal", epsilon=eps, max_iters=40_000,
                              stopping=StoppingRule(kind="certified_gap", r_sq=r_sq))
        report = run(problem.objective, setup, config)
        points.append((eps, report.iterations))
        print(f"{eps:>10g} {report.iterations:>11d} {report.certified_gap:>14.3e}")

    check = check_bounds(None, "t9_scaling", {"nu": nu, "points": points})
    slope = check.rows[0]["measured"]
    limit = 2.0 / (1.0 + 3.0 * nu) + 0.3
    print(f"log-log slope of N against 1/eps: {slope:.3f} "
          f"(limit {limit:.1f}, {'pass' if check.passed else 'FAIL'})")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=500,
                        help="iterations for the adaptive part")
    args = parser.parse_args()
    adaptive_part(args.iters)
    universal_part()


if __name__ == "__main__":
    main()
