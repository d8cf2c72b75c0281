"""Recompute the frozen reference optima for the zoo problems that have no
closed form (lasso, logistic).

For each canonical instance this runs a long adaptive solve, then polishes the
result to a certificate-quality stationary point:

* lasso: read the active set off the long run, solve the reduced normal
  equations with the l1 signs folded in, and verify the subgradient optimality
  conditions (|grad_i| <= lam on the inactive set, grad_i + lam*sign(x_i) = 0
  on the active set).
* logistic: full Newton iterations on the 8-dim problem down to float
  stationarity of the gradient.

The printed dictionary entries are the ones frozen in the zoo module; rerun
this script after any change to the instance generators and refresh them.

Usage: python demos/precompute_reference_optima.py
"""

import numpy as np

from triangle_opt import SolverConfig, StoppingRule, make_problem, run


def polish_lasso(problem, x_run):
    design = problem.data["design"]
    targets = problem.data["targets"]
    lam = problem.data["lam"]
    active = np.abs(x_run) > 1e-10
    signs = np.sign(x_run[active])
    a_s = design[:, active]
    x_hat = np.zeros_like(x_run)
    x_hat[active] = np.linalg.solve(a_s.T @ a_s, a_s.T @ targets - lam * signs)
    grad_full = design.T @ (design @ x_hat - targets)
    ok_active = np.max(np.abs(grad_full[active] + lam * np.sign(x_hat[active]))) < 1e-9
    ok_inactive = np.max(np.abs(grad_full[~active])) <= lam if np.any(~active) else True
    sign_stable = np.array_equal(np.sign(x_hat[active]), signs)
    if not (ok_active and ok_inactive and sign_stable):
        raise RuntimeError("lasso optimality conditions failed; rerun with more iterations")
    f_star = 0.5 * float(np.sum((design @ x_hat - targets) ** 2)) + lam * float(np.sum(np.abs(x_hat)))
    return x_hat, f_star


def polish_logistic(problem, x_run):
    design = problem.data["design"]
    labels = problem.data["labels"]
    n_rows = design.shape[0]
    x_hat = x_run.copy()
    for _ in range(60):
        t = -labels * (design @ x_hat)
        sig = 1.0 / (1.0 + np.exp(-t))
        g = design.T @ (-labels * sig) / n_rows
        w = sig * (1.0 - sig) / n_rows
        hess = design.T @ (w[:, None] * design)
        step = np.linalg.solve(hess, g)
        x_hat = x_hat - step
        if np.max(np.abs(g)) < 1e-15:
            break
    t = -labels * (design @ x_hat)
    sig = 1.0 / (1.0 + np.exp(-t))
    g = design.T @ (-labels * sig) / n_rows
    if np.max(np.abs(g)) > 1e-12:
        raise RuntimeError("logistic gradient not stationary; rerun with more iterations")
    f_star = float(np.mean(np.logaddexp(0.0, t)))
    return x_hat, f_star


def main():
    entries = {}

    stop = StoppingRule(kind="gradient_mapping", threshold=1e-11)

    lasso = make_problem("lasso")
    meta = lasso.objective.smoothness_meta
    cfg = SolverConfig(mode="amst_adaptive", L0=meta["L"], mu=meta["mu"], max_iters=2000,
                       stopping=stop)
    rep = run(lasso.objective, lasso.setup, cfg)
    x_hat, f_star = polish_lasso(lasso, rep.final_x)
    entries[("lasso", lasso.spec.dimension, lasso.spec.seed, lasso.data["lam"])] = (x_hat, f_star)

    logistic = make_problem("logistic")
    cfg = SolverConfig(mode="amst_adaptive", L0=logistic.objective.smoothness_meta["L"],
                       max_iters=2000, stopping=stop)
    rep = run(logistic.objective, logistic.setup, cfg)
    x_hat, f_star = polish_logistic(logistic, rep.final_x)
    entries[("logistic", logistic.spec.dimension, logistic.spec.seed)] = (x_hat, f_star)

    print("_FROZEN_OPTIMA = {")
    for key, (x_hat, f_star) in entries.items():
        coords = ",\n        ".join(f"{v:.17g}" for v in x_hat)
        print(f"    {key!r}: (np.array([")
        print(f"        {coords},")
        print(f"    ]), {f_star:.17g}),")
    print("}")


if __name__ == "__main__":
    main()
