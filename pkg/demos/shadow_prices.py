"""Hindsight optimum of a small instance and the prices that certify it.

Four items, three agents, Nash welfare.  The solver returns the optimal
time-averaged utilities u*, the dual prices beta* = grad log f(u*) and the
allocation plan.  Every item goes to the agents with the largest priced value
beta_i * v_i; the printout shows that rule holding item by item.

    python3 demos/shadow_prices.py [--p P]
"""
import argparse

import numpy as np

from fairalloc import SolveOptions, WelfareSpec, solve_hindsight

V = np.array([
    [0.9, 0.6, 0.1],
    [0.2, 0.8, 0.7],
    [0.5, 0.5, 0.5],
    [0.1, 0.3, 0.9],
])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.0, help="CES exponent, p < 1")
    args = ap.parse_args()

    spec = WelfareSpec.symmetric(V.shape[1], args.p)
    res = solve_hindsight(spec, V, SolveOptions(tol=1e-12))
    np.set_printoptions(precision=4, suppress=True)
    print(f"p = {args.p:g}   OPT = {res.welfare:.6f}   duality gap = {res.gap:.1e}")
    print("u*    =", res.u_star)
    print("beta* =", res.beta_star)
    print()
    print("item  values            priced values      plan")
    for t, v in enumerate(V):
        priced = res.beta_star * v
        print(f"{t:>4}  {v}  {priced}  {res.plan.x[t]}")
        # only the top priced agents may receive a share
        assert np.all(priced[res.plan.x[t] > 1e-9] >= priced.max() - 1e-7)
    print()
    print("split items:", int(np.sum(np.any((res.plan.x > 1e-9) & (res.plan.x < 1 - 1e-9), axis=1))),
          "(at most n - 1 in general)")


if __name__ == "__main__":
    main()
