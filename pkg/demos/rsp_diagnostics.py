"""
Range space property and rate constants
=======================================

The recovery guarantees rest on one number: the worst ratio, over directions
d in range(A) and supports S of size k, of the l_p mass of d on S to its mass
off S. We compute it exactly for two columns, bound it from below by sampling
for more, and turn it into the constants of the convergence bounds.
"""

import numpy as np

from lpirls import IrlsConfig, gaussian_rsp_condition, gen_rr, global_linear_rate, irls_solve
from lpirls import local_rate_constants, rsp_exact, rsp_randomized_lower_bound

## Small cases by hand
print(rsp_exact(np.ones((3, 1)), 1.0, 1).eta)   # 0.5: span(1,1,1)
print(rsp_exact(np.ones((2, 1)), 1.0, 1).eta)   # 1.0: the property fails
print(rsp_exact(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), 1.0, 1).infinite)

## Exact constant for a Gaussian 15 x 2 matrix
a = np.random.default_rng(0).standard_normal((15, 2))
for k in (1, 2, 3):
    rep = {p: rsp_exact(a, p, k).eta for p in (1.0, 0.5, 0.1)}
    print(f"k={k}: " + "  ".join(f"p={p}: {eta:.3f}" for p, eta in rep.items()))
# smaller p never gives a larger constant; larger k never gives a smaller one

## Sampling gives a lower bound
exact = rsp_exact(a, 1.0, 2).eta
for n in (10, 1000, 100000):
    print(n, rsp_randomized_lower_bound(a, 1.0, 2, n, seed=1).eta, "<=", exact)

## Sample size that guarantees the property for Gaussian A
for k in (1, 5, 20):
    m = 10 + 2 * k
    while not gaussian_rsp_condition(m, 10, k, eta=0.5, delta=0.01):
        m += 1
    print(f"n=10, k={k}: m >= {m}")

## Constants of the rate bounds on a certified instance
inst = gen_rr(15, 2, 2, seed=1003)
eta = rsp_exact(inst.a_matrix, 1.0, 2).eta
print(f"eta = {eta:.3f}, l1 rate per iteration <= {global_linear_rate(eta, inst.m):.6f}")
for p in (0.0, 0.5):
    tc = local_rate_constants(inst, p, eta)
    print(f"p={p}: c={tc.c:.4f}  mu={tc.mu:.3f}  radius={tc.radius:.3e}")

## Quadratic convergence from inside the radius (p = 0)
tc = local_rate_constants(inst, 0.0, eta)
d = np.array([1.0, -1.0])
d *= 0.9 * tc.radius / np.abs(inst.a_matrix @ d).sum()
res = irls_solve(inst, IrlsConfig(p=0.0, init=inst.x_star + d))
for rec in res.trace:
    print(f"t={rec.t}  ||A(x - x*)||_1 = {np.abs(inst.a_matrix @ (rec.x - inst.x_star)).sum():.2e}")
