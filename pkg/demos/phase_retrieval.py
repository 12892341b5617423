"""
Real phase retrieval as robust regression
=========================================

From magnitudes y_i = |a_i^T x*| we flip rows so that y = A x* holds on a set
of "positive" rows and fails on the rest. Whichever sign class is smaller
plays the role of the outliers, so l_p regression recovers x* up to sign.
Here m = 2n - 1, the minimum number of real measurements.
"""

import numpy as np

from lpirls import gen_rpr, phase_retrieval_pipeline

n, m = 200, 399
for num_pos in (40, 70, 100, 150, 190):
    wins, errs = 0, []
    for seed in range(10):
        inst = gen_rpr(m, n, num_pos, seed=seed)
        _, err = phase_retrieval_pipeline(inst, p=0.1)
        errs.append(err)
        wins += err < 1e-5
    print(f"|I+| = {num_pos:3d}: success {wins}/10, median error {np.median(errs):.1e}")

# Recovery works while one sign class is clearly smaller than the other and
# breaks down as the two approach m/2.

## p matters: l_1 needs far fewer outliers than p = 0.1
inst = gen_rpr(m, n, 70, seed=0)
for p in (1.0, 0.5, 0.1):
    _, err = phase_retrieval_pipeline(inst, p=p)
    print(f"p={p}: error up to sign {err:.1e}")
