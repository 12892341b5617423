"""
Restoring an image corrupted by salt-and-pepper noise
=====================================================

Images of one object under changing light lie near a low-dimensional
subspace. Regressing a corrupted image on the clean remaining images with
p = 0.1 ignores the corrupted pixels. A synthetic nonnegative rank-5 matrix
stands in for a stack of face images; any matrix can be substituted via
``lpirls.io.read_matrix``.
"""

import numpy as np

from lpirls import restoration_pipeline, synthetic_face_matrix

faces = synthetic_face_matrix(m=500, n=60, rank=5, seed=0)
print("images:", faces.shape[1], "pixels:", faces.shape[0])

print("ratio   IRLS_0.1   least squares   least squares on clean image")
for ratio in (0.1, 0.3, 0.5, 0.7):
    errs = [restoration_pipeline(faces, 0, ratio, p=0.1, seed=3, method=m)[1]
            for m in ("irls", "ls", "ls_star")]
    print(f"{ratio:4.1f}   {errs[0]:.2e}   {errs[1]:.2e}        {errs[2]:.2e}")

## Approximately low-rank data
rng = np.random.default_rng(4)
noisy_faces = np.clip(faces + 0.01 * rng.standard_normal(faces.shape), 0.0, 1.0)
for method in ("irls", "ls"):
    _, err = restoration_pipeline(noisy_faces, 0, 0.3, p=0.1, seed=3, method=method)
    print(f"noisy stack, {method}: {err:.3e}")
