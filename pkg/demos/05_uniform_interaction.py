"""All-ones interaction: diagonalizing the multi-interval transform.

The change of variables built from the endpoint polynomials turns each
interval into a copy of the line; the Bezout-matrix eigenvectors mix the
channels into a frame where the transform is convolution with
1/(pi sinh), i.e. the Fourier multiplier i tanh(pi lambda / 2).  Inversion
divides by the multiplier; constants are the textbook out-of-range case.
"""

import numpy as np

from mifht import (
    PiecewiseFunction,
    build_M,
    build_spectral_data,
    fht_forward,
    make_interval_system,
    phi_inverse,
    random_sqrt_vanishing,
    uniform_forward,
    uniform_invert,
    uniform_range_check,
)
from mifht.uniform import TGrid, apply_T

grid = TGrid(npoints=4096, dt=1.0 / 64.0)

# one interval first: everything has closed forms
s1 = make_interval_system([(-1.0, 1.0)])
sd1 = build_spectral_data(s1)
print("n=1 Bezout matrix:", sd1.bezout.ravel(), " eigenvalue:", sd1.rho)
print("phi^{-1}(2t) at t=1:", phi_inverse(sd1, 0, 1.0), " (= -tanh 1)")

one = PiecewiseFunction.from_callable(s1, lambda x: np.ones_like(x), N=6)
cv = apply_T(sd1, one, grid)
print("channel of f=1 equals sech(t): max dev",
      f"{np.max(np.abs(cv.data[0] - 1 / np.cosh(grid.t))):.2e}")

f1 = PiecewiseFunction.from_callable(s1, lambda x: np.sqrt(1 - x * x),
                                     N=8, weighted=True)
g1 = uniform_forward(sd1, f1, grid)
xs = np.linspace(-0.9, 0.9, 5)
print("forward of the weight vs -x:", np.round(g1(xs) + xs, 12))

# two intervals: the mixing matrix is orthogonal pointwise in t
s2 = make_interval_system([(-2.0, -1.0), (1.0, 2.0)])
sd2 = build_spectral_data(s2)
M = build_M(sd2, np.linspace(-6, 6, 25))
dev = np.max(np.abs(np.einsum("pji,pjk->pik", M, M) - np.eye(2)))
print(f"\nn=2 mixing matrix orthogonality: {dev:.2e}")

f2 = random_sqrt_vanishing(s2, modes=14, seed=3)
g2 = uniform_forward(sd2, f2, grid)
x2 = np.concatenate([s2.from_unit(j, np.linspace(-0.9, 0.9, 9)) for j in range(2)])

# cross-check against the per-interval Cauchy integrals
direct = sum(fht_forward(f2, x2, j=j) for j in range(2))
print(f"diagonalized forward vs direct sum of transforms: "
      f"{np.max(np.abs(g2(x2) - np.real(direct))):.2e}")

back = uniform_invert(sd2, g2, grid)
print(f"round trip error: {np.max(np.abs(back(x2) - f2(x2))):.2e}")

# range check: forward images pass, constants fail
one2 = PiecewiseFunction.from_callable(s2, lambda x: np.ones_like(x), N=6)
print("\nrange check on a forward image:", uniform_range_check(sd2, g2, grid)["pass"])
verdict = uniform_range_check(sd2, one2, grid)
print("range check on the constant 1 :", verdict["pass"],
      " (dc energy", np.round(verdict["dc_energy"], 3), ")")
