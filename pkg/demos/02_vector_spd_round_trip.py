"""The coupled two-interval problem chi Theta H phi = psi, solved directly.

A random sqrt-vanishing phi0 is pushed through the forward map; the Nystrom
solver recovers it together with the shift vector c and the solve
diagnostics (smallest singular value, linear residual, second range
condition residual).
"""

import numpy as np

from mifht import (
    ThetaMatrix,
    compute_c,
    compute_nu,
    forward_map,
    make_interval_system,
    random_sqrt_vanishing,
    residual_range2,
    solve_phi,
)

sys2 = make_interval_system([(-2.0, -1.0), (1.0, 2.0)])
theta = ThetaMatrix([[1.0, 0.5], [0.5, 1.0]])
print("interaction matrix classification:", theta.classification)

phi0 = random_sqrt_vanishing(sys2, modes=20, seed=42)
psi = forward_map(theta, phi0)
print("c[psi] =", np.round(compute_c(psi), 8))

res = solve_phi(theta, psi, size=96)
x = np.concatenate([sys2.from_unit(j, np.linspace(-0.95, 0.95, 25))
                    for j in range(2)])
err = np.max(np.abs(res.phi(x) - phi0(x))) / np.max(np.abs(phi0(x)))
print(f"round-trip relative error: {err:.2e}")
print(f"sigma_min(Id - K) = {res.diagnostics['sigma_min']:.6f}")
print(f"linear residual   = {res.diagnostics['residual']:.2e}")
print(f"range2 residual   = {np.max(np.abs(res.diagnostics['range2_residual'])):.2e}")

# the modified right-hand side nu = H^{-1} Theta_d^{-1} (psi - c)
nu = compute_nu(psi, res.c, theta)
print("\n||nu|| =", round(nu.norm2(), 6), " (sqrt-vanishing on each interval)")

# a diagonal interaction decouples into two single-interval problems
diag = ThetaMatrix([[2.0, 0.0], [0.0, 3.0]])
psid = forward_map(diag, phi0)
resd = solve_phi(diag, psid, size=48)
errd = np.max(np.abs(resd.phi(x) - phi0(x)))
print(f"\ndiagonal theta: round-trip error {errd:.2e}, "
      f"sigma_min = {resd.diagnostics['sigma_min']:.1f} (identity system)")

# the second necessary condition evaluated for an arbitrary candidate
r = residual_range2(theta, phi0, compute_c(psi))
print("range2 residual of the true solution:", np.round(np.abs(r), 10))
