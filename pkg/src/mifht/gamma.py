"""Riemann-Hilbert solution Gamma(z; lambda) built from the Fredholm solve.

The kernel of K is integrable: K(z, x) = f^t(z) g(x) / (2 pi i (x - z))
with the vectors

    f_j(z) = -2 R_{j+}(z) chi_j(z),
    g_m(x) = sum_{k != m} theta_mk / (theta_mm R_m(x)) chi_k(x),

which satisfy f^t(z) g(z) = 0 on I.  Solving (Id - K/lambda) F = f and
setting

    Gamma(z) = Id - int_I F(w) g^t(w) dw / (2 pi i lambda (w - z))

produces the unique solution of the matrix Riemann-Hilbert problem with
jump Gamma_+ = Gamma_- (Id - f g^t / lambda) on I and Gamma(inf) = Id.
The density F g^t is sqrt-vanishing on every interval, so Gamma and its
boundary values evaluate through the same exterior-coordinate series as
the single-interval transforms.  The resolvent kernel of K is

    R(z, x; lambda) = g^t(x) Gamma^{-1}(x) Gamma(z) f(z) / (2 pi i lambda (z - x)),

non-singular at z = x because of the orthogonality of f and g.
"""

from __future__ import annotations

import numpy as np

from . import chebyshev as cheb
from .chebyshev import PiecewiseFunction
from .errors import (
    CoincidenceError,
    DegenerateDiagonalError,
    EndpointError,
    NearSingularError,
    SymmetryError,
)
from .intervals import ABOVE, BELOW, IntervalSystem, joukowski_exterior
from .quadrature import chebyshev2_grid
from .solver import (
    NystromSystem,
    ThetaMatrix,
    as_theta,
    assemble_K,
    compute_c,
    compute_nu,
    _solve_refined,
)


class IntegrableKernelData:
    """The vector pair (f, g) of the integrable kernel, with evaluators.

    Note the -2 normalization of f against the 2/(2 pi i) of the kernel:
    f^t(z) g(x) / (2 pi i (z - x)) reproduces K(z, x) entrywise, which
    fixes the sign of f; audit against the kernel matrix, not the jump.
    """

    def __init__(self, sys: IntervalSystem, theta):
        theta = as_theta(theta)
        theta.require_invertible_diagonal()
        if theta.n != sys.n:
            raise ValueError("theta size does not match the interval system")
        self.sys = sys
        self.theta = theta

    def f_component(self, j, x):
        """f_j(x) = -2 R_{j+}(x) = -2 i w_j(x) for x in I_j."""
        return -2j * self.sys.weight(j, x)

    def g_matrix(self, k, x):
        """All components of g at points x inside I_k; shape (n, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        sys, th = self.sys, self.theta
        out = np.zeros((sys.n, x.size))
        for a in range(sys.n):
            if a == k:
                continue
            s = (x - sys.mid[a]) / sys.half[a]
            ra = sys.half[a] * np.sign(s) * np.sqrt(s * s - 1.0)
            out[a] = th[a, k] / (th[a, a] * ra)
        return out

    def f_vector(self, x):
        """Full f(x) as an n-vector for real x inside the system."""
        k = self.sys.locate(x)
        if k < 0:
            raise EndpointError("f is defined on the open intervals only")
        out = np.zeros(self.sys.n, dtype=complex)
        out[k] = self.f_component(k, x)
        return out

    def g_vector(self, x):
        k = self.sys.locate(x)
        if k < 0:
            raise EndpointError("g is defined on the open intervals only")
        return self.g_matrix(k, np.asarray([x]))[:, 0]

    def orthogonality_residual(self, points):
        """max |f^t(x) g(x)| over the points (structurally zero)."""
        vals = [abs(np.dot(self.f_vector(x), self.g_vector(x))) for x in points]
        return max(vals) if vals else 0.0


def build_kernel_vectors(sys: IntervalSystem, theta) -> IntegrableKernelData:
    kd = IntegrableKernelData(sys, theta)
    probe = np.concatenate([sys.from_unit(j, np.linspace(-0.9, 0.9, 5))
                            for j in range(sys.n)])
    res = kd.orthogonality_residual(probe)
    if res > 1e-12:
        raise AssertionError(f"f^t g should vanish on I, got {res:.3e}")
    return kd


def compute_F(nystrom: NystromSystem, kernel: IntegrableKernelData):
    """Solve (Id - K/lambda) F = f column-wise at the collocation nodes.

    Returns (smooth, values, residual): ``smooth[j]`` holds the smooth part
    F_j / w_l on every node of every interval l, ``values[j]`` the samples
    of F_j itself, and ``residual`` the linear-system defect.
    """
    ns = nystrom
    n, total = ns.sys.n, ns.size
    rhs = np.zeros((total, n), dtype=complex)
    for j in range(n):
        rhs[ns.offsets[j]: ns.offsets[j + 1], j] = -2j
    svals = np.linalg.svd(ns.matrix, compute_uv=False)
    if svals[-1] < 1e-12 * svals[0]:
        raise NearSingularError(
            f"Id - K/lambda numerically singular: sigma_min = {svals[-1]:.3e}")
    smooth = _solve_refined(ns.matrix.astype(complex), rhs).T  # (n, total)
    residual = float(np.max(np.abs(ns.matrix @ smooth.T - rhs)))
    wts = np.concatenate([ns.sys.weight(l, ns.grid.nodes[l]) for l in range(n)])
    values = smooth * wts[None, :]
    return smooth, values, residual


class GammaSolution:
    """Evaluator for Gamma(z; lambda), its boundary values and inverse.

    Stores, per interval l, the U-series of the smooth parts of the
    densities (F g^t)_{jm} = i w_l d_{jm}; the Cauchy integral of each
    density is then a geometric series in the exterior coordinate of I_l,
    valid on and off the cut (with a side selector on the cut).
    """

    def __init__(self, nystrom: NystromSystem, kernel: IntegrableKernelData,
                 nmodes=None):
        ns = nystrom
        self.sys = ns.sys
        self.theta = ns.theta
        self.lam = ns.lam
        self.kernel = kernel
        self.nystrom = ns
        n = self.sys.n
        if nmodes is None:
            nmodes = min(128, max(ns.grid.sizes))
        self.nmodes = nmodes

        smooth, values, self.f_residual = compute_F(ns, kernel)
        self.F_smooth_nodes = smooth

        # interpolate the smooth parts of F off the collocation grid and
        # assemble density coefficients D[l][j, m, :] with mu_jm = w_l * (i d)
        self.density = []
        for l in range(n):
            z = self.sys.from_unit(l, cheb.cheb2_nodes(nmodes))
            sig = np.zeros((n, nmodes), dtype=complex)
            for j in range(n):
                base = -2j if j == l else 0.0
                sig[j] = base + ns.kernel_apply_smooth(smooth[j], l, z) / ns.lam
            gmat = kernel.g_matrix(l, z)  # (n, nmodes), row l zero
            dmat = np.einsum("jq,mq->jmq", sig, gmat)
            coeffs = cheb.chebU_coeffs(dmat.reshape(n * n, nmodes))
            self.density.append(coeffs.reshape(n, n, nmodes))

    # -- point evaluation ---------------------------------------------------

    def _check_endpoints(self, pts):
        flat = self.sys.endpoints.reshape(-1)
        p = np.atleast_1d(pts)
        if np.any(np.abs(p[:, None] - flat[None, :]) <
                  1e-14 * (1.0 + np.abs(flat[None, :]))):
            raise EndpointError("Gamma evaluation exactly at an endpoint")

    def eval(self, points, side=None):
        """Gamma at points; shape (n, n) for scalars, else (npts, n, n).

        ``side`` (+1/-1) picks the boundary value for real points lying
        inside an interval; it is ignored for genuinely complex points.
        """
        pts = np.atleast_1d(np.asarray(points))
        if np.iscomplexobj(pts) and np.all(pts.imag == 0.0):
            pts = pts.real
        self._check_endpoints(pts)
        n = self.sys.n
        out = np.tile(np.eye(n, dtype=complex), (pts.size, 1, 1))
        for l in range(n):
            s = (pts - self.sys.mid[l]) / self.sys.half[l]
            u = joukowski_exterior(s, side)
            invu = 1.0 / u
            K = self.density[l].shape[2]
            upows = np.empty((K, pts.size), dtype=complex)
            upows[0] = invu
            for k in range(1, K):
                upows[k] = upows[k - 1] * invu
            Cl = np.tensordot(self.density[l], upows, axes=([2], [0]))  # (n,n,P)
            out -= (0.5j * self.sys.half[l] / self.lam) * np.moveaxis(Cl, 2, 0)
        return out[0] if np.ndim(points) == 0 else out

    def inverse(self, points, side=None):
        return np.linalg.inv(self.eval(points, side))

    def det(self, points, side=None):
        return np.linalg.det(self.eval(points, side))

    def column_own(self, m, points):
        """Column m of Gamma on its own interval I_m (side-free there)."""
        return self.eval(points, side=ABOVE)[..., :, m]

    def gtinv(self, k, x):
        """(g^t Gamma^{-1})(x) for x in I_k; side-independent, real data real.

        Shape (len(x), n).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ginv = self.inverse(x, side=ABOVE)
        gmat = self.kernel.g_matrix(k, x)  # (n, len)
        return np.einsum("aq,qam->qm", gmat, ginv)

    # -- validation helpers ---------------------------------------------------

    def jump_matrix(self, x):
        """V(x) = Id - f(x) g^t(x) / lambda at a real point inside I."""
        f = self.kernel.f_vector(x)
        g = self.kernel.g_vector(x)
        return np.eye(self.sys.n, dtype=complex) - np.outer(f, g) / self.lam

    def jump_residual(self, points):
        """max over points of || Gamma_+ - Gamma_- V ||_max."""
        worst = 0.0
        for x in points:
            gp = self.eval(float(x), side=ABOVE)
            gm = self.eval(float(x), side=BELOW)
            worst = max(worst, np.max(np.abs(gp - gm @ self.jump_matrix(float(x)))))
        return worst

    # -- resolvent ------------------------------------------------------------

    def gamma_f(self, z, side=None):
        """(Gamma f)(z) for real z in I; continuous across the cut."""
        k = self.sys.locate(z)
        if k < 0:
            raise EndpointError("Gamma f needs a point inside the intervals")
        col = self.eval(float(z), side=side if side is not None else ABOVE)[:, k]
        return col * self.kernel.f_component(k, float(z))

    def resolvent_kernel(self, z, x, limit=False):
        """R(z, x; lambda), finite for z != x and at coincidence if requested.

        Evaluated in the cancellation-free form
        [A(x) - A(z)] (Gamma f)(z) / (2 pi i lambda (z - x)), A = g^t Gamma^{-1},
        which is exact since A(z) (Gamma f)(z) = f^t g (z) = 0.
        """
        z, x = float(z), float(x)
        if z == x:
            if not limit:
                raise CoincidenceError(
                    "resolvent kernel at z == x: pass limit=True for the limit")
            d = 1e-6 * self.sys.half[self.sys.locate(z)]
            return 0.5 * (self.resolvent_kernel(z + d, x)
                          + self.resolvent_kernel(z - d, x))
        kz = self.sys.locate(z)
        kx = self.sys.locate(x)
        if kz < 0 or kx < 0:
            raise EndpointError("resolvent kernel wants interior points")
        az = self.gtinv(kz, z)[0]
        ax = self.gtinv(kx, x)[0]
        gf = self.gamma_f(z)
        return np.dot(ax - az, gf) / (2j * np.pi * self.lam * (z - x))

    def resolvent_matrix(self, order=None):
        """Dense resolvent sampled like the Nystrom kernel: entries R(z,x) sw.

        Acts on smooth parts, matching self.nystrom.kernel, so that
        (Id + R)(Id - K/lambda) = Id on the grid.
        """
        ns = self.nystrom
        nodes = np.concatenate(ns.grid.nodes)
        sw = np.concatenate(ns.grid.sqrt_weights)
        wt = np.concatenate([self.sys.weight(l, ns.grid.nodes[l])
                             for l in range(self.sys.n)])
        total = nodes.size
        which = np.concatenate([np.full(len(ns.grid.nodes[l]), l)
                                for l in range(self.sys.n)])
        A = np.stack([self.gtinv(which[q], nodes[q])[0] for q in range(total)])
        GF = np.stack([self.gamma_f(nodes[q]) for q in range(total)])
        out = np.empty((total, total), dtype=complex)
        for i in range(total):
            dz = nodes[i] - nodes
            diff = (A - A[i]) @ GF[i]
            with np.errstate(divide="ignore", invalid="ignore"):
                row = diff / (2j * np.pi * self.lam * dz)
            if np.any(dz == 0.0):
                lim = self.resolvent_kernel(nodes[i], nodes[i], limit=True)
                row[dz == 0.0] = lim
            out[i] = row * sw / wt[i]
        return out

    def apply_resolvent(self, nu: PiecewiseFunction, nmodes=None):
        """hat R nu as a sqrt-vanishing PiecewiseFunction.

        Smooth parts at U nodes z of I_m:
        -(1/pi) sum_k sum_q sw p_k(x_q) [(A(x_q) - A(z)) Gamma_m(z)] / (z - x_q),
        with Gamma_m the m-th column (continuous across I_m) and the g/f
        normalization folded into the -1/pi prefactor.
        """
        ns = self.nystrom
        sys = self.sys
        if nmodes is None:
            nmodes = max(ns.grid.sizes) + 33
        xs = ns.grid.nodes
        sws = ns.grid.sqrt_weights
        Ax = [self.gtinv(k, xs[k]) for k in range(sys.n)]  # (M, n) each
        pk = [nu.piece_smooth(k, xs[k]) for k in range(sys.n)]
        smooth = []
        for m in range(sys.n):
            z = sys.from_unit(m, cheb.cheb2_nodes(nmodes))
            gm = self.eval(z, side=ABOVE)
            Az = np.einsum("aq,qam->qm", self.kernel.g_matrix(m, z), np.linalg.inv(gm))
            col = gm[:, :, m]  # (P, n)
            acc = np.zeros(z.size, dtype=complex)
            for k in range(sys.n):
                dz = z[:, None] - xs[k][None, :]
                if np.any(dz == 0.0):
                    raise ValueError("quadrature node collides with a target; "
                                     "choose a different nmodes")
                proj = np.einsum("qa,pa->pq", Ax[k], col) - np.einsum(
                    "pa,pa->p", Az, col)[:, None]
                acc += ((sws[k] * pk[k])[None, :] * proj / dz).sum(axis=1)
            smooth.append(-acc / np.pi)
        field = "real"
        if nu.field != "real" or np.iscomplexobj(np.asarray(self.lam)):
            field = "complex"
        if field == "real":
            smooth = [np.real(v) for v in smooth]
        return PiecewiseFunction.from_smooth_values(sys, smooth, weighted=True)


def build_gamma(sys: IntervalSystem, theta, lam=1.0, size=96, nmodes=None
                ) -> GammaSolution:
    """Assemble the Nystrom system and construct Gamma(z; lambda)."""
    theta = as_theta(theta)
    ns = assemble_K(sys, theta, size=size, lam=lam)
    kd = build_kernel_vectors(sys, theta)
    return GammaSolution(ns, kd, nmodes=nmodes)


def gamma_eval(gamma: GammaSolution, z, side=None):
    """Gamma(z; lambda) as an n x n matrix (module-level convenience)."""
    return gamma.eval(z, side=side)


def verify_jump(gamma: GammaSolution, points):
    """Max residual of Gamma_+ = Gamma_- V over interior points."""
    return gamma.jump_residual(points)


def resolvent_kernel(gamma: GammaSolution, kernel, z, x, limit=False):
    return gamma.resolvent_kernel(z, x, limit=limit)


def invert_via_resolvent(theta, psi: PiecewiseFunction, size=96, nmodes=None,
                         gamma: GammaSolution = None):
    """phi = nu + hat R(1) nu through the resolvent representation.

    Must agree with the direct Nystrom solve; the two paths share only the
    collocation grid, so their discrepancy is a real consistency check.
    """
    theta = as_theta(theta)
    c = compute_c(psi)
    nu = compute_nu(psi, c, theta)
    if gamma is None:
        gamma = build_gamma(psi.sys, theta, lam=1.0, size=size)
    corr = gamma.apply_resolvent(nu, nmodes=nmodes)
    phi = nu + corr
    return phi, c, gamma


def range_condition_N2(theta, nu: PiecewiseFunction, gamma: GammaSolution,
                       order=None):
    """Predicted c from the symmetric-theta second range condition.

    c_m = (theta_mm / pi) int_I nu(x) (g^t Gamma^{-1})_m (x) dx, which on
    interval I_k reads sum_{a != k} theta_ak Gamma^{-1}_{am}(x) nu_k(x)
    / (theta_aa R_a(x)).  Note the integral runs over every interval,
    including I_m itself: the derivation keeps the full nu g^t Gamma^{-1}
    moment, and dropping the own-interval piece leaves an O(1e-4) defect on
    generic data (verified against the resolvent route, which needs no such
    identity).
    """
    theta = as_theta(theta)
    if not np.allclose(theta.entries, theta.entries.T, rtol=1e-13, atol=0.0):
        raise SymmetryError("second range condition in this form needs theta = theta^t")
    sys = nu.sys
    if order is None:
        order = max(gamma.nystrom.grid.sizes)
    grid = chebyshev2_grid(sys, order)
    out = np.zeros(sys.n, dtype=complex)
    for k in range(sys.n):
        x = grid.nodes[k]
        A = gamma.gtinv(k, x)  # (M, n)
        pk = nu.piece_smooth(k, x)
        for m in range(sys.n):
            out[m] += (theta[m, m] / np.pi) * np.sum(
                grid.sqrt_weights[k] * pk * A[:, m])
    return out


def range_condition_two_intervals(theta, nu: PiecewiseFunction, gamma: GammaSolution,
                        order=None):
    """The two-interval specialization with Gamma^{-1} written as cofactors.

    c_1 = (theta_21/pi) int_{I_2} Gamma_22 nu_2 / (det R_1) dx
        - (theta_11 theta_21 / (theta_22 pi)) int_{I_1} Gamma_21 nu_1 / (det R_2) dx

    and symmetrically for c_2 (det Gamma == 1, kept explicit so this path
    performs the same arithmetic as the general one).
    """
    theta = as_theta(theta)
    sys = nu.sys
    if sys.n != 2:
        raise ValueError("the two-interval specialization needs n == 2")
    if order is None:
        order = max(gamma.nystrom.grid.sizes)
    grid = chebyshev2_grid(sys, order)

    def rad(m, x):
        s = (x - sys.mid[m]) / sys.half[m]
        return sys.half[m] * np.sign(s) * np.sqrt(s * s - 1.0)

    out = np.zeros(2, dtype=complex)
    for (m, k) in ((0, 1), (1, 0)):
        x = grid.nodes[k]
        g = gamma.eval(x, side=ABOVE)
        det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
        pk = nu.piece_smooth(k, x)
        cross = (theta[k, m] / np.pi) * np.sum(
            grid.sqrt_weights[k] * pk * (g[:, k, k] / det) / rad(m, x))
        xo = grid.nodes[m]
        go = gamma.eval(xo, side=ABOVE)
        deto = go[:, 0, 0] * go[:, 1, 1] - go[:, 0, 1] * go[:, 1, 0]
        po = nu.piece_smooth(m, xo)
        own = (theta[m, m] * theta[k, m] / (theta[k, k] * np.pi)) * np.sum(
            grid.sqrt_weights[m] * po * (-go[:, k, m] / deto) / rad(k, xo))
        out[m] = cross + own
    return out


def range_condition_J12(theta, nu: PiecewiseFunction, gamma: GammaSolution,
                        kernel=None, order=None, nmodes=None):
    """Predicted c for general invertible-diagonal theta: c = J_1 + J_2.

    J_1 is the direct moment of nu; J_2 carries the resolvent correction.
    Together they equal the second-condition moment of nu + hat R nu.
    """
    theta = as_theta(theta)
    sys = nu.sys
    corr = gamma.apply_resolvent(nu, nmodes=nmodes)
    j1 = _range2_moments(theta, nu)
    j2 = _range2_moments(theta, corr)
    return j1 + j2


def _range2_moments(theta, phi: PiecewiseFunction, order=None):
    """(1/pi) sum_{k != m} theta_mk int_{I_k} phi_k / R_m dy, per m."""
    from .solver import _piece_integral

    theta = as_theta(theta)
    sys = phi.sys
    out = np.zeros(sys.n, dtype=complex)
    for m in range(sys.n):
        for k in range(sys.n):
            if k == m or theta[m, k] == 0.0:
                continue

            def inv_rad(x, m=m):
                s = (x - sys.mid[m]) / sys.half[m]
                return 1.0 / (sys.half[m] * np.sign(s) * np.sqrt(s * s - 1.0))

            out[m] += theta[m, k] * _piece_integral(phi, k, inv_rad, order=order)
    return out / np.pi


def range_check_L1_variant(psi: PiecewiseFunction, gamma: GammaSolution,
                           theta, order=None):
    """Residuals of the integrable-data range identity, per component.

    For R^{-1} psi in L^1 the second condition collapses to

      i int_{I_m} psi_m/R_{m+} dx + theta_mm sum_{k != m} int_{I_k}
        [R Theta_d^{-1} Theta_o Theta_d^{-1} R^{-1} Gamma^{-1}]_{km}
        H_k[psi_k / R_{k+}] dx  =  0,

    and for c[psi] = 0 to the vanishing of the plain Gamma-weighted moments
    of H_k^{-1}[psi_k].  Returns dict with 'integrable' and (when
    applicable) 'zero_shift' residual vectors.
    """
    theta = as_theta(theta)
    sys = psi.sys
    n = sys.n
    c = compute_c(psi)
    nu = compute_nu(psi, c, theta)
    if order is None:
        order = max(gamma.nystrom.grid.sizes)
    grid = chebyshev2_grid(sys, order)
    W = theta.entries / np.diag(theta.entries)[None, :]
    np.fill_diagonal(W, 0.0)

    resid_int = np.zeros(n, dtype=complex)
    resid_zero = np.zeros(n, dtype=complex)
    for m in range(n):
        resid_int[m] = np.pi * c[m]  # i * int psi_m / R_{m+} = pi c_m
    # the k-sum runs over every interval (the own-interval moment is part of
    # the nu g^t Gamma^{-1} integral; see range_condition_N2)
    for k in range(n):
        x = grid.nodes[k]
        ginv = np.linalg.inv(gamma.eval(x, side=ABOVE))
        rads = np.zeros((n, x.size))
        for a in range(n):
            if a == k:
                continue
            s = (x - sys.mid[a]) / sys.half[a]
            rads[a] = sys.half[a] * np.sign(s) * np.sqrt(s * s - 1.0)
        qk = theta[k, k] * nu.piece_smooth(k, x)  # H^{-1}[psi_k - c_k] smooth part
        for m in range(n):
            chain = np.zeros(x.size, dtype=complex)
            nch = np.zeros(x.size, dtype=complex)
            for a in range(n):
                if a == k:
                    continue
                chain += (theta[k, a] / (theta[k, k] * theta[a, a])
                          ) * ginv[:, a, m] / rads[a]
                nch += W[k, a] * ginv[:, a, m] / rads[a]
            # bracket = i w_k chain and H_k[psi_k/R_{k+}] = i q_k, so the
            # product is -w_k q_k chain; sqrt weights absorb the w_k
            resid_int[m] += theta[m, m] * np.sum(
                grid.sqrt_weights[k] * (-qk * chain))
            resid_zero[m] += np.sum(
                grid.sqrt_weights[k] * nu.piece_smooth(k, x) * nch)
    result = {"integrable": resid_int}
    if np.max(np.abs(c)) <= 1e-10 * (1.0 + psi.norm2()):
        result["zero_shift"] = resid_zero
    else:
        result["zero_shift"] = None
        result["zero_shift_raw"] = resid_zero
    return result
