"""The vector problem chi Theta H phi = psi for invertible-diagonal Theta.

Splitting Theta into diagonal and off-diagonal parts reduces the system to
a second-kind equation (Id - K) phi = nu with

    nu   = per-interval inversion of (psi - c[psi]) / theta_jj,
    K    = integral operator with the real bounded kernel
           K(z, x) = theta_jk w_j(z) / (pi theta_jj R_j(x) (x - z)),
           z in I_j, x in I_k, k != j,

supported off the block diagonal.  The solver collocates on Gauss nodes of
the second-kind Chebyshev family so the sqrt weight of the unknown is
absorbed exactly: the linear system acts on smooth parts and converges
geometrically for analytic data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import chebyshev as cheb
from .chebyshev import PiecewiseFunction
from .errors import (
    DegenerateDiagonalError,
    NearSingularError,
    RangeError,
    ZeroLambdaError,
)
from .intervals import IntervalSystem
from .quadrature import QuadratureGrid, chebyshev2_grid, legendre_grid
from .single import _invert_coeffs, fht_forward, range_scan

SPD = "spd-symmetric"
SYMMETRIC_INVERTIBLE = "symmetric-invertible-diagonal"
INVERTIBLE_DIAGONAL = "invertible-diagonal"
UNIFORM = "uniform"
DEGENERATE = "degenerate-diagonal"


class ThetaMatrix:
    """Real n x n interaction matrix with its classification and d/o split."""

    def __init__(self, entries):
        t = np.asarray(entries, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("theta must be a square matrix")
        self.entries = t
        self.n = t.shape[0]
        self.diag = np.diag(np.diag(t))
        self.off = t - self.diag
        self.classification = self._classify()

    def _classify(self):
        t = self.entries
        if np.all(t == 1.0):
            return UNIFORM
        if np.any(np.diag(t) == 0.0):
            return DEGENERATE
        if np.allclose(t, t.T, rtol=1e-13, atol=0.0):
            if np.all(np.linalg.eigvalsh(0.5 * (t + t.T)) > 0.0):
                return SPD
            return SYMMETRIC_INVERTIBLE
        return INVERTIBLE_DIAGONAL

    @property
    def is_symmetric(self):
        return self.classification in (SPD, SYMMETRIC_INVERTIBLE) or (
            self.classification == UNIFORM)

    def require_invertible_diagonal(self):
        if np.any(np.diag(self.entries) == 0.0):
            raise DegenerateDiagonalError(
                "theta has a zero diagonal entry; degenerate-diagonal systems "
                "need analytic continuation of the data and are out of scope")

    def __getitem__(self, idx):
        return self.entries[idx]

    def __repr__(self):
        return f"ThetaMatrix({self.entries.tolist()}, {self.classification})"


def as_theta(theta) -> ThetaMatrix:
    return theta if isinstance(theta, ThetaMatrix) else ThetaMatrix(theta)


# ---------------------------------------------------------------------------
# forward map and the scalar reductions


def forward_map(theta, phi: PiecewiseFunction, nmodes=None) -> PiecewiseFunction:
    """psi_m = sum_k theta_mk (H_k phi_k) restricted to I_m.

    The own-interval term is the PV transform; cross terms are ordinary
    Cauchy integrals evaluated from the spectral representation.
    """
    theta = as_theta(theta)
    sys = phi.sys
    if theta.n != sys.n:
        raise ValueError("theta size does not match the interval system")
    if nmodes is None:
        nmodes = max(c.shape[0] for c in phi.coeffs) + 2
    values = []
    for m in range(sys.n):
        x = sys.from_unit(m, cheb.cheb1_nodes(nmodes))
        acc = np.zeros(nmodes, dtype=complex)
        for k in range(sys.n):
            if theta[m, k] == 0.0:
                continue
            acc = acc + theta[m, k] * fht_forward(phi, x, j=k)
        values.append(acc)
    field = "real" if phi.field == "real" else "complex"
    if field == "real":
        values = [np.real(v) for v in values]
    return PiecewiseFunction.from_smooth_values(sys, values, weighted=False)


def compute_c(psi: PiecewiseFunction):
    """The unique constants c_j with int (psi_j - c_j)/R_{j+} = 0.

    Component-wise arcsine averages: c_j = (1/pi) int psi_j(x) dx / w_j(x).
    """
    out = []
    for j in range(psi.sys.n):
        out.append(range_scan(psi, j).c)
    arr = np.asarray(out)
    if psi.field == "real":
        arr = np.real(arr).astype(float)
    return arr


def compute_nu(psi: PiecewiseFunction, c=None, theta=None) -> PiecewiseFunction:
    """nu_j = H_j^{-1}[(psi_j - c_j) / theta_jj], a sqrt-vanishing function."""
    theta = as_theta(theta if theta is not None else np.eye(psi.sys.n))
    theta.require_invertible_diagonal()
    if c is None:
        c = compute_c(psi)
    coeffs = []
    for j in range(psi.sys.n):
        rd = range_scan(psi, j)
        m0_eff = rd.m0 + 1j * np.pi * c[j]
        tol = 1e-6 * (1.0 + psi.piece_norm2(j))
        if abs(m0_eff) > tol:
            raise RangeError(
                f"(psi_{j} - c_{j}) fails the range moment: |m0| = {abs(m0_eff):.3e}")
        coeffs.append(_invert_coeffs(psi, j, presubtract=c[j]) / theta[j, j])
    field = "real" if psi.field == "real" else "complex"
    if field == "real":
        coeffs = [np.real(a) for a in coeffs]
    return PiecewiseFunction(psi.sys, coeffs, weighted=True, field=field)


# ---------------------------------------------------------------------------
# Nystrom discretization of Id - K/lambda


@dataclass
class NystromSystem:
    """Dense collocation of Id - K/lambda on per-interval Gauss grids.

    The unknowns are smooth parts: phi = w_j * p on I_j, and the matrix acts
    on the stacked node values of p.  ``kernel`` is the K-part alone (zero
    diagonal blocks), ``matrix`` = Id - kernel/lambda.
    """

    sys: IntervalSystem
    theta: ThetaMatrix
    grid: QuadratureGrid
    lam: complex
    matrix: np.ndarray = field(repr=False)
    kernel: np.ndarray = field(repr=False)
    offsets: np.ndarray
    rad_nodes: np.ndarray = field(repr=False)  # R_j at every node (own block: w_j)

    @property
    def size(self):
        return self.matrix.shape[0]

    def stack(self, per_interval_values):
        return np.concatenate([np.asarray(v) for v in per_interval_values])

    def split(self, flat):
        return [flat[self.offsets[j]: self.offsets[j + 1]]
                for j in range(self.sys.n)]

    def kernel_apply_smooth(self, node_values, j, targets):
        """Smooth part of (K v)(z) for z = targets in I_j, v given at nodes."""
        vals = self.split(np.asarray(node_values, dtype=complex))
        z = np.atleast_1d(np.asarray(targets, dtype=float))
        acc = np.zeros(z.shape, dtype=complex)
        th = self.theta
        for k in range(self.sys.n):
            if k == j:
                continue
            x = self.grid.nodes[k]
            sw = self.grid.sqrt_weights[k]
            rj = self.rad_nodes[j, self.offsets[k]: self.offsets[k + 1]]
            coef = th[j, k] / (np.pi * th[j, j])
            acc += coef * ((sw * vals[k] / rj)[None, :]
                           / (x[None, :] - z[:, None])).sum(axis=1)
        return acc


def assemble_K(sys: IntervalSystem, theta, grid=None, lam=1.0, size=96) -> NystromSystem:
    """Build the dense (Id - K/lambda) collocation matrix.

    Zero diagonal blocks and real entries for real lambda are structural;
    both are asserted by the unit tests rather than here.
    """
    theta = as_theta(theta)
    theta.require_invertible_diagonal()
    if lam == 0:
        raise ZeroLambdaError("lambda must be nonzero")
    if grid is None:
        grid = chebyshev2_grid(sys, size)
    if grid.sqrt_weights is None:
        raise ValueError("Nystrom grid must carry sqrt-absorbing weights")
    sizes = np.array([len(x) for x in grid.nodes])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = offsets[-1]

    allnodes = np.concatenate(grid.nodes)
    rad_nodes = np.empty((sys.n, total))
    for j in range(sys.n):
        s = (allnodes - sys.mid[j]) / sys.half[j]
        own = slice(offsets[j], offsets[j + 1])
        outside = (s >= 1.0) | (s <= -1.0)
        val = np.zeros(total)
        val[outside] = sys.half[j] * np.sign(s[outside]) * np.sqrt(s[outside] ** 2 - 1.0)
        val[own] = sys.weight(j, allnodes[own])  # |R_{j+}| on the own cut
        rad_nodes[j] = val

    kern = np.zeros((total, total))
    for j in range(sys.n):
        zj = grid.nodes[j]
        rows = slice(offsets[j], offsets[j + 1])
        for k in range(sys.n):
            if k == j:
                continue
            cols = slice(offsets[k], offsets[k + 1])
            xk = grid.nodes[k]
            sw = grid.sqrt_weights[k]
            rj = rad_nodes[j, cols]
            coef = theta[j, k] / (np.pi * theta[j, j])
            kern[rows, cols] = coef * sw[None, :] / (
                rj[None, :] * (xk[None, :] - zj[:, None]))

    if np.iscomplexobj(np.asarray(lam)) and np.imag(lam) != 0:
        matrix = np.eye(total, dtype=complex) - kern / lam
    else:
        matrix = np.eye(total) - kern / np.real(lam)
    return NystromSystem(sys=sys, theta=theta, grid=grid, lam=lam,
                         matrix=matrix, kernel=kern, offsets=offsets,
                         rad_nodes=rad_nodes)


def _solve_refined(A, b):
    lu = scipy.linalg.lu_factor(A)
    x = scipy.linalg.lu_solve(lu, b)
    x = x + scipy.linalg.lu_solve(lu, b - A @ x)
    return x


# ---------------------------------------------------------------------------
# the direct solver


@dataclass
class SolveResult:
    phi: PiecewiseFunction
    c: np.ndarray
    nu: PiecewiseFunction
    nystrom: NystromSystem
    diagnostics: dict


def solve_phi(theta, psi: PiecewiseFunction, size=96, nmodes=None,
              sigma_floor=1e-10) -> SolveResult:
    """Nystrom solution of (Id - K) phi = nu with diagnostics.

    Diagnostics: linear-system residual, smallest singular value, and the
    second range-condition residual of the recovered solution.  For non-SPD
    classifications the invertibility of Id - K is certified numerically
    only; a warning records that.
    """
    theta = as_theta(theta)
    theta.require_invertible_diagonal()
    sys = psi.sys
    c = compute_c(psi)
    nu = compute_nu(psi, c, theta)
    ns = assemble_K(sys, theta, size=size, lam=1.0)

    rhs = ns.stack([nu.piece_smooth(j, ns.grid.nodes[j]) for j in range(sys.n)])
    real_data = psi.field == "real"
    if real_data:
        rhs = rhs.real

    svals = np.linalg.svd(ns.matrix, compute_uv=False)
    sigma_min = float(svals[-1])
    if sigma_min < sigma_floor * svals[0]:
        raise NearSingularError(
            f"Id - K numerically singular: sigma_min = {sigma_min:.3e}")
    sol = _solve_refined(ns.matrix, rhs)
    residual = float(np.max(np.abs(ns.matrix @ sol - rhs)) / (1.0 + np.max(np.abs(rhs))))

    warn = None
    if theta.classification not in (SPD,):
        warn = ("theta is not symmetric positive definite: invertibility of "
                "Id - K is certified numerically only (sigma_min = %.3e)" % sigma_min)
        warnings.warn(warn, stacklevel=2)

    if nmodes is None:
        nmodes = max(a.shape[0] for a in nu.coeffs)
    smooth = []
    for j in range(sys.n):
        z = sys.from_unit(j, cheb.cheb2_nodes(nmodes))
        p = nu.piece_smooth(j, z) + ns.kernel_apply_smooth(sol, j, z) / ns.lam
        smooth.append(np.real(p) if real_data else p)
    phi = PiecewiseFunction.from_smooth_values(sys, smooth, weighted=True)

    diag = {
        "residual": residual,
        "sigma_min": sigma_min,
        "range2_residual": residual_range2(theta, phi, c),
        "warning": warn,
    }
    return SolveResult(phi=phi, c=c, nu=nu, nystrom=ns, diagnostics=diag)


def _piece_integral(pf: PiecewiseFunction, k, fn, order=None):
    """int_{I_k} pf_k(y) fn(y) dy with the weight-appropriate Gauss rule."""
    sys = pf.sys
    if order is None:
        order = max(2 * pf.coeffs[k].shape[0], 64)
    if pf.weighted:
        grid = chebyshev2_grid(sys, order)
        x = grid.nodes[k]
        return np.sum(grid.sqrt_weights[k] * pf.piece_smooth(k, x) * fn(x))
    grid = legendre_grid(sys, order)
    x = grid.nodes[k]
    return np.sum(grid.weights[k] * pf.piece_values(k, x) * fn(x))


def residual_range2(theta, phi: PiecewiseFunction, c):
    """r_m = (1/pi) sum_{k != m} theta_mk int_{I_k} phi_k / R_m dy  -  c_m.

    The second necessary range condition, evaluable from any candidate
    solution without the Riemann-Hilbert machinery.
    """
    theta = as_theta(theta)
    sys = phi.sys
    out = np.zeros(sys.n, dtype=complex)
    for m in range(sys.n):
        acc = 0.0
        for k in range(sys.n):
            if k == m or theta[m, k] == 0.0:
                continue

            def inv_rad(x, m=m):
                s = (x - sys.mid[m]) / sys.half[m]
                return 1.0 / (sys.half[m] * np.sign(s) * np.sqrt(s * s - 1.0))

            acc = acc + theta[m, k] * _piece_integral(phi, k, inv_rad)
        out[m] = acc / np.pi - c[m]
    if phi.field == "real":
        out = np.real(out)
    return out


# ---------------------------------------------------------------------------
# the Fourier-side bilinear form and injectivity diagnostics


_XI_CACHE = {}


def _ft_nodes(pf: PiecewiseFunction, j, order):
    """Quadrature nodes x, weights W with int f e^{i x xi} dx = sum W v e^{i x xi}."""
    sys = pf.sys
    if pf.weighted:
        grid = chebyshev2_grid(sys, order)
        return grid.nodes[j], grid.sqrt_weights[j], pf.piece_smooth(j, grid.nodes[j])
    grid = legendre_grid(sys, order)
    return grid.nodes[j], grid.weights[j], pf.piece_values(j, grid.nodes[j])


def _fourier_pieces(pfs, xi, order):
    """f~_j(xi) = int_{I_j} f e^{i x xi} dx for a batch of functions.

    Returns array (len(pfs), n, len(xi)); the oscillatory phase matrices are
    built once per interval and shared across the batch.
    """
    sys = pfs[0].sys
    out = np.zeros((len(pfs), sys.n, xi.size), dtype=complex)
    chunk = 2048
    for j in range(sys.n):
        data = [_ft_nodes(pf, j, order) for pf in pfs]
        x = data[0][0]
        wv = np.stack([W * v for (_, W, v) in data])  # (batch, nodes)
        for lo in range(0, xi.size, chunk):
            hi = min(lo + chunk, xi.size)
            phase = np.exp(1j * np.outer(x, xi[lo:hi]))
            out[:, j, lo:hi] = wv @ phase
    return out


def bilinear_form_J(theta, f: PiecewiseFunction, g=None, xi_max=200.0,
                    n_xi=2 ** 14, order=320):
    """J(f, g) = (1/2pi) sum_jk theta_jk int |xi| f~_k(xi) conj(g~_j(xi)) dxi.

    Fourier convention f~(xi) = int f(x) e^{i x xi} dx; the frequency grid
    is a symmetric trapezoid rule truncated at xi_max (sqrt-vanishing data
    decay like |xi|^{-3/2}, so the truncated tail is O(1/xi_max)).
    """
    theta = as_theta(theta)
    xi = np.linspace(-xi_max, xi_max, n_xi)
    dxi = xi[1] - xi[0]
    pfs = [f] if g is None or g is f else [f, g]
    ft = _fourier_pieces(pfs, xi, order)
    ff = ft[0]
    gg = ft[-1]
    wts = np.full(n_xi, dxi)
    wts[0] = wts[-1] = 0.5 * dxi
    acc = 0.0
    for j in range(theta.n):
        for k in range(theta.n):
            if theta[j, k] == 0.0:
                continue
            acc += theta[j, k] * np.sum(np.abs(xi) * ff[k] * np.conj(gg[j]) * wts)
    return float(np.real(acc)) / (2.0 * np.pi)


def bilinear_form_J_many(theta, fs, xi_max=200.0, n_xi=2 ** 14, order=320):
    """J(f, f) for each f in fs, sharing the Fourier phase matrices."""
    theta = as_theta(theta)
    xi = np.linspace(-xi_max, xi_max, n_xi)
    dxi = xi[1] - xi[0]
    ft = _fourier_pieces(list(fs), xi, order)
    wts = np.full(n_xi, dxi)
    wts[0] = wts[-1] = 0.5 * dxi
    out = np.zeros(len(fs))
    for j in range(theta.n):
        for k in range(theta.n):
            if theta[j, k] == 0.0:
                continue
            out += theta[j, k] * np.real(
                np.sum(np.abs(xi) * ft[:, k] * np.conj(ft[:, j]) * wts, axis=1))
    return out / (2.0 * np.pi)


def random_sqrt_vanishing(sys: IntervalSystem, modes=24, seed=0, decay=0.7,
                          rng=None) -> PiecewiseFunction:
    """Random real sqrt-vanishing function with geometrically decaying modes."""
    rng = np.random.default_rng(seed) if rng is None else rng
    coeffs = [rng.standard_normal(modes) * decay ** np.arange(modes)
              for _ in range(sys.n)]
    return PiecewiseFunction(sys, coeffs, weighted=True, field="real")


def injectivity_report(theta, sys: IntervalSystem, size=96, n_samples=20,
                       seed=1234, modes=16):
    """Numerical injectivity evidence at the chosen discretization.

    Reports the smallest singular value of Id - K and the minimum of
    J(f, f)/||f||^2 over random sqrt-vanishing samples; non-SPD matrices get
    a recorded caveat since positivity of J is only guaranteed for SPD.
    """
    theta = as_theta(theta)
    theta.require_invertible_diagonal()
    ns = assemble_K(sys, theta, size=size, lam=1.0)
    svals = np.linalg.svd(ns.matrix, compute_uv=False)
    rng = np.random.default_rng(seed)
    fs = [random_sqrt_vanishing(sys, modes=modes, rng=rng) for _ in range(n_samples)]
    jvals = bilinear_form_J_many(theta, fs, n_xi=2 ** 12)
    norms = np.array([f.norm2() ** 2 for f in fs])
    return {
        "sigma_min": float(svals[-1]),
        "sigma_max": float(svals[0]),
        "j_over_norm_min": float(np.min(jvals / norms)),
        "j_samples": jvals,
        "spd": theta.classification == SPD,
        "caveat": None if theta.classification == SPD else
        "theta is not SPD; J-positivity and invertibility are not guaranteed",
    }
