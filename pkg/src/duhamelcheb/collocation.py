"""Slab-wise collocation of the Duhamel integral system.

On each time slab the evolution problem is recast, through the
variation-of-constants formula with the operator frozen per subinterval and
the boundary data lifted, as a coupled system for the field values x_k and
the boundary trace values w_k at the CGL nodes; the weighted boundary
values y_k = b(t_k) w_k are recovered afterwards.  Interpolating the trace
rather than the product keeps the interpolation error governed by the
smoother of the two factors, while the multiplier b rides inside the
coefficient integrals, which are evaluated exactly via exponential moment
recurrences.  The interior block matrix is bidiagonal with
elementwise-exponential subdiagonal blocks, and the boundary coupling is
eliminated first through the dense [I - Lambda D] solve.  A fixed-point
sweep over the same splitting is available as an alternative to the direct
elimination.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from .mesh import CGLGrid, TimePartition, build_grid, lagrange_eval
from .operators import OperatorFamily
from .kernels import exp_sigma_moments

__all__ = [
    "SolverConfig",
    "CollocationCoefficients",
    "BlockSystem",
    "StageSolution",
    "SolutionTrace",
    "SlabContractionError",
    "FixedPointDivergenceError",
    "CoefficientAssembler",
    "assemble_coefficients",
    "assemble_block_system",
    "solve_stage_direct",
    "solve_stage_fixed_point",
    "march",
    "block_matrix_inf_norm",
]

CONTRACTION_REFINE = 0.5
"""March doubles the slab count when ||Lambda D|| reaches this value."""

MAX_REFINEMENTS = 6


class SlabContractionError(RuntimeError):
    """The boundary coupling is too strong on the current slab.

    Raised when ||Lambda D|| >= 1, where the eliminated system is no longer
    guaranteed solvable.  The remedy is a shorter slab, i.e. larger K.
    """

    def __init__(self, norm: float, slab: int):
        self.norm = norm
        self.slab = slab
        super().__init__(
            f"boundary coupling norm {norm:.3g} on slab {slab}: slab too long; increase K"
        )


class FixedPointDivergenceError(RuntimeError):
    """The fixed-point sweep is not contracting."""

    def __init__(self, ratio: float, iterations: int, reason: str, slab: int = 0):
        self.ratio = ratio
        self.iterations = iterations
        self.slab = slab
        super().__init__(
            f"fixed-point iteration diverged on slab {slab} after {iterations} "
            f"sweeps (estimated ratio {ratio:.3g}): {reason}"
        )


@dataclass(frozen=True)
class SolverConfig:
    """Discretization parameters.

    N: collocation degree per slab, K: number of slabs, M: retained modes,
    T: final time, gamma: fractional-power weight of the diagnostic scaling
    (the marching solve always runs the unscaled system), mode: "direct" or
    "fixed_point", fp_tol / fp_max_iter: fixed-point controls.
    """

    N: int = 8
    K: int = 1
    M: int = 128
    T: float = 1.0
    gamma: float = 0.0
    mode: str = "direct"
    fp_tol: float = 1e-12
    fp_max_iter: int = 400

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"collocation degree must be >= 1, got N={self.N}")
        if self.K < 1:
            raise ValueError(f"slab count must be >= 1, got K={self.K}")
        if self.M < 1:
            raise ValueError(f"mode count must be >= 1, got M={self.M}")
        if self.T <= 0:
            raise ValueError(f"final time must be positive, got T={self.T}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.mode not in ("direct", "fixed_point"):
            raise ValueError(f"unknown solve mode {self.mode!r}")
        if self.fp_tol <= 0:
            raise ValueError(f"fixed-point tolerance must be positive, got {self.fp_tol}")
        if self.fp_max_iter < 1:
            raise ValueError(f"fixed-point iteration cap must be >= 1, got {self.fp_max_iter}")


@dataclass(frozen=True)
class CollocationCoefficients:
    """Exactly integrated slab coefficients, stored per mode.

    Index conventions: row index k-1 for collocation equations k = 1..N,
    column index j for interpolation nodes j = 0..N, trailing axis modes.

    E[k-1]            propagator exp(-mu~(t*_k) (tau/2) theta_k)
    alpha[k-1, j]     frozen-operator correction, diagonal per mode
    beta[k-1, j]      boundary-lift coupling against the bare interpolant
    beta_weighted     like beta but with the boundary multiplier b folded
                      into the integrand; the marching solver couples to
                      the interpolated boundary trace through these
    phi[k-1]          data term (forcing plus boundary data)
    """

    slab: int
    t_star: np.ndarray
    mu_frozen: np.ndarray
    E: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    beta_weighted: np.ndarray
    phi: np.ndarray

    @property
    def N(self) -> int:
        return self.E.shape[0]

    @property
    def M(self) -> int:
        return self.E.shape[1]


def _affine_compose(coeffs: np.ndarray, t0: float, h: float) -> np.ndarray:
    """Coefficients of p(t0 + h eta) given those of p(t)."""
    acc = np.array([coeffs[-1]])
    for c in coeffs[-2::-1]:
        acc = P.polyadd(np.array([c]), P.polymul(acc, np.array([t0, h])))
    return acc


def _shift_matrix(s_k: float, size: int) -> np.ndarray:
    """Matrix mapping eta-coefficients of p to sigma-coefficients of p(s_k - sigma)."""
    T = np.zeros((size, size))
    for s in range(size):
        for i in range(s + 1):
            T[i, s] = comb(s, i) * (-1.0) ** i * s_k ** (s - i)
    return T


class CoefficientAssembler:
    """Per-slab coefficient assembly with caching for constant families.

    The unknowns enter through their degree-N interpolants (that is the
    scheme), but the data g and f are integrated against the exponential
    kernels to roundoff: each subinterval carries a local Chebyshev fit of
    the data, of degree ``data_degree`` >= N, whose monomial form feeds the
    same moment recurrences.  A shared degree-N treatment of data and
    unknowns would cancel the interpolation defect of the boundary values
    node-for-node and report spurious exactness on resolved problems.
    """

    def __init__(
        self,
        family: OperatorFamily,
        grid: CGLGrid,
        partition: TimePartition,
        data_degree: int | None = None,
    ):
        self.family = family
        self.grid = grid
        self.partition = partition
        N = grid.N
        nodes = grid.nodes
        lag = np.zeros((N + 1, N + 1))
        for j in range(N + 1):
            others = np.delete(nodes, j)
            c = P.polyfromroots(others)
            lag[j, : c.shape[0]] = c / P.polyval(nodes[j], c)
        self._lag = lag
        deg_a = family.a_coeffs.shape[0] - 1
        deg_c = family.c_coeffs.shape[0] - 1
        self._poly_len = N + 1 + max(deg_a, deg_c, 0)
        self._shifts = [_shift_matrix(nodes[k], self._poly_len) for k in range(1, N + 1)]
        Q = max(12, N) if data_degree is None else int(data_degree)
        if Q < N:
            raise ValueError(f"data degree {Q} must be at least the collocation degree {N}")
        self.data_degree = Q
        zq = build_grid(Q).nodes
        self._zq = zq
        vander = np.polynomial.chebyshev.chebvander(zq, Q)
        self._vinv = np.linalg.inv(vander)
        c2p = np.zeros((Q + 1, Q + 1))
        for m in range(Q + 1):
            unit = np.zeros(m + 1)
            unit[m] = 1.0
            mono = np.polynomial.chebyshev.cheb2poly(unit)
            c2p[: mono.shape[0], m] = mono
        self._c2p = c2p
        self._cache = None

    def _interior(self, l: int):
        """E, alpha, beta and the data-quadrature maps for slab l."""
        family, grid, part = self.family, self.grid, self.partition
        N, M = grid.N, family.basis.M
        tau = part.tau
        mu0 = family.basis.mu
        t_star = part.slab_times(l, grid)
        mu_frozen = np.empty((N, M))
        E = np.empty((N, M))
        alpha = np.zeros((N, N + 1, M))
        beta = np.empty((N, N + 1, M))
        plen = self._poly_len
        Q = self.data_degree
        s_all = max(plen - 1, Q)
        data_maps = []
        data_snodes = []
        lagrange_at_snodes = []

        if not family.is_constant:
            t_mid = part.map_to_slab(l, 0.0)
            a_hat = _affine_compose(family.a_coeffs, t_mid, 0.5 * tau)
            c_hat = _affine_compose(family.c_coeffs, t_mid, 0.5 * tau)
        for k in range(1, N + 1):
            tk = t_star[k]
            mu_t = family.frozen_eigenvalues(tk)
            mu_frozen[k - 1] = mu_t
            nu = 0.5 * tau * mu_t
            theta = grid.spacings[k - 1]
            E[k - 1] = np.exp(-nu * theta)
            J = exp_sigma_moments(nu, theta, s_all)
            Tk = self._shifts[k - 1]
            kernel_scale = family.a(tk) * mu0 * family.basis.lift_coeffs
            if not family.is_constant:
                da = P.polyadd(np.array([P.polyval(grid.nodes[k], a_hat)]), -a_hat)
                dc = P.polyadd(np.array([P.polyval(grid.nodes[k], c_hat)]), -c_hat)
            for j in range(N + 1):
                lj = np.zeros(plen)
                lj[: N + 1] = self._lag[j]
                b_int = 0.5 * tau * (J[:, :plen] @ (Tk @ lj))
                beta[k - 1, j] = -kernel_scale * b_int
                if not family.is_constant:
                    pa = np.zeros(plen)
                    raw = P.polymul(da, self._lag[j])
                    pa[: min(plen, raw.shape[0])] = raw[:plen]
                    pc = np.zeros(plen)
                    raw = P.polymul(dc, self._lag[j])
                    pc[: min(plen, raw.shape[0])] = raw[:plen]
                    alpha[k - 1, j] = 0.5 * tau * (
                        mu0 * (J[:, :plen] @ (Tk @ pa)) + (J[:, :plen] @ (Tk @ pc))
                    )
            # sigma-monomial moments composed with the local Chebyshev fit:
            # row n, column q of the map integrates e^{-nu_n sigma} against
            # the local Lagrange function of sample point sigma_q.
            aff = np.zeros((Q + 1, Q + 1))
            half = 2.0 / theta
            for i in range(Q + 1):
                for jj in range(i + 1):
                    aff[jj, i] = comb(i, jj) * (-1.0) ** (i - jj) * half**jj
            data_maps.append(J[:, : Q + 1] @ aff @ self._c2p @ self._vinv)
            s_loc = grid.nodes[k] - 0.5 * theta * (1.0 + self._zq)
            data_snodes.append(s_loc)
            lagrange_at_snodes.append(
                np.stack([lagrange_eval(grid, j, s_loc) for j in range(N + 1)])
            )
        return t_star, mu_frozen, E, alpha, beta, data_maps, data_snodes, lagrange_at_snodes

    def slab(
        self,
        l: int,
        g: Callable[[float], float] | None = None,
        f: Callable[[float], np.ndarray] | None = None,
        b: Callable[[float], float] | None = None,
    ) -> CollocationCoefficients:
        """Assemble the coefficients of slab ``l``.

        ``g`` and ``f`` are sampled on each subinterval at data_degree + 1
        local Chebyshev points and integrated through the moment recurrence,
        exact for polynomial data up to that degree and at roundoff level
        for analytic data.  ``b`` is treated the same way inside the
        products b L_j that weight the boundary-trace unknowns; when it is
        omitted the bare coefficients are reused (b identically one).
        """
        if self.family.is_constant:
            if self._cache is None:
                self._cache = self._interior(1)
            _, mu_frozen, E, alpha, beta, data_maps, data_snodes, lag_loc = self._cache
            t_star = self.partition.slab_times(l, self.grid)
        else:
            t_star, mu_frozen, E, alpha, beta, data_maps, data_snodes, lag_loc = (
                self._interior(l)
            )
        N, M = E.shape
        tau = self.partition.tau
        mu0 = self.family.basis.mu
        lift = self.family.basis.lift_coeffs
        phi = np.zeros((N, M))
        beta_weighted = beta if b is None else np.empty_like(beta)
        for k in range(1, N + 1):
            if g is None and f is None and b is None:
                break
            t_loc = np.array([self.partition.map_to_slab(l, s) for s in data_snodes[k - 1]])
            R = data_maps[k - 1]
            kernel_scale = self.family.a(t_star[k]) * mu0 * lift
            if g is not None:
                g_loc = np.array([float(g(t)) for t in t_loc])
                phi[k - 1] += 0.5 * tau * kernel_scale * (R @ g_loc)
            if f is not None:
                f_loc = np.stack([np.asarray(f(t), dtype=float) for t in t_loc])
                phi[k - 1] += 0.5 * tau * np.einsum("mq,qm->m", R, f_loc)
            if b is not None:
                b_loc = np.array([float(b(t)) for t in t_loc])
                weighted = (R @ (lag_loc[k - 1] * b_loc[None, :]).T).T
                beta_weighted[k - 1] = -0.5 * tau * weighted * kernel_scale[None, :]
        return CollocationCoefficients(
            slab=l,
            t_star=t_star,
            mu_frozen=mu_frozen,
            E=E,
            alpha=alpha,
            beta=beta,
            beta_weighted=beta_weighted,
            phi=phi,
        )


def assemble_coefficients(
    family: OperatorFamily,
    grid: CGLGrid,
    partition: TimePartition,
    l: int,
    g: Callable[[float], float] | None = None,
    f: Callable[[float], np.ndarray] | None = None,
    b: Callable[[float], float] | None = None,
) -> CollocationCoefficients:
    """One-shot assembly of the slab-``l`` coefficients."""
    return CoefficientAssembler(family, grid, partition).slab(l, g, f, b)


@dataclass(frozen=True)
class BlockSystem:
    """Assembled block system of one slab, optionally gamma-scaled.

    All blocks are diagonal per mode except the boundary functional.  With
    gamma = 0 this is the system the marching solver uses; gamma > 0
    applies the similarity scaling by fractional powers of the frozen
    operator, exposed for conditioning diagnostics.  The solution is
    independent of gamma up to roundoff.

    subdiag[i]     coupling of block row i to row i-1 (i >= 1; entry 0 unused)
    Cmat, D        (N, N, M) interior and boundary-trace coupling, columns
                   j = 1..N; D carries the multiplier b inside its integrals
    F_x, F_y, f_x  previous-slab coupling and data, rows k = 1..N
    lam_weights    (N, M) trace functional on scaled blocks:
                   w_k = sum_n lam_weights[k-1, n] x~_{k,n}
    bvals          (N+1,) multiplier values b(t_k) at the slab nodes, used
                   to recover the weighted boundary values y = b w
    """

    slab: int
    gamma: float
    t_star: np.ndarray
    mu_frozen: np.ndarray
    scale: np.ndarray
    subdiag: np.ndarray
    Cmat: np.ndarray
    D: np.ndarray
    F_x: np.ndarray
    F_y: np.ndarray
    f_x: np.ndarray
    lam_weights: np.ndarray
    bvals: np.ndarray

    @property
    def N(self) -> int:
        return self.subdiag.shape[0]

    @property
    def M(self) -> int:
        return self.subdiag.shape[1]

    def lambda_d_matrix(self) -> np.ndarray:
        """The N x N scalar matrix of the eliminated boundary system."""
        return np.einsum("km,kjm->kj", self.lam_weights, self.D)

    def contraction_norm(self) -> float:
        """Infinity norm of Lambda D; below 1 the elimination is solvable."""
        return float(np.abs(self.lambda_d_matrix()).sum(axis=1).max())

    def s_tilde_blocks(self) -> np.ndarray:
        N, M = self.N, self.M
        S = np.zeros((N, N, M))
        S[np.arange(N), np.arange(N)] = 1.0
        if N > 1:
            S[np.arange(1, N), np.arange(N - 1)] = -self.subdiag[1:]
        return S

    def s_tilde_inverse_blocks(self) -> np.ndarray:
        """Explicit inverse of the bidiagonal interior matrix.

        Row i, column k holds the product of the subdiagonal blocks
        between the two positions; no division is involved, so underflowed
        propagators are handled exactly.
        """
        N, M = self.N, self.M
        T = np.zeros((N, N, M))
        for k in range(N):
            acc = np.ones(M)
            T[k, k] = acc
            for i in range(k + 1, N):
                acc = acc * self.subdiag[i]
                T[i, k] = acc
        return T


def block_matrix_inf_norm(blocks: np.ndarray) -> float:
    """Max block-row sum of mode-diagonal blocks: max_i sum_k max_n |.|."""
    return float(np.abs(blocks).max(axis=2).sum(axis=1).max())


def assemble_block_system(
    coeffs: CollocationCoefficients,
    family: OperatorFamily,
    boundary_multiplier: Callable[[float], float],
    gamma: float = 0.0,
) -> BlockSystem:
    """Scale and arrange the slab coefficients into the block system.

    ``boundary_multiplier`` only supplies the nodal values used to recover
    y = b w; the coupling itself comes from ``coeffs.beta_weighted``, so the
    coefficients must have been assembled with the same multiplier (or with
    none, for b identically one).
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    N, M = coeffs.N, coeffs.M
    trace = family.basis.boundary_trace
    scale = coeffs.mu_frozen**gamma if gamma != 0.0 else np.ones((N, M))
    bvals = np.array([float(boundary_multiplier(t)) for t in coeffs.t_star])

    subdiag = np.zeros((N, M))
    if N > 1:
        subdiag[1:] = coeffs.E[1:] * (scale[1:] / scale[:-1] if gamma != 0.0 else 1.0)
    Cmat = coeffs.alpha[:, 1:, :] * scale[:, None, :] / scale[None, :, :]
    D = coeffs.beta_weighted[:, 1:, :] * scale[:, None, :]
    F_x = coeffs.alpha[:, 0, :] * scale
    F_x[0] = F_x[0] + scale[0] * coeffs.E[0]
    F_y = coeffs.beta_weighted[:, 0, :] * scale
    f_x = coeffs.phi * scale
    lam_weights = np.broadcast_to(trace[None, :], (N, M)) / scale
    return BlockSystem(
        slab=coeffs.slab,
        gamma=gamma,
        t_star=coeffs.t_star,
        mu_frozen=coeffs.mu_frozen,
        scale=scale,
        subdiag=subdiag,
        Cmat=Cmat,
        D=D,
        F_x=F_x,
        F_y=F_y,
        f_x=f_x,
        lam_weights=lam_weights,
        bvals=bvals,
    )


@dataclass(frozen=True)
class StageSolution:
    """Solution of one slab: nodal mode vectors and boundary values.

    x has shape (N+1, M) including the inherited node 0; boundary_traces
    holds the trace unknowns w and y = b w the weighted boundary values,
    both of shape (N+1,).  residual is the max-norm defect of the
    collocation equations, contraction the assembled ||Lambda D||.
    """

    slab: int
    x: np.ndarray
    y: np.ndarray
    boundary_traces: np.ndarray
    residual: float
    contraction: float
    fp_iterations: int | None = None
    fp_ratios: np.ndarray | None = None


def _phi_blocks(system: BlockSystem, x0: np.ndarray, w0: float) -> np.ndarray:
    return system.F_x * x0[None, :] + system.F_y * w0 + system.f_x


def _imsc(system: BlockSystem, w: np.ndarray) -> np.ndarray:
    """(I - S~ + C~) w for a block vector w of shape (N, M)."""
    out = np.einsum("kjm,jm->km", system.Cmat, w)
    if system.N > 1:
        out[1:] += system.subdiag[1:] * w[:-1]
    return out


def _lam_apply(system: BlockSystem, w: np.ndarray) -> np.ndarray:
    return np.einsum("km,km->k", system.lam_weights, w)


def _d_apply(system: BlockSystem, y: np.ndarray) -> np.ndarray:
    return np.einsum("kjm,j->km", system.D, y)


def _forward_sub(system: BlockSystem, r: np.ndarray) -> np.ndarray:
    """Apply the explicit inverse of S~ by forward substitution."""
    out = np.empty_like(r)
    out[0] = r[0]
    for k in range(1, system.N):
        out[k] = r[k] + system.subdiag[k] * out[k - 1]
    return out


def _interior_matrix(system: BlockSystem) -> np.ndarray:
    """Batched per-mode matrices of S~ - C~, shape (M, N, N)."""
    N, M = system.N, system.M
    A = np.zeros((M, N, N))
    idx = np.arange(N)
    A[:, idx, idx] = 1.0
    if N > 1:
        A[:, idx[1:], idx[:-1]] = -system.subdiag[1:].T
    A -= system.Cmat.transpose(2, 0, 1)
    return A


def _stage_residual(system: BlockSystem, xt: np.ndarray, w: np.ndarray, Phi: np.ndarray) -> float:
    res_x = xt - _imsc(system, xt) - _d_apply(system, w[1:]) - Phi
    res_w = w[1:] - _lam_apply(system, _imsc(system, xt) + _d_apply(system, w[1:]) + Phi)
    return float(max(np.abs(res_x).max(), np.abs(res_w).max()))


def solve_stage_direct(system: BlockSystem, x0: np.ndarray, w0: float) -> StageSolution:
    """Direct elimination solve of one slab.

    The boundary traces are eliminated first through [I - Lambda D]^{-1};
    the remaining interior system decouples into M independent N x N
    solves, one per mode.
    """
    N, M = system.N, system.M
    Pmat = system.lambda_d_matrix()
    rho = float(np.abs(Pmat).sum(axis=1).max())
    if rho >= 1.0:
        raise SlabContractionError(rho, system.slab)
    Phi = _phi_blocks(system, x0, w0)
    A = _interior_matrix(system)
    U = np.linalg.solve(A, system.D.transpose(2, 0, 1))
    v0 = np.linalg.solve(A, Phi.T[:, :, None])[:, :, 0]

    v0_blocks = v0.T
    r0 = _lam_apply(system, _imsc(system, v0_blocks))
    lamPhi = _lam_apply(system, Phi)
    R = np.empty((N, N))
    for j in range(N):
        R[:, j] = _lam_apply(system, _imsc(system, U[:, :, j].T))
    w_sys = (np.eye(N) - Pmat) - R
    w_int = np.linalg.solve(w_sys, r0 + lamPhi)
    xt = v0_blocks + np.einsum("mkj,j->km", U, w_int)
    w_rec = np.linalg.solve(
        np.eye(N) - Pmat, _lam_apply(system, _imsc(system, xt)) + lamPhi
    )
    w = np.concatenate([[w0], w_rec])
    residual = _stage_residual(system, xt, w, Phi)
    x = xt / system.scale
    return StageSolution(
        slab=system.slab,
        x=np.vstack([x0[None, :], x]),
        y=system.bvals * w,
        boundary_traces=w,
        residual=residual,
        contraction=rho,
    )


def solve_stage_fixed_point(
    system: BlockSystem,
    x0: np.ndarray,
    w0: float,
    tol: float = 1e-12,
    max_iter: int = 400,
) -> StageSolution:
    """Fixed-point sweep on the eliminated system.

    Iterates x <- S~^{-1} (C~ x + D W Lambda (I - S~ + C~) x) + const with
    W = [I - Lambda D]^{-1}; converges geometrically when the combined
    coupling is a contraction, with ratio shrinking as the slab shortens.
    """
    N, M = system.N, system.M
    Pmat = system.lambda_d_matrix()
    rho = float(np.abs(Pmat).sum(axis=1).max())
    if rho >= 1.0:
        raise SlabContractionError(rho, system.slab)
    W = np.linalg.inv(np.eye(N) - Pmat)
    Phi = _phi_blocks(system, x0, w0)
    lamPhi = _lam_apply(system, Phi)
    const = _forward_sub(system, _d_apply(system, W @ lamPhi) + Phi)

    x = np.zeros((N, M))
    history: list[float] = []
    converged = False
    for it in range(1, max_iter + 1):
        z = _lam_apply(system, _imsc(system, x))
        cx = np.einsum("kjm,jm->km", system.Cmat, x)
        x_new = _forward_sub(system, cx + _d_apply(system, W @ z)) + const
        d = float(np.abs(x_new - x).max())
        history.append(d)
        x = x_new
        if d < tol:
            converged = True
            break
        if len(history) >= 4:
            inc = all(history[-i] > history[-i - 1] for i in (1, 2, 3))
            if inc and history[-1] > history[0]:
                ratio = history[-1] / history[-2]
                raise FixedPointDivergenceError(
                    ratio, it, "growing successive differences", system.slab
                )
    if not converged:
        ratio = history[-1] / history[-2] if len(history) > 1 else np.inf
        raise FixedPointDivergenceError(
            ratio, max_iter, "iteration cap reached before tolerance", system.slab
        )

    w_int = W @ (_lam_apply(system, _imsc(system, x)) + lamPhi)
    w = np.concatenate([[w0], w_int])
    residual = _stage_residual(system, x, w, Phi)
    hist = np.array(history)
    ratios = hist[1:] / hist[:-1] if hist.shape[0] > 1 else np.empty(0)
    return StageSolution(
        slab=system.slab,
        x=np.vstack([x0[None, :], x / system.scale]),
        y=system.bvals * w,
        boundary_traces=w,
        residual=residual,
        contraction=rho,
        fp_iterations=len(history),
        fp_ratios=ratios,
    )


@dataclass(frozen=True)
class SolutionTrace:
    """Marched solution across all slabs.

    stages[l-1] holds slab l; consecutive stages share their junction node
    exactly.  solve_seconds measures the stage solves only, excluding
    assembly, so method comparisons at equal work are meaningful.
    """

    config: SolverConfig
    partition: TimePartition
    grid: CGLGrid
    stages: list[StageSolution]
    solve_seconds: float
    refinements: int
    contraction_max: float

    def node_times(self) -> np.ndarray:
        """Distinct node times: t = 0 followed by nodes 1..N of each slab."""
        times = [0.0]
        for stage in self.stages:
            ts = self.partition.slab_times(stage.slab, self.grid)
            times.extend(ts[1:])
        return np.array(times)

    def node_modes(self) -> np.ndarray:
        """Mode vectors matching :meth:`node_times`, shape (1 + K N, M)."""
        rows = [self.stages[0].x[0]]
        for stage in self.stages:
            rows.extend(stage.x[1:])
        return np.array(rows)

    def node_boundary_values(self) -> np.ndarray:
        """Weighted boundary values y = b w matching :meth:`node_times`."""
        vals = [self.stages[0].y[0]]
        for stage in self.stages:
            vals.extend(stage.y[1:])
        return np.array(vals)

    def node_boundary_traces(self) -> np.ndarray:
        """Boundary trace unknowns w matching :meth:`node_times`."""
        vals = [self.stages[0].boundary_traces[0]]
        for stage in self.stages:
            vals.extend(stage.boundary_traces[1:])
        return np.array(vals)


def march(problem, config: SolverConfig, auto_refine: bool = True) -> SolutionTrace:
    """March the collocation solver across [0, T].

    ``problem`` provides the operator family, boundary multiplier b,
    boundary data g, optional forcing (as a mode-vector function of t),
    and initial mode vector u0; see :class:`duhamelcheb.heat.HeatProblem`.

    When the assembled boundary coupling reaches the refinement threshold
    the slab count doubles and the march restarts, at most six times.
    """
    family: OperatorFamily = problem.family
    basis = family.basis
    if basis.M != config.M:
        raise ValueError(
            f"problem carries {basis.M} modes but config requests M={config.M}"
        )
    u0 = np.asarray(problem.u0, dtype=float)
    if u0.shape != (config.M,):
        raise ValueError(f"initial mode vector has shape {u0.shape}, expected ({config.M},)")
    if abs(problem.T - config.T) > 1e-13 * max(1.0, config.T):
        raise ValueError(f"problem horizon T={problem.T} does not match config T={config.T}")
    for t in (0.0, 0.5 * config.T, config.T):
        if family.a(t) <= 0 or family.frozen_eigenvalues(t)[0] <= 0:
            raise ValueError(f"operator family is not positive at t={t}")

    grid = build_grid(config.N)
    K = config.K
    refinements = 0
    while True:
        partition = TimePartition(config.T, K)
        assembler = CoefficientAssembler(family, grid, partition)
        stages: list[StageSolution] = []
        x_prev = u0
        w_prev = float(u0 @ basis.boundary_trace)
        solve_seconds = 0.0
        contraction_max = 0.0
        refine = False
        for l in range(1, K + 1):
            coeffs = assembler.slab(l, problem.g, problem.forcing, problem.b)
            system = assemble_block_system(coeffs, family, problem.b, gamma=0.0)
            rho = system.contraction_norm()
            contraction_max = max(contraction_max, rho)
            if auto_refine and rho >= CONTRACTION_REFINE and refinements < MAX_REFINEMENTS:
                refine = True
                break
            t0 = time.perf_counter()
            if config.mode == "direct":
                stage = solve_stage_direct(system, x_prev, w_prev)
            else:
                stage = solve_stage_fixed_point(
                    system, x_prev, w_prev, tol=config.fp_tol, max_iter=config.fp_max_iter
                )
            solve_seconds += time.perf_counter() - t0
            stages.append(stage)
            x_prev = stage.x[-1]
            w_prev = float(stage.boundary_traces[-1])
        if refine:
            K *= 2
            refinements += 1
            continue
        return SolutionTrace(
            config=config,
            partition=partition,
            grid=grid,
            stages=stages,
            solve_seconds=solve_seconds,
            refinements=refinements,
            contraction_max=contraction_max,
        )
