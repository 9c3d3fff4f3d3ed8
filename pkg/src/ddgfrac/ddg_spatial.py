"""Direct DG spatial discretization.

The second-derivative variable q is defined weakly against every test
function phi by

    (q, phi) = -(du/dx, dphi/dx) - sum_faces( (du/dx)* [phi] + {dphi/dx} [u] )

with the derivative numerical flux

    (du/dx)* = beta0 [u]/h + {du/dx} + beta1 h [d2u/dx2],

jumps [w] = w_plus - w_minus and averages {w} = (w_plus + w_minus)/2.
Dirichlet data enters through mirrored ghost traces of the solution
(u_ext = 2 g - u_int, derivatives copied) while test functions take a zero
exterior trace with {dphi/dx} = dphi/dx / 2; that combination is consistent
and keeps the beta1-free part of the bilinear form symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .fracops import FracOperator, apply_frac
from .meshbasis import ElementBasis, FieldVector, Mesh1D, mass_solve


@dataclass(frozen=True)
class FluxParams:
    """Coefficients of the derivative numerical flux."""

    beta0: float
    beta1: float = 0.0

    def __post_init__(self):
        if self.beta0 < 0:
            raise ValueError(f"beta0 must be non-negative, got {self.beta0}")


def default_flux(N: int) -> FluxParams:
    """Degree-adapted default: beta0 = max(1, (N+1)^2/2), beta1 = 0.

    The second-derivative jump term is the one interface term without a
    symmetric partner in the weak form; leaving it off keeps the spatial
    operator adjoint-consistent, which measurably sharpens fine-grid errors
    for solutions with nonzero boundary curvature.  beta1 can still be set
    explicitly where a run calls for it.
    """
    return FluxParams(beta0=max(1.0, 0.5 * (N + 1.0) ** 2), beta1=0.0)


def _as_time_fn(value) -> Callable[[float], float]:
    if callable(value):
        return value
    return lambda t, _v=float(value): _v


@dataclass(frozen=True)
class BoundarySpec:
    """Dirichlet data at the two domain endpoints (constants or functions of t)."""

    left: object = 0.0
    right: object = 0.0

    def left_at(self, t: float) -> float:
        return _as_time_fn(self.left)(t)

    def right_at(self, t: float) -> float:
        return _as_time_fn(self.right)(t)


@dataclass
class DdgOperators:
    """Assembled weak second-derivative operator with boundary closure.

    q DOFs are recovered as  q = M^-1 (A u + bc_left * g_left(t)
    + bc_right * g_right(t)).
    """

    A: np.ndarray
    bc_left: np.ndarray
    bc_right: np.ndarray
    flux: FluxParams
    bc: BoundarySpec
    mesh: Mesh1D
    basis: ElementBasis


def numerical_flux_deriv(traces_minus, traces_plus, h: float, flux: FluxParams) -> float:
    """Derivative flux from (value, u', u'') traces on both sides of a face."""
    um, dm, sm = traces_minus
    up, dp, sp = traces_plus
    return flux.beta0 / h * (up - um) + 0.5 * (dp + dm) + flux.beta1 * h * (sp - sm)


def assemble_q_operator(
    mesh: Mesh1D, basis: ElementBasis, flux: FluxParams, bc: BoundarySpec
) -> DdgOperators:
    """Assemble A and the Dirichlet closure vectors for the weak form above."""
    if flux.beta0 <= 0:
        raise ValueError("penalization requires beta0 > 0")
    K, n, h = mesh.K, basis.n_nodes, mesh.dx
    ndof = K * n
    A = np.zeros((ndof, ndof))
    bL = np.zeros(ndof)
    bR = np.zeros(ndof)

    # reference trace rows; physical derivatives pick up 2/dx per order
    vl, dl, sl = basis.trace_left
    vr, dr, sr = basis.trace_right
    dl_x, dr_x = (2.0 / h) * dl, (2.0 / h) * dr
    sl_x, sr_x = (2.0 / h) ** 2 * sl, (2.0 / h) ** 2 * sr

    vol = -(2.0 / h) * basis.diff.T @ basis.mass @ basis.diff
    for k in range(K):
        A[k * n:(k + 1) * n, k * n:(k + 1) * n] += vol

    for face in range(1, K):
        rows_m = slice((face - 1) * n, face * n)
        rows_p = slice(face * n, (face + 1) * n)
        cols = slice((face - 1) * n, (face + 1) * n)
        flux_row = np.concatenate([
            -flux.beta0 / h * vr + 0.5 * dr_x - flux.beta1 * h * sr_x,
            +flux.beta0 / h * vl + 0.5 * dl_x + flux.beta1 * h * sl_x,
        ])
        jump_row = np.concatenate([-vr, vl])
        # -(du/dx)* [phi]
        A[rows_m, cols] += np.outer(vr, flux_row)
        A[rows_p, cols] -= np.outer(vl, flux_row)
        # -{dphi/dx} [u]
        A[rows_m, cols] -= np.outer(0.5 * dr_x, jump_row)
        A[rows_p, cols] -= np.outer(0.5 * dl_x, jump_row)

    # boundary faces need the full degree-dependent penalty even when a run
    # uses a small interior beta0 (half-cell trace constant)
    b0_bdry = max(flux.beta0, 0.5 * (basis.N + 1.0) ** 2)

    # left boundary face: mirrored ghost, [u] = 2u - 2g, [phi] = +phi
    rows = slice(0, n)
    A[rows, rows] -= np.outer(vl, 2.0 * b0_bdry / h * vl + dl_x)
    bL[:n] += 2.0 * b0_bdry / h * vl
    A[rows, rows] -= np.outer(0.5 * dl_x, 2.0 * vl)  # -{dphi/dx}[u]
    bL[:n] += dl_x

    # right boundary face: mirrored ghost, [u] = 2g - 2u, [phi] = -phi
    rows = slice((K - 1) * n, K * n)
    A[rows, rows] += np.outer(vr, -2.0 * b0_bdry / h * vr + dr_x)
    bR[(K - 1) * n:] += 2.0 * b0_bdry / h * vr
    A[rows, rows] += np.outer(0.5 * dr_x, 2.0 * vr)
    bR[(K - 1) * n:] -= dr_x

    return DdgOperators(A=A, bc_left=bL, bc_right=bR, flux=flux, bc=bc,
                        mesh=mesh, basis=basis)


def apply_q(ops: DdgOperators, u: np.ndarray, t: float = 0.0) -> np.ndarray:
    """q DOFs for given solution DOFs, including Dirichlet data at time t."""
    rhs = ops.A @ u
    gl, gr = ops.bc.left_at(t), ops.bc.right_at(t)
    if gl != 0.0:
        rhs = rhs + gl * ops.bc_left
    if gr != 0.0:
        rhs = rhs + gr * ops.bc_right
    return mass_solve(ops.mesh, ops.basis, rhs)


def fractional_diffusion_rhs(
    u: FieldVector, ops: DdgOperators, fop: FracOperator, eps: float
) -> FieldVector:
    """eps * riesz_int(q) with q the weak second derivative (homogeneous BC)."""
    if not u.mesh.compatible_with(ops.mesh) or u.basis.N != ops.basis.N:
        raise ValueError("field and operators live on different mesh/basis pairs")
    q = FieldVector(mass_solve(ops.mesh, ops.basis, ops.A @ u.values), u.mesh, u.basis)
    p = apply_frac(fop, q)
    return FieldVector(eps * p.values, u.mesh, u.basis)


@dataclass(frozen=True)
class ConvectionFlux:
    """Convective flux function, its derivative, and boundary states."""

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]


def convection_rhs(
    u: FieldVector,
    conv: ConvectionFlux,
    bc: BoundarySpec,
    t: float = 0.0,
) -> FieldVector:
    """-M^-1 of the weak divergence with a global Lax-Friedrichs face flux."""
    mesh, basis = u.mesh, u.basis
    n, h = basis.n_nodes, mesh.dx
    cells = u.by_cell
    vl, vr = basis.trace_left[0], basis.trace_right[0]

    minus = np.empty(mesh.K + 1)
    plus = np.empty(mesh.K + 1)
    minus[1:] = cells @ vr
    plus[:-1] = cells @ vl
    minus[0] = bc.left_at(t)
    plus[-1] = bc.right_at(t)

    states = np.concatenate([minus, plus])
    speed = float(np.max(np.abs(conv.df(states)))) if states.size else 0.0
    fstar = 0.5 * (conv.f(minus) + conv.f(plus)) - 0.5 * speed * (plus - minus)

    weak = -(conv.f(cells) @ (basis.mass @ basis.diff))
    weak += np.outer(fstar[1:], vr) - np.outer(fstar[:-1], vl)
    out = -(2.0 / h) * weak @ basis.mass_inv.T
    return FieldVector(out.ravel(), mesh, basis)


@dataclass
class AdmissibilityReport:
    min_ratio: float
    min_value: float
    admissible: bool
    witness: Optional[np.ndarray] = field(default=None)


def _two_cell_forms(basis: ElementBasis, flux: FluxParams):
    """Quadratic forms on a two-cell probe with unit cells [0,1], [1,2]."""
    n = basis.n_nodes
    h = 1.0
    vl, dl, sl = basis.trace_left
    vr, dr, sr = basis.trace_right
    grad = np.zeros((2 * n, 2 * n))
    gblock = 2.0 * basis.diff.T @ basis.mass @ basis.diff
    grad[:n, :n] = gblock
    grad[n:, n:] = gblock

    jump = np.concatenate([-vr, vl])
    flux_row = np.concatenate([
        -flux.beta0 / h * vr + dr - flux.beta1 * h * 4.0 * sr,
        +flux.beta0 / h * vl + dl + flux.beta1 * h * 4.0 * sl,
    ])
    # (du/dx)* + {du/dx}: the plain average adds another (dr, dl) pair
    fa_row = flux_row + np.concatenate([dr, dl])
    face = 0.5 * (np.outer(fa_row, jump) + np.outer(jump, fa_row))
    pen = np.outer(jump, jump) / h
    return grad, face, pen, jump


def check_admissibility(
    flux: FluxParams,
    N: int,
    samples: int = 10_000,
    gamma: float = 0.5,
    mu_pen: float = 0.25,
    seed: int = 0,
) -> AdmissibilityReport:
    """Sampled falsifier for the flux admissibility inequality.

    Minimizes  gamma (u', u') + sum_face ((u')*[u] + {u'}[u]) - mu_pen [u]^2/h
    over random two-cell degree-N polynomials (normalized DOFs), then refines
    the worst sample by local descent on the Rayleigh quotient.  A negative
    minimum beyond tolerance yields a witness.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if not 0.0 < gamma < 1.0 or not 0.0 < mu_pen <= 1.0:
        raise ValueError("gamma must lie in (0,1) and mu_pen in (0,1]")
    from .meshbasis import build_basis

    basis = build_basis(N)
    grad, face, pen, jump = _two_cell_forms(basis, flux)
    G = gamma * grad + face - mu_pen * pen
    numer = gamma * grad + face

    rng = np.random.default_rng(seed)
    U = rng.standard_normal((samples, 2 * basis.n_nodes))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    vals = np.einsum("si,ij,sj->s", U, G, U)
    worst = int(np.argmin(vals))
    min_value = float(vals[worst])

    def rayleigh(u):
        return float(u @ G @ u) / float(u @ u)

    res = minimize(rayleigh, U[worst], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20_000})
    u_min = res.x / np.linalg.norm(res.x)
    min_value = min(min_value, rayleigh(u_min))

    jumps = U @ jump
    mask = np.abs(jumps) > 1e-8
    ratios = np.einsum("si,ij,sj->s", U[mask], numer, U[mask]) / (jumps[mask] ** 2)
    jmin = float(jump @ u_min)
    if abs(jmin) > 1e-8:
        ratios = np.append(ratios, (u_min @ numer @ u_min) / jmin**2)
    min_ratio = float(np.min(ratios)) if ratios.size else math.inf

    admissible = min_value >= -1e-10
    return AdmissibilityReport(
        min_ratio=min_ratio,
        min_value=min_value,
        admissible=admissible,
        witness=None if admissible else u_min,
    )
