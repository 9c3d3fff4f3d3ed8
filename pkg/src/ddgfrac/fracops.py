"""Riemann-Liouville integrals of piecewise polynomials and the dense
Galerkin matrix of the two-sided fractional integral of order mu = 2 - alpha.

The operator applied to a function g supported on [a, b] (zero extension
outside) is

    riesz_int(g)(x) = (I_left^mu g + I_right^mu g)(x) / (2 cos(pi mu / 2)),

and the matrix B holds the inner products of that image against every test
basis function.  On a uniform mesh B is block Toeplitz, so only one block
per cell offset is ever computed:

* self cell: the power rule turns I^mu of a polynomial into a finite sum of
  y^(r+mu) terms, integrated exactly against a Gauss-Jacobi(0, mu) rule;
* adjacent cell: the truncated integral equals a difference of two power-rule
  series (based at either cell edge); the singular-endpoint part again uses
  the Jacobi rule exactly, the analytic part a high-order Legendre rule;
* separated cells: the kernel is analytic, and a tensor Gauss-Legendre rule
  converges geometrically (no cancellation-prone series needed).

Forcing terms for manufactured solutions use the closed-form Riesz fractional
derivative of monomials on [a, b] (both one-sided derivatives of order alpha
taken on the finite domain).
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .meshbasis import ElementBasis, FieldVector, Mesh1D, mass_solve
from .specfun import (
    gamma_fn,
    gauss_jacobi,
    gauss_legendre,
    polynomial_in_shifted_basis,
    shifted_monomial_coeffs,
)

MAX_DENSE_DOF = 20_000

# point counts for the analytic-kernel quadratures; the nearest admissible
# singularity sits one cell away, giving a Bernstein ellipse rho ~= 5.8 and
# errors far below assembly tolerance at these sizes
_N_SMOOTH = 16
_N_FAR = 14


@dataclass(frozen=True)
class FracOperator:
    """Dense Galerkin matrix of the Riesz fractional integral of order mu."""

    mu: float
    alpha: float
    B: np.ndarray
    riesz_scale: float
    mesh: Mesh1D
    basis: ElementBasis


def _basis_monomial_coeffs(basis: ElementBasis, h: float) -> np.ndarray:
    """Coefficients C[j, r] with ell_j(y) = sum_r C[j, r] y^r, y in [0, h]."""
    n = basis.n_nodes
    C = np.zeros((n, n))
    for j in range(n):
        roots = np.delete(basis.ref_nodes, j)
        coeffs_t = np.poly(roots)[::-1] * basis.bary_w[j] if roots.size else np.array([1.0])
        C[j, :coeffs_t.size] = polynomial_in_shifted_basis(
            coeffs_t, scale=2.0 / h, shift=-1.0
        )
    return C


def _left_integral_blocks(mesh: Mesh1D, basis: ElementBasis, mu: float) -> np.ndarray:
    """Blocks BL[m][i, j] = (phi_{k,i}, I_left^mu phi_{k-m,j}) for offsets m >= 0."""
    K, n, h = mesh.K, basis.n_nodes, mesh.dx
    C = _basis_monomial_coeffs(basis, h)             # about the left edge
    D = np.vstack([shifted_monomial_coeffs(C[j], 0.0, h) for j in range(n)])
    r = np.arange(n)
    gam = np.array([gamma_fn(rr + 1.0) / gamma_fn(rr + 1.0 + mu) for rr in r])

    blocks = np.zeros((K, n, n))

    jac = gauss_jacobi(basis.N + 2, 0.0, mu)
    Lj = basis.eval_matrix(jac.nodes)
    pow1pt = (1.0 + jac.nodes)[:, None] ** r[None, :]

    def singular_endpoint_block(coeffs):
        # exact: integrand is (1+t)^mu times a polynomial of degree <= 2N
        scaled = coeffs * gam[None, :] * (0.5 * h) ** r[None, :]
        S = pow1pt @ scaled.T
        return (0.5 * h) ** (1.0 + mu) * np.einsum("g,gi,gj->ij", jac.weights, Lj, S)

    blocks[0] = singular_endpoint_block(C)

    if K > 1:
        gl = gauss_legendre(_N_SMOOTH)
        Ls = basis.eval_matrix(gl.nodes)
        y = h + 0.5 * h * (1.0 + gl.nodes)
        V = (y[:, None] ** (r[None, :] + mu)) @ (C * gam[None, :]).T
        smooth = 0.5 * h * np.einsum("g,gi,gj->ij", gl.weights, Ls, V)
        blocks[1] = smooth - singular_endpoint_block(D)

    if K > 2:
        glo = gauss_legendre(_N_FAR)
        Lo = basis.eval_matrix(glo.nodes)
        m = np.arange(2, K, dtype=float)
        x = m[:, None] * h + 0.5 * h * (1.0 + glo.nodes)[None, :]
        s = 0.5 * h * (1.0 + glo.nodes)
        kernel = (x[:, :, None] - s[None, None, :]) ** (mu - 1.0)
        blocks[2:] = (0.25 * h * h / gamma_fn(mu)) * np.einsum(
            "mgq,g,q,gi,qj->mij", kernel, glo.weights, glo.weights, Lo, Lo
        )
    return blocks


def assemble_frac_operator(mesh: Mesh1D, basis: ElementBasis, alpha: float) -> FracOperator:
    """Assemble the dense matrix of the two-sided fractional integral.

    The integrals are truncated to [a, b] (zero extension outside), and the
    matrix couples every pair of cells.  The right-sided integral blocks come
    from the left-sided ones through the exact reflection identity of a
    symmetric nodal basis on a uniform mesh.
    """
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"fractional order must lie in (1, 2), got {alpha}")
    K, n = mesh.K, basis.n_nodes
    ndof = K * n
    if ndof > MAX_DENSE_DOF:
        raise ValueError(f"dense fractional operator capped at {MAX_DENSE_DOF} DOFs")

    mu = 2.0 - alpha
    left = _left_integral_blocks(mesh, basis, mu)
    right = left[:, ::-1, ::-1]

    B4 = np.zeros((K, n, K, n))
    for m in range(K):
        k = np.arange(K - m)
        B4[k + m, :, k, :] += left[m]
        B4[k, :, k + m, :] += right[m]

    scale = 1.0 / (2.0 * math.cos(0.5 * math.pi * mu))
    return FracOperator(
        mu=mu, alpha=alpha, B=scale * B4.reshape(ndof, ndof),
        riesz_scale=scale, mesh=mesh, basis=basis,
    )


def apply_frac(op: FracOperator, q: FieldVector) -> FieldVector:
    """Solve M p = B q with the block-diagonal mass inverse."""
    if not q.mesh.compatible_with(op.mesh) or q.basis.N != op.basis.N:
        raise ValueError("field and operator live on different mesh/basis pairs")
    p = mass_solve(op.mesh, op.basis, op.B @ q.values)
    return FieldVector(p, q.mesh, q.basis)


def frac_integral_element(
    mu: float,
    coeffs,
    x_left: float,
    x_right: float,
    x: float,
    side: str = "left",
) -> float:
    """Riemann-Liouville integral of order mu of one cell polynomial at x.

    ``coeffs`` expands the polynomial in powers of (s - x_left).  The left
    integral runs over [x_left, min(x, x_right)] and is zero for x left of
    the cell; ``side="right"`` mirrors everything.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError(f"integral order must lie in (0, 1), got {mu}")
    c = np.asarray(coeffs, dtype=float)
    if side == "right":
        # p(s) about x_left -> p(xl + xr - u) about x_left, then reuse the left path
        about_right = shifted_monomial_coeffs(c, 0.0, x_right - x_left)
        mirrored = about_right * (-1.0) ** np.arange(c.size)
        return frac_integral_element(
            mu, mirrored, x_left, x_right, x_left + x_right - x, side="left"
        )
    if side != "left":
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    if x <= x_left:
        return 0.0
    deg = c.size - 1
    width = x_right - x_left

    if x <= x_right:
        # singular endpoint at s = x: Gauss-Jacobi(mu-1, 0) is exact
        rule = gauss_jacobi(max(deg + 1, 1), mu - 1.0, 0.0)
        s = x_left + 0.5 * (x - x_left) * (1.0 + rule.nodes)
        vals = np.polynomial.polynomial.polyval(s - x_left, c)
        return (0.5 * (x - x_left)) ** mu * rule.integrate(vals) / gamma_fn(mu)

    if x - x_right <= width:
        # nearby evaluation point: difference of two exact power-rule series
        r = np.arange(c.size)
        gam = np.array([gamma_fn(rr + 1.0) / gamma_fn(rr + 1.0 + mu) for rr in r])
        d = shifted_monomial_coeffs(c, 0.0, width)
        p1 = np.dot(c * gam, (x - x_left) ** (r + mu))
        p2 = np.dot(d * gam, (x - x_right) ** (r + mu))
        return float(p1 - p2)

    # well separated: kernel analytic over the cell
    npts = max(16, math.ceil((deg + math.ceil(1.0 / mu) + 5) / 2))
    rule = gauss_legendre(min(npts, 64))
    s = x_left + 0.5 * width * (1.0 + rule.nodes)
    vals = (x - s) ** (mu - 1.0) * np.polynomial.polynomial.polyval(s - x_left, c)
    return 0.5 * width * rule.integrate(vals) / gamma_fn(mu)


@dataclass(frozen=True)
class MonomialFracDeriv:
    """Closed-form one-sided Caputo derivatives of shifted monomials on [a, b].

    The order-alpha derivative annihilates degrees 0 and 1 and maps
    (x - a)^p to factor[p] * (x - a)^(p - alpha) (mirrored for the right
    side), which is everything needed to differentiate a global polynomial.
    """

    alpha: float
    a: float
    b: float
    max_degree: int = 12

    def factors(self) -> np.ndarray:
        f = np.zeros(self.max_degree + 1)
        for p in range(2, self.max_degree + 1):
            f[p] = gamma_fn(p + 1.0) / gamma_fn(p + 1.0 - self.alpha)
        return f


def riesz_frac_deriv_poly(alpha: float, coeffs, a: float, b: float, x):
    """(-Laplacian)^(alpha/2) of a global polynomial on [a, b] at points x.

    Both Caputo derivatives are taken on the finite domain, combined with the
    1/(2 cos(pi alpha / 2)) Riesz factor.  alpha = 2 falls back to the
    classical limit -p''(x).
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size - 1 > 12:
        raise ValueError("polynomial degree capped at 12")
    shape = np.shape(x)
    xs = np.asarray(x, dtype=float).ravel()

    if alpha == 2.0:
        d2 = np.polynomial.polynomial.polyder(c, 2) if c.size > 2 else np.zeros(1)
        out = -np.polynomial.polynomial.polyval(xs, d2)
        return out.reshape(shape) if shape else float(out[0])
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"order must lie in (1, 2] for this solver, got {alpha}")

    if c.size <= 2:
        out = np.zeros_like(xs)
        return out.reshape(shape) if shape else 0.0
    tables = MonomialFracDeriv(alpha=alpha, a=a, b=b, max_degree=c.size - 1)
    g = tables.factors()[: c.size]
    ca = shifted_monomial_coeffs(c, 0.0, a)
    db = shifted_monomial_coeffs(c, 0.0, b) * (-1.0) ** np.arange(c.size)
    j = np.arange(2, c.size)  # degrees 0 and 1 are annihilated
    left = ((xs[:, None] - a) ** (j[None, :] - alpha)) @ (ca[2:] * g[2:])
    right = ((b - xs[:, None]) ** (j[None, :] - alpha)) @ (db[2:] * g[2:])
    out = (left + right) / (2.0 * math.cos(0.5 * math.pi * alpha))
    return out.reshape(shape) if shape else float(out[0])


def project_riesz_poly(alpha: float, coeffs, mesh: Mesh1D, basis: ElementBasis) -> np.ndarray:
    """L2-project (-Laplacian)^(alpha/2) of a global polynomial onto the mesh.

    The image is a sum of (x-a)^(j-alpha) and (b-x)^(j-alpha) profiles, only
    Hoelder continuous at the endpoints, so plain Gauss-Legendre projection
    on the first/last cell is quadrature limited.  Here the endpoint cells
    use a Gauss-Jacobi(0, 2-alpha) rule, which integrates the singular factor
    exactly; interior cells see an analytic integrand one cell away from the
    branch point and use a high-order Legendre rule.
    """
    c = np.asarray(coeffs, dtype=float)
    a, b = mesh.a, mesh.b
    if alpha == 2.0:
        d2 = np.polynomial.polynomial.polyder(c, 2) if c.size > 2 else np.zeros(1)
        from .meshbasis import project

        return project(lambda x: -np.polynomial.polynomial.polyval(x, d2),
                       mesh, basis).values

    mu = 2.0 - alpha
    scale = 1.0 / (2.0 * math.cos(0.5 * math.pi * alpha))
    n, h, K = basis.n_nodes, mesh.dx, mesh.K
    weak = np.zeros((K, n))

    if c.size > 2:
        tables = MonomialFracDeriv(alpha=alpha, a=a, b=b, max_degree=c.size - 1)
        g = tables.factors()[: c.size]
        ca = (shifted_monomial_coeffs(c, 0.0, a) * g)[2:]
        db = (shifted_monomial_coeffs(c, 0.0, b)
              * (-1.0) ** np.arange(c.size) * g)[2:]
        jj = np.arange(2, c.size)

        gl = gauss_legendre(_N_SMOOTH)
        Ls = basis.eval_matrix(gl.nodes)
        n_jac = max((c.size - 3 + basis.N) // 2 + 2, 2)
        jacL = gauss_jacobi(n_jac, 0.0, mu)   # weight (1+t)^mu, left endpoint
        jacR = gauss_jacobi(n_jac, mu, 0.0)   # weight (1-t)^mu, right endpoint
        LjL = basis.eval_matrix(jacL.nodes)
        LjR = basis.eval_matrix(jacR.nodes)

        for k in range(K):
            xl = mesh.boundaries[k]
            # left-endpoint series sum_j ca_j (x-a)^(j-alpha)
            if k == 0:
                y = 0.5 * h * (1.0 + jacL.nodes)
                poly = (y[:, None] ** (jj[None, :] - 2)) @ ca
                weak[k] += ((0.5 * h) ** (1.0 + mu)
                            * (jacL.weights * poly) @ LjL)
            else:
                x = xl + 0.5 * h * (1.0 + gl.nodes)
                vals = ((x[:, None] - a) ** (jj[None, :] - alpha)) @ ca
                weak[k] += 0.5 * h * (gl.weights * vals) @ Ls
            # right-endpoint series sum_j db_j (b-x)^(j-alpha)
            if k == K - 1:
                y = 0.5 * h * (1.0 - jacR.nodes)
                poly = (y[:, None] ** (jj[None, :] - 2)) @ db
                weak[k] += ((0.5 * h) ** (1.0 + mu)
                            * (jacR.weights * poly) @ LjR)
            else:
                x = xl + 0.5 * h * (1.0 + gl.nodes)
                vals = ((b - x[:, None]) ** (jj[None, :] - alpha)) @ db
                weak[k] += 0.5 * h * (gl.weights * vals) @ Ls

    out = (2.0 / h) * scale * weak @ basis.mass_inv.T
    return out.ravel()


# binary cache of assembled operators, keyed by the defining parameters

_CACHE_MAGIC = b"DDGFROP1"
_CACHE_VERSION = 1


def _cache_key(a: float, b: float, K: int, N: int, alpha: float) -> bytes:
    text = f"{a!r}|{b!r}|{K}|{N}|{alpha!r}"
    return hashlib.sha256(text.encode()).digest()


def operator_cache_path(cache_dir: str, mesh: Mesh1D, basis: ElementBasis,
                        alpha: float) -> str:
    key = _cache_key(mesh.a, mesh.b, mesh.K, basis.N, alpha)
    return os.path.join(cache_dir, f"fracop_{key.hex()[:16]}.bin")


def save_frac_operator(op: FracOperator, path: str) -> None:
    key = _cache_key(op.mesh.a, op.mesh.b, op.mesh.K, op.basis.N, op.alpha)
    n = op.B.shape[0]
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", _CACHE_VERSION))
        fh.write(key)
        fh.write(struct.pack("<Q", n))
        fh.write(np.ascontiguousarray(op.B, dtype="<f8").tobytes())


def load_frac_operator(path: str, mesh: Mesh1D, basis: ElementBasis,
                       alpha: float) -> FracOperator | None:
    """Load a cached matrix; returns None on any mismatch."""
    if not os.path.exists(path):
        return None
    key = _cache_key(mesh.a, mesh.b, mesh.K, basis.N, alpha)
    n = mesh.K * basis.n_nodes
    with open(path, "rb") as fh:
        if fh.read(8) != _CACHE_MAGIC:
            return None
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _CACHE_VERSION or fh.read(32) != key:
            return None
        (stored_n,) = struct.unpack("<Q", fh.read(8))
        if stored_n != n:
            return None
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
    mu = 2.0 - alpha
    return FracOperator(
        mu=mu, alpha=alpha, B=data.copy(),
        riesz_scale=1.0 / (2.0 * math.cos(0.5 * math.pi * mu)),
        mesh=mesh, basis=basis,
    )
