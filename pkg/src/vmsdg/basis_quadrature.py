"""Reference-element bases and quadrature rules.

1-D elements use a nodal Lagrange basis on Gauss-Lobatto-Legendre (GLL) points,
so the two endpoint degrees of freedom are point values (strong Dirichlet
conditions become trivial row constraints).  Triangles use the orthonormal
modal (collapsed-coordinate Jacobi) basis, so the reference mass matrix is the
identity.  Orders up to MAX_ORDER = 6 are supported; everything here is small
and dense, built once and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial.polynomial import Polynomial
from scipy.special import eval_jacobi, roots_jacobi

MAX_ORDER = 6
MAX_GAUSS_POINTS = 64
MAX_TRIANGLE_DEGREE = 20


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights; 1-D rules live on [-1, 1], triangle rules on the
    unit reference triangle {(0,0), (1,0), (0,1)}."""

    points: np.ndarray   # (n,) in 1-D, (n, 2) on the triangle
    weights: np.ndarray  # (n,)

    def __len__(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def gauss_rule_1d(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with n points on [-1, 1]; exact through degree 2n-1."""
    if not 1 <= n <= MAX_GAUSS_POINTS:
        raise ValueError(f"gauss_rule_1d: need 1 <= n <= {MAX_GAUSS_POINTS}, got {n}")
    pts, wts = npleg.leggauss(n)
    return QuadratureRule(points=pts, weights=wts)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Quadrature on the unit triangle, exact for total degree <= `degree`.

    Collapsed-coordinate (Duffy) tensor construction: Gauss-Legendre in the
    first direction, Gauss-Jacobi with weight (1-v) in the second, so the
    Jacobian factor is absorbed exactly.  Positive weights summing to 1/2.
    """
    if not 0 <= degree <= MAX_TRIANGLE_DEGREE:
        raise ValueError(
            f"triangle_rule: need 0 <= degree <= {MAX_TRIANGLE_DEGREE}, got {degree}"
        )
    n = max(1, (degree + 2) // 2)  # 2n-1 >= degree
    gl_pts, gl_wts = npleg.leggauss(n)
    gj_pts, gj_wts = roots_jacobi(n, 1, 0)  # weight (1-t) on [-1, 1]
    u = 0.5 * (gl_pts + 1.0)
    v = 0.5 * (gj_pts + 1.0)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(gl_wts, gj_wts) / 8.0  # (1/2 du) * (1/4 from Jacobi map)
    pts = np.column_stack([(uu * (1.0 - vv)).ravel(), vv.ravel()])
    return QuadratureRule(points=pts, weights=ww.ravel())


def gll_nodes(p: int) -> np.ndarray:
    """Gauss-Lobatto-Legendre nodes on [-1, 1]: endpoints plus roots of P_p'."""
    if p == 1:
        return np.array([-1.0, 1.0])
    dleg = npleg.Legendre.basis(p).deriv()
    interior = np.sort(dleg.roots().real)
    return np.concatenate([[-1.0], interior, [1.0]])


@dataclass(frozen=True)
class Basis1D:
    """Nodal Lagrange basis on the GLL points of order p.

    eval(xi, deriv) returns an array of shape (len(xi), p+1): column j is the
    j-th cardinal polynomial (or its first/second derivative) at the points.
    """

    order: int
    nodes: np.ndarray
    _polys: tuple[Polynomial, ...]

    def eval(self, xi, deriv: int = 0) -> np.ndarray:
        if deriv not in (0, 1, 2):
            raise ValueError(f"Basis1D.eval: deriv must be 0, 1 or 2, got {deriv}")
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty((xi.size, self.order + 1))
        for j, poly in enumerate(self._polys):
            out[:, j] = poly.deriv(deriv)(xi) if deriv else poly(xi)
        return out


@lru_cache(maxsize=None)
def nodal_basis_1d(p: int) -> Basis1D:
    """GLL nodal basis of order p (1 <= p <= MAX_ORDER)."""
    if not 1 <= p <= MAX_ORDER:
        raise ValueError(f"nodal_basis_1d: need 1 <= p <= {MAX_ORDER}, got {p}")
    nodes = gll_nodes(p)
    polys = []
    for j in range(p + 1):
        others = np.delete(nodes, j)
        poly = Polynomial.fromroots(others)
        polys.append(poly / poly(nodes[j]))
    return Basis1D(order=p, nodes=nodes, _polys=tuple(polys))


def _jacobi_norm(n: int, alpha: float, beta: float) -> float:
    """L2 norm of the classical Jacobi polynomial P_n^{(a,b)} under its weight."""
    num = (
        2.0 ** (alpha + beta + 1)
        * math.gamma(n + alpha + 1)
        * math.gamma(n + beta + 1)
    )
    den = (
        (2 * n + alpha + beta + 1)
        * math.gamma(n + alpha + beta + 1)
        * math.factorial(n)
    )
    return math.sqrt(num / den)


def _jacobi_on(n: int, alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Orthonormal Jacobi polynomial under weight (1-x)^alpha (1+x)^beta."""
    return eval_jacobi(n, alpha, beta, x) / _jacobi_norm(n, alpha, beta)


def _jacobi_on_deriv(n: int, alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    if n == 0:
        return np.zeros_like(x)
    return math.sqrt(n * (n + alpha + beta + 1)) * _jacobi_on(
        n - 1, alpha + 1, beta + 1, x
    )


@dataclass(frozen=True)
class BasisTri:
    """Orthonormal modal basis on the unit reference triangle.

    Modes are indexed (i, j) with i + j <= p, flattened in the order
    [(0,0), (0,1), ..., (0,p), (1,0), ...]; mode 0 is the constant
    1/sqrt(area) = sqrt(2).  eval/grad take points of shape (n, 2).
    """

    order: int
    index_pairs: tuple[tuple[int, int], ...]

    @property
    def ndofs(self) -> int:
        return len(self.index_pairs)

    @staticmethod
    def _collapsed(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # unit triangle -> (r, s) on {(-1,-1), (1,-1), (-1,1)} -> collapsed (a, b)
        r = 2.0 * pts[:, 0] - 1.0
        s = 2.0 * pts[:, 1] - 1.0
        a = np.full_like(r, -1.0)
        ok = s < 1.0 - 1e-14
        a[ok] = 2.0 * (1.0 + r[ok]) / (1.0 - s[ok]) - 1.0
        return a, s

    def eval(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b = self._collapsed(pts)
        out = np.empty((pts.shape[0], self.ndofs))
        for col, (i, j) in enumerate(self.index_pairs):
            fa = _jacobi_on(i, 0.0, 0.0, a)
            gb = _jacobi_on(j, 2.0 * i + 1.0, 0.0, b)
            # factor 2: orthonormality on the unit triangle instead of (-1,1)^2 / 2
            out[:, col] = 2.0 * math.sqrt(2.0) * fa * gb * (1.0 - b) ** i
        return out

    def grad(self, pts: np.ndarray) -> np.ndarray:
        """Gradients, shape (n, ndofs, 2), in unit-triangle coordinates."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b = self._collapsed(pts)
        half1mb = 0.5 * (1.0 - b)
        out = np.empty((pts.shape[0], self.ndofs, 2))
        for col, (i, j) in enumerate(self.index_pairs):
            fa = _jacobi_on(i, 0.0, 0.0, a)
            dfa = _jacobi_on_deriv(i, 0.0, 0.0, a)
            gb = _jacobi_on(j, 2.0 * i + 1.0, 0.0, b)
            dgb = _jacobi_on_deriv(j, 2.0 * i + 1.0, 0.0, b)
            # d/dr, d/ds on {(-1,-1),(1,-1),(-1,1)} (Hesthaven-Warburton form:
            # the (1-b)/2 powers keep the collapsed-coordinate factor removable)
            dmodedr = dfa * gb
            dmodeds = dfa * gb * (0.5 * (1.0 + a))
            if i >= 1:
                dmodedr = dmodedr * half1mb ** (i - 1)
                dmodeds = dmodeds * half1mb ** (i - 1)
            tmp = dgb * half1mb**i
            if i >= 1:
                tmp = tmp - 0.5 * i * gb * half1mb ** (i - 1)
            dmodeds = dmodeds + fa * tmp
            scale = 2.0 ** (i + 0.5)
            # chain rule unit triangle -> (r,s): d/dx = 2 d/dr, d/dy = 2 d/ds,
            # plus the factor 2 normalization of eval()
            out[:, col, 0] = 4.0 * scale * dmodedr
            out[:, col, 1] = 4.0 * scale * dmodeds
        return out


@lru_cache(maxsize=None)
def modal_basis_triangle(p: int) -> BasisTri:
    """Orthonormal modal triangle basis of total order p (1 <= p <= MAX_ORDER)."""
    if not 1 <= p <= MAX_ORDER:
        raise ValueError(f"modal_basis_triangle: need 1 <= p <= {MAX_ORDER}, got {p}")
    pairs = tuple((i, j) for i in range(p + 1) for j in range(p - i + 1))
    return BasisTri(order=p, index_pairs=pairs)
