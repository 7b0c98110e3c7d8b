"""Meshes, facet enumeration, broken (DG) spaces and piecewise fields.

Conventions used throughout the package:

* 1-D facets are mesh nodes.  At an interior facet the "+"-side is the element
  to the LEFT and the facet normal n+ is +1 (pointing right, out of the left
  element).  Scalar jumps are reported as the coefficient of n+, i.e.
  jump(v) = v_left - v_right; averages are the plain mean of the two traces.
* 2-D facets are triangle edges.  `left` is the element the unit normal points
  out of; boundary facets have right = None and an outward domain normal.
* The facet length scale h is the mean of the incident element sizes
  (element width in 1-D, longest-edge diameter in 2-D); boundary facets use
  the single incident element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis_quadrature import (
    Basis1D,
    BasisTri,
    modal_basis_triangle,
    nodal_basis_1d,
)


@dataclass(frozen=True)
class Facet:
    """One mesh facet (a node in 1-D, an edge in 2-D)."""

    index: int
    left: int
    right: int | None          # None on the domain boundary
    h: float                   # length scale (mean incident element size)
    x: np.ndarray              # node position (1-D) / edge midpoint (2-D)
    normal: np.ndarray         # unit normal out of `left`; (1,) or (2,)
    vertices: np.ndarray | None = None  # 2-D only: (2, 2) edge endpoints
    measure: float = 0.0       # edge length in 2-D; 0.0 in 1-D

    @property
    def is_boundary(self) -> bool:
        return self.right is None


@dataclass(frozen=True)
class Mesh1D:
    """Interval mesh; element e spans [vertices[e], vertices[e+1]]."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 1 or len(v) < 2 or np.any(np.diff(v) <= 0):
            raise ValueError("Mesh1D: vertices must be strictly increasing, >= 2")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return 1

    @property
    def n_elements(self) -> int:
        return len(self.vertices) - 1

    def element_size(self, e: int) -> float:
        return float(self.vertices[e + 1] - self.vertices[e])

    def element_bounds(self, e: int) -> tuple[float, float]:
        return float(self.vertices[e]), float(self.vertices[e + 1])

    def facets(self) -> list[Facet]:
        """All facets, boundary ones included, ordered left to right."""
        sizes = np.diff(self.vertices)
        out = [
            Facet(
                index=0,
                left=0,
                right=None,
                h=float(sizes[0]),
                x=np.array([self.vertices[0]]),
                normal=np.array([-1.0]),
            )
        ]
        for i in range(1, self.n_elements):
            out.append(
                Facet(
                    index=i,
                    left=i - 1,
                    right=i,
                    h=float(0.5 * (sizes[i - 1] + sizes[i])),
                    x=np.array([self.vertices[i]]),
                    normal=np.array([1.0]),
                )
            )
        out.append(
            Facet(
                index=self.n_elements,
                left=self.n_elements - 1,
                right=None,
                h=float(sizes[-1]),
                x=np.array([self.vertices[-1]]),
                normal=np.array([1.0]),
            )
        )
        return out

    def interior_facets(self) -> list[Facet]:
        return [f for f in self.facets() if not f.is_boundary]


def uniform_mesh_1d(x0: float, x1: float, n: int) -> Mesh1D:
    if n < 1 or not x1 > x0:
        raise ValueError(f"uniform_mesh_1d: bad interval/count ({x0}, {x1}, {n})")
    return Mesh1D(vertices=np.linspace(x0, x1, n + 1))


@dataclass(frozen=True)
class TriMesh2D:
    """Triangle mesh: vertices (nv, 2), triangles (nt, 3) with CCW orientation."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=int)
        if v.ndim != 2 or v.shape[1] != 2 or t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("TriMesh2D: vertices must be (nv,2), triangles (nt,3)")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if np.any(self.areas() <= 0):
            raise ValueError("TriMesh2D: all triangles must be CCW with positive area")

    @property
    def dim(self) -> int:
        return 2

    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    def corners(self, e: int) -> np.ndarray:
        return self.vertices[self.triangles[e]]

    def areas(self) -> np.ndarray:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        ab, ac = b - a, c - a
        return 0.5 * (ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])

    def element_size(self, e: int) -> float:
        """Element diameter: the longest edge."""
        c = self.corners(e)
        return float(
            max(np.linalg.norm(c[i] - c[(i + 1) % 3]) for i in range(3))
        )

    def centroid(self, e: int) -> np.ndarray:
        return self.corners(e).mean(axis=0)

    def facets(self) -> list[Facet]:
        edge_owners: dict[tuple[int, int], list[int]] = {}
        for e, tri in enumerate(self.triangles):
            for k in range(3):
                key = tuple(sorted((int(tri[k]), int(tri[(k + 1) % 3]))))
                edge_owners.setdefault(key, []).append(e)
        out = []
        for idx, (key, owners) in enumerate(sorted(edge_owners.items())):
            if len(owners) > 2:
                raise ValueError(f"TriMesh2D: edge {key} shared by >2 triangles")
            left = min(owners)
            right = max(owners) if len(owners) == 2 else None
            a, b = self.vertices[key[0]], self.vertices[key[1]]
            tangent = b - a
            length = float(np.linalg.norm(tangent))
            normal = np.array([tangent[1], -tangent[0]]) / length
            mid = 0.5 * (a + b)
            if np.dot(normal, mid - self.centroid(left)) < 0:
                normal = -normal
            if right is None:
                h = self.element_size(left)
            else:
                h = 0.5 * (self.element_size(left) + self.element_size(right))
            out.append(
                Facet(
                    index=idx,
                    left=left,
                    right=right,
                    h=float(h),
                    x=mid,
                    normal=normal,
                    vertices=np.array([a, b]),
                    measure=length,
                )
            )
        return out

    def interior_facets(self) -> list[Facet]:
        return [f for f in self.facets() if not f.is_boundary]


def triangulate_unit_square(m: int, diagonal: str = "slash") -> TriMesh2D:
    """Split the unit square into an m x m grid of squares, two triangles each.

    diagonal="slash" cuts each cell from its lower-left to upper-right corner,
    "backslash" from lower-right to upper-left.  Both orientations produce CCW
    triangles; m=3 gives the 18-element mesh used by the 2-D experiment.
    """
    if m < 1:
        raise ValueError(f"triangulate_unit_square: need m >= 1, got {m}")
    if diagonal not in ("slash", "backslash"):
        raise ValueError(
            f"triangulate_unit_square: diagonal must be 'slash' or 'backslash',"
            f" got {diagonal!r}"
        )
    side = np.linspace(0.0, 1.0, m + 1)
    xx, yy = np.meshgrid(side, side, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i: int, j: int) -> int:
        return i * (m + 1) + j

    tris = []
    for i in range(m):
        for j in range(m):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            if diagonal == "slash":
                tris.append([v00, v10, v11])
                tris.append([v00, v11, v01])
            else:
                tris.append([v00, v10, v01])
                tris.append([v10, v11, v01])
    return TriMesh2D(vertices=verts, triangles=np.array(tris))


@dataclass(frozen=True)
class DGSpace:
    """Broken polynomial space of uniform order on a mesh (no continuity)."""

    mesh: Mesh1D | TriMesh2D
    order: int
    basis: Basis1D | BasisTri = field(init=False)

    def __post_init__(self):
        if self.mesh.dim == 1:
            object.__setattr__(self, "basis", nodal_basis_1d(self.order))
        else:
            object.__setattr__(self, "basis", modal_basis_triangle(self.order))

    @property
    def dofs_per_element(self) -> int:
        if self.mesh.dim == 1:
            return self.order + 1
        return (self.order + 1) * (self.order + 2) // 2

    @property
    def ndofs(self) -> int:
        return self.mesh.n_elements * self.dofs_per_element

    def element_dofs(self, e: int) -> np.ndarray:
        k = self.dofs_per_element
        return np.arange(e * k, (e + 1) * k)

    # --- 1-D reference mapping helpers -------------------------------------
    def map_to_physical(self, e: int, xi: np.ndarray) -> np.ndarray:
        """1-D: reference points in [-1, 1] to physical coordinates."""
        x0, x1 = self.mesh.element_bounds(e)
        return x0 + 0.5 * (np.asarray(xi) + 1.0) * (x1 - x0)

    def map_to_reference(self, e: int, x: np.ndarray) -> np.ndarray:
        x0, x1 = self.mesh.element_bounds(e)
        return 2.0 * (np.asarray(x) - x0) / (x1 - x0) - 1.0

    # --- 2-D affine mapping helpers ----------------------------------------
    def jacobian(self, e: int) -> np.ndarray:
        c = self.mesh.corners(e)
        return np.column_stack([c[1] - c[0], c[2] - c[0]])

    def ref_to_phys_2d(self, e: int, pts: np.ndarray) -> np.ndarray:
        c = self.mesh.corners(e)
        J = self.jacobian(e)
        return c[0] + np.asarray(pts) @ J.T

    def phys_to_ref_2d(self, e: int, pts: np.ndarray) -> np.ndarray:
        c = self.mesh.corners(e)
        Jinv = np.linalg.inv(self.jacobian(e))
        return (np.asarray(pts) - c[0]) @ Jinv.T


@dataclass
class CoarseField:
    """A member of a DGSpace: per-element polynomial coefficients."""

    space: DGSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.ndofs,):
            raise ValueError(
                f"CoarseField: expected {self.space.ndofs} coefficients,"
                f" got shape {self.coeffs.shape}"
            )

    # --- 1-D evaluation ------------------------------------------------------
    def eval_element(self, e: int, xi, deriv: int = 0) -> np.ndarray:
        """1-D: evaluate on element e at reference points xi in [-1, 1]."""
        space = self.space
        vals = space.basis.eval(xi, deriv) @ self.coeffs[space.element_dofs(e)]
        h = space.mesh.element_size(e)
        return vals * (2.0 / h) ** deriv

    def eval_at(self, e: int, x, deriv: int = 0) -> np.ndarray:
        """1-D: evaluate on element e at physical points x."""
        return self.eval_element(e, self.space.map_to_reference(e, x), deriv)

    def trace(self, facet: Facet, side: str, deriv: int = 0) -> float:
        """One-sided value/derivative at a 1-D facet; side in {'left','right'}."""
        if side == "left":
            return float(self.eval_element(facet.left, np.array([1.0]), deriv)[0])
        if side == "right":
            if facet.right is None:
                raise ValueError("trace: boundary facet has no right element")
            return float(self.eval_element(facet.right, np.array([-1.0]), deriv)[0])
        raise ValueError(f"trace: side must be 'left' or 'right', got {side!r}")

    # --- 2-D evaluation ------------------------------------------------------
    def eval_points_2d(self, e: int, pts_phys: np.ndarray) -> np.ndarray:
        space = self.space
        ref = space.phys_to_ref_2d(e, pts_phys)
        return space.basis.eval(ref) @ self.coeffs[space.element_dofs(e)]

    def grad_points_2d(self, e: int, pts_phys: np.ndarray) -> np.ndarray:
        space = self.space
        ref = space.phys_to_ref_2d(e, pts_phys)
        gref = space.basis.grad(ref)  # (n, ndofs, 2)
        JinvT = np.linalg.inv(space.jacobian(e)).T
        gphys = np.einsum("nkd,ed->nke", gref, JinvT)
        return np.einsum("nkd,k->nd", gphys, self.coeffs[space.element_dofs(e)])
