"""Projection oracles and fine-scale diagnostics.

The fine-scale solution is never solved for: it is reconstructed pointwise
as u' = u_exact - u_coarse, which is exact whenever a closed-form solution
is available (every experiment here supplies one).  The projections build
reference coarse fields (nodally exact interpolant, boundary-constrained L2
projection) from which explicit interface data can be extracted, and the
diagnostics evaluate the interface/volumetric identities that the solved
coarse fields are expected to satisfy.

Facet orientation follows mesh_spaces: in 1-D the left element of a facet
is the + side and scalar jumps read (left trace) - (right trace); in 2-D
the facet normal points away from the facet's left element.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .basis_quadrature import gauss_rule_1d, triangle_rule
from .mesh_spaces import CoarseField, DGSpace, Facet, Mesh1D, TriMesh2D
from .weakforms import Explicit

# quadrature sizes: fixed, generous rules so the non-polynomial exact
# solutions are integrated well past the diagnostic tolerances
_MOMENT_POINTS = 24          # 1-D element moments
_EDGE_POINTS = 11            # 2-D loop integrals, degree 21 per edge
_ELEMENT_DEGREE = 20         # 2-D element integrals
_PROJECTION_EXTRA = 13       # added to p for the L2 projection loads

NODAL_DIFFERENCE = "nodal-difference"


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form solution: value and gradient callables.

    1-D callables map an ndarray of points to an ndarray of values
    (gradient returns du/dx); 2-D callables take points of shape (n, 2)
    and the gradient returns shape (n, 2).  The solution is assumed C1,
    which self_check verifies by centered finite differences.
    """

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    dim: int = 1

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"ExactSolution: dim must be 1 or 2, got {self.dim}")

    def self_check(self, bounds, n: int = 20, seed: int = 1234, tol: float = 1e-6) -> None:
        """Compare gradient() against centered differences of value().

        bounds: (lo, hi) in 1-D, ((lo1, hi1), (lo2, hi2)) in 2-D.  Raises
        ValueError when any component differs by more than tol relative to
        max(1, |gradient|) at n random interior points.
        """
        rng = np.random.default_rng(seed)
        if self.dim == 1:
            lo, hi = bounds
            x = lo + (hi - lo) * rng.uniform(0.05, 0.95, size=n)
            step = 1e-7 * np.maximum(1.0, np.abs(x))
            fd = (self.value(x + step) - self.value(x - step)) / (2.0 * step)
            grad = np.asarray(self.gradient(x), dtype=float)
            err = np.abs(fd - grad) / np.maximum(1.0, np.abs(grad))
            if not np.all(np.isfinite(err)) or np.max(err) > tol:
                worst = int(np.argmax(err))
                raise ValueError(
                    "gradient disagrees with centered differences: "
                    f"x={x[worst]:.6g}, grad={grad[worst]:.6g}, fd={fd[worst]:.6g}"
                )
            return
        (lo1, hi1), (lo2, hi2) = bounds
        pts = np.column_stack(
            [
                lo1 + (hi1 - lo1) * rng.uniform(0.05, 0.95, size=n),
                lo2 + (hi2 - lo2) * rng.uniform(0.05, 0.95, size=n),
            ]
        )
        grad = np.asarray(self.gradient(pts), dtype=float)
        for comp in range(2):
            step = 1e-7 * np.maximum(1.0, np.abs(pts[:, comp]))
            shift = np.zeros_like(pts)
            shift[:, comp] = step
            fd = (self.value(pts + shift) - self.value(pts - shift)) / (2.0 * step)
            err = np.abs(fd - grad[:, comp]) / np.maximum(1.0, np.abs(grad[:, comp]))
            if not np.all(np.isfinite(err)) or np.max(err) > tol:
                worst = int(np.argmax(err))
                raise ValueError(
                    f"gradient component {comp + 1} disagrees with centered "
                    f"differences at {tuple(pts[worst])}"
                )


def h1_interpolant(exact: ExactSolution, space: DGSpace) -> CoarseField:
    """Continuous piecewise-linear interpolant embedded in the broken space.

    Each element's two dofs are the exact values at its endpoints, so every
    interface jump vanishes and the field is nodally coincident with u.
    Defined for 1-D linear spaces only.
    """
    if not isinstance(space.mesh, Mesh1D):
        raise ValueError("h1_interpolant is one-dimensional")
    if space.order != 1:
        raise ValueError(f"h1_interpolant needs p = 1, got p = {space.order}")
    coeffs = np.empty(space.ndofs)
    for e in range(space.mesh.n_elements):
        x0, x1 = space.mesh.element_bounds(e)
        coeffs[space.element_dofs(e)] = exact.value(np.array([x0, x1]))
    return CoarseField(space, coeffs)


def l2_projection(exact: ExactSolution, space: DGSpace) -> CoarseField:
    """Element-wise L2 projection constrained to the Dirichlet endpoint values.

    Interior elements carry plain local L2 projections; the first element's
    left endpoint dof and the last element's right endpoint dof are pinned to
    the exact values, and the remaining coefficients minimize the L2 error
    subject to those pins (the nodal basis makes the pins single-coefficient
    constraints).
    """
    if not isinstance(space.mesh, Mesh1D):
        raise ValueError("l2_projection is one-dimensional")
    rule = gauss_rule_1d(space.order + _PROJECTION_EXTRA)
    phi = space.basis.eval(rule.points)
    mass_ref = phi.T @ (phi * rule.weights[:, None])
    n_el = space.mesh.n_elements
    coeffs = np.empty(space.ndofs)
    for e in range(n_el):
        h = space.mesh.element_size(e)
        x = space.map_to_physical(e, rule.points)
        mass = mass_ref * (h / 2.0)
        load = phi.T @ (rule.weights * (h / 2.0) * exact.value(x))
        pinned: dict[int, float] = {}
        if e == 0:
            x0 = space.mesh.element_bounds(0)[0]
            pinned[0] = float(exact.value(np.array([x0]))[0])
        if e == n_el - 1:
            x1 = space.mesh.element_bounds(e)[1]
            pinned[space.order] = float(exact.value(np.array([x1]))[0])
        local = np.empty(space.dofs_per_element)
        free = [j for j in range(space.dofs_per_element) if j not in pinned]
        for j, val in pinned.items():
            local[j] = val
        if free:
            rhs = load[free]
            for j, val in pinned.items():
                rhs = rhs - mass[free, j] * val
            local[free] = np.linalg.solve(mass[np.ix_(free, free)], rhs)
        coeffs[space.element_dofs(e)] = local
    return CoarseField(space, coeffs)


def _require_uniform(mesh: Mesh1D) -> float:
    sizes = np.diff(mesh.vertices)
    h = float(sizes[0])
    if not np.allclose(sizes, h, rtol=1e-12, atol=0.0):
        raise ValueError(
            "the nodal-difference rule assumes equal element widths on "
            "neighboring elements; got a nonuniform mesh"
        )
    return h


def explicit_model_from(
    exact: ExactSolution,
    space: DGSpace,
    reference: CoarseField | str = NODAL_DIFFERENCE,
) -> Explicit:
    """Explicit interface data (and one-sided fine values) at interior facets.

    With a reference coarse field:  avg(u') = u(x) - avg(ref), avg(grad u')
    = grad u(x) - avg(grad ref), and the one-sided values u'(x+-) = u(x) -
    ref(x+-).  With the nodal-difference rule (uniform meshes only) the
    average coarse gradient of the nodally exact interpolant is the centered
    difference of exact nodal values, so avg(grad u') = grad u(x) -
    (u(x+h) - u(x-h)) / (2h) while avg(u') and the one-sided values vanish.
    """
    if not isinstance(space.mesh, Mesh1D):
        raise ValueError("explicit interface data is one-dimensional")
    interior = space.mesh.interior_facets()
    avg_uprime: dict[int, float] = {}
    avg_grad: dict[int, float] = {}
    left: dict[int, float] = {}
    right: dict[int, float] = {}
    if isinstance(reference, str):
        if reference != NODAL_DIFFERENCE:
            raise ValueError(f"unknown reference rule {reference!r}")
        h = _require_uniform(space.mesh)
        for fc in interior:
            x = fc.x[0]
            du = float(exact.gradient(np.array([x]))[0])
            u_p, u_m = exact.value(np.array([x + h, x - h]))
            avg_uprime[fc.index] = 0.0
            avg_grad[fc.index] = du - float(u_p - u_m) / (2.0 * h)
            left[fc.index] = 0.0
            right[fc.index] = 0.0
        return Explicit(avg_uprime, avg_grad, left, right)
    if reference.space is not space:
        raise ValueError("reference field must live on the given space")
    for fc in interior:
        x = fc.x[0]
        u = float(exact.value(np.array([x]))[0])
        du = float(exact.gradient(np.array([x]))[0])
        vl = reference.trace(fc, "left")
        vr = reference.trace(fc, "right")
        gl = reference.trace(fc, "left", deriv=1)
        gr = reference.trace(fc, "right", deriv=1)
        avg_uprime[fc.index] = u - 0.5 * (vl + vr)
        avg_grad[fc.index] = du - 0.5 * (gl + gr)
        left[fc.index] = u - vl
        right[fc.index] = u - vr
    return Explicit(avg_uprime, avg_grad, left, right)


@dataclass(frozen=True)
class DiagnosticsParams:
    """Knobs for fine_scale_diagnostics.

    eta_interior / eta_boundary: penalty factors per facet class, required
    for the 2-D loop integrals (1-D per-facet quantities are raw traces and
    need no penalty).  d: optional Taylor-matching distance.
    """

    eta_interior: float | None = None
    eta_boundary: float | None = None
    d: float | None = None


@dataclass(frozen=True)
class DiagnosticsReport:
    """Fine-scale identity diagnostics for a coarse field.

    1-D fields (None in 2-D), keyed by interior facet index:
      avg_uprime        avg of u' over the two one-sided traces
      avg_grad_uprime   avg of grad u'
      jump_ubar         jump of the coarse field, left minus right
      taylor_residual   |(u'+ - d n+ grad u'+) - (u'- - d n- grad u'-)|,
                        present when params.d is given
    and per element: moments[e][k] = integral of u' x^k, k = 0..max(p-2, 0).

    2-D fields (None in 1-D), keyed by element:
      loop_flux_coarse   per-element boundary loop of avg(grad u').n_K with
                         the penalty written on the coarse jump seen from K
                         (eta/h (ubar_K - ubar_other) inside, eta/h (ubar - u)
                         on the domain boundary).  Taking a constant test
                         function on K in the discrete equations shows this
                         loop vanishes identically for solved IP fields; it
                         equals the loop written with -eta/h jump(u') under
                         the transmission condition jump(ubar) = -jump(u').
      loop_flux_fine     the same loop with the penalty taken as
                         +eta/h jump(u') (jump(u') = u' on the domain
                         boundary, avg(grad u') = grad u' there).  The sign
                         convention found in print; it does NOT vanish and is
                         kept so both conventions stay on record.
      loop_avg_uprime    boundary loop of avg(u') over the element's interior
                         facets only (boundary facets carry a one-sided u',
                         not an interface average, and are excluded)
      element_uprime     integral of u' over the element
      flux_scale         max over elements of the loop of |avg(grad u').n| +
                         eta/h |jump(u')|, the natural magnitude against
                         which loop_flux_coarse is judged
    """

    dim: int
    avg_uprime: Mapping[int, float] | None = None
    avg_grad_uprime: Mapping[int, float] | None = None
    jump_ubar: Mapping[int, float] | None = None
    taylor_residual: Mapping[int, float] | None = None
    moments: Mapping[int, tuple[float, ...]] | None = None
    loop_flux_fine: Mapping[int, float] | None = None
    loop_flux_coarse: Mapping[int, float] | None = None
    loop_avg_uprime: Mapping[int, float] | None = None
    element_uprime: Mapping[int, float] | None = None
    flux_scale: float | None = None

    def table_row(self) -> tuple[float, float, float]:
        """(max |loop flux|, mean |loop avg u'|, mean |element u'|), 2-D."""
        if self.dim != 2:
            raise ValueError("table_row is a 2-D diagnostic")
        n = len(self.loop_flux_coarse)
        col1 = max(abs(v) for v in self.loop_flux_coarse.values())
        col2 = sum(abs(v) for v in self.loop_avg_uprime.values()) / n
        col3 = sum(abs(v) for v in self.element_uprime.values()) / n
        return (col1, col2, col3)


def _finite_or_raise(name: str, mapping: Mapping[int, float]) -> None:
    bad = [k for k, v in mapping.items() if not np.isfinite(v)]
    if bad:
        raise ValueError(f"diagnostics: non-finite {name} at {bad}")


def fine_scale_diagnostics(
    exact: ExactSolution,
    coarse: CoarseField,
    params: DiagnosticsParams = DiagnosticsParams(),
) -> DiagnosticsReport:
    """Evaluate the fine-scale identities for u' = u_exact - coarse."""
    mesh = coarse.space.mesh
    if isinstance(mesh, Mesh1D):
        return _diagnostics_1d(exact, coarse, params)
    if isinstance(mesh, TriMesh2D):
        return _diagnostics_2d(exact, coarse, params)
    raise ValueError(f"unsupported mesh type {type(mesh).__name__}")


def _diagnostics_1d(
    exact: ExactSolution, coarse: CoarseField, params: DiagnosticsParams
) -> DiagnosticsReport:
    space = coarse.space
    avg_uprime: dict[int, float] = {}
    avg_grad: dict[int, float] = {}
    jump_ubar: dict[int, float] = {}
    taylor: dict[int, float] = {}
    for fc in space.mesh.interior_facets():
        x = fc.x[0]
        u = float(exact.value(np.array([x]))[0])
        du = float(exact.gradient(np.array([x]))[0])
        vl = coarse.trace(fc, "left")
        vr = coarse.trace(fc, "right")
        gl = coarse.trace(fc, "left", deriv=1)
        gr = coarse.trace(fc, "right", deriv=1)
        avg_uprime[fc.index] = u - 0.5 * (vl + vr)
        avg_grad[fc.index] = du - 0.5 * (gl + gr)
        jump_ubar[fc.index] = vl - vr
        if params.d is not None:
            up_l, up_r = u - vl, u - vr
            gp_l, gp_r = du - gl, du - gr
            # left element is the + side with n+ = +1
            taylor[fc.index] = abs((up_l - params.d * gp_l) - (up_r + params.d * gp_r))
    rule = gauss_rule_1d(_MOMENT_POINTS)
    n_moments = max(space.order - 1, 1)
    moments: dict[int, tuple[float, ...]] = {}
    for e in range(space.mesh.n_elements):
        h = space.mesh.element_size(e)
        x = space.map_to_physical(e, rule.points)
        uprime = exact.value(x) - coarse.eval_element(e, rule.points)
        w = rule.weights * (h / 2.0)
        moments[e] = tuple(float(np.sum(w * uprime * x**k)) for k in range(n_moments))
    for name, data in (
        ("avg_uprime", avg_uprime),
        ("avg_grad_uprime", avg_grad),
        ("jump_ubar", jump_ubar),
        ("taylor_residual", taylor),
        ("moments", {e: max(map(abs, m)) for e, m in moments.items()}),
    ):
        _finite_or_raise(name, data)
    return DiagnosticsReport(
        dim=1,
        avg_uprime=avg_uprime,
        avg_grad_uprime=avg_grad,
        jump_ubar=jump_ubar,
        taylor_residual=taylor if params.d is not None else None,
        moments=moments,
    )


def _edge_points(facet: Facet, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map an n-point Gauss rule onto a 2-D facet; returns (points, weights)."""
    rule = gauss_rule_1d(n)
    a, b = facet.vertices
    pts = 0.5 * (1.0 - rule.points)[:, None] * a + 0.5 * (1.0 + rule.points)[:, None] * b
    return pts, rule.weights * (facet.measure / 2.0)


def _diagnostics_2d(
    exact: ExactSolution, coarse: CoarseField, params: DiagnosticsParams
) -> DiagnosticsReport:
    if params.eta_interior is None or params.eta_boundary is None:
        raise ValueError(
            "2-D diagnostics need a penalty factor per facet class "
            "(eta_interior and eta_boundary)"
        )
    space = coarse.space
    mesh = space.mesh
    n_el = mesh.n_elements
    loop_fine = dict.fromkeys(range(n_el), 0.0)
    loop_coarse = dict.fromkeys(range(n_el), 0.0)
    loop_avg = dict.fromkeys(range(n_el), 0.0)
    loop_scale = dict.fromkeys(range(n_el), 0.0)

    for facet in mesh.facets():
        pts, wts = _edge_points(facet, _EDGE_POINTS)
        u = exact.value(pts)
        grad_u = exact.gradient(pts)
        sides = [(facet.left, 1.0)]
        if not facet.is_boundary:
            sides.append((facet.right, -1.0))
        vals = {e: coarse.eval_points_2d(e, pts) for e, _ in sides}
        grads = {e: coarse.grad_points_2d(e, pts) for e, _ in sides}
        if facet.is_boundary:
            e = facet.left
            eta = params.eta_boundary
            uprime = u - vals[e]
            grad_n = (grad_u - grads[e]) @ facet.normal
            # boundary conventions: jump(u') = u', avg(grad u') = grad u';
            # the coarse-jump penalty against the Dirichlet datum is
            # eta/h (ubar - g) = -eta/h u' (the exact field equals the datum
            # on the boundary).  loop_avg skips boundary facets: u' here is a
            # one-sided trace, not an interface average.
            loop_fine[e] += float(np.sum(wts * (grad_n + (eta / facet.h) * uprime)))
            loop_coarse[e] += float(np.sum(wts * (grad_n - (eta / facet.h) * uprime)))
            loop_scale[e] += float(
                np.sum(wts * (np.abs(grad_n) + (eta / facet.h) * np.abs(uprime)))
            )
            continue
        eta = params.eta_interior
        el, er = facet.left, facet.right
        avg_uprime_vals = u - 0.5 * (vals[el] + vals[er])
        avg_grad_uprime = grad_u - 0.5 * (grads[el] + grads[er])
        for e, orientation in sides:
            n_k = orientation * facet.normal
            other = er if e == el else el
            jump_uprime = vals[other] - vals[e]  # u'_in - u'_out
            jump_ubar = vals[e] - vals[other]
            grad_n = avg_grad_uprime @ n_k
            loop_fine[e] += float(np.sum(wts * (grad_n + (eta / facet.h) * jump_uprime)))
            loop_coarse[e] += float(np.sum(wts * (grad_n + (eta / facet.h) * jump_ubar)))
            loop_avg[e] += float(np.sum(wts * avg_uprime_vals))
            loop_scale[e] += float(
                np.sum(wts * (np.abs(grad_n) + (eta / facet.h) * np.abs(jump_uprime)))
            )

    rule = triangle_rule(_ELEMENT_DEGREE)
    areas = mesh.areas()
    element_uprime = {}
    for e in range(n_el):
        pts = space.ref_to_phys_2d(e, rule.points)
        w = rule.weights * (2.0 * areas[e])
        uprime = exact.value(pts) - coarse.eval_points_2d(e, pts)
        element_uprime[e] = float(np.sum(w * uprime))

    for name, data in (
        ("loop_flux_fine", loop_fine),
        ("loop_flux_coarse", loop_coarse),
        ("loop_avg_uprime", loop_avg),
        ("element_uprime", element_uprime),
    ):
        _finite_or_raise(name, data)
    return DiagnosticsReport(
        dim=2,
        loop_flux_fine=loop_fine,
        loop_flux_coarse=loop_coarse,
        loop_avg_uprime=loop_avg,
        element_uprime=element_uprime,
        flux_scale=max(loop_scale.values()),
    )
