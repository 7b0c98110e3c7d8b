"""2-D assembly on triangle meshes: VMS Poisson form and classical IP.

Interior facets carry the interior-penalty fine-scale closure; Dirichlet
data enters weakly through boundary-facet terms (the fine-scale boundary
model), which makes the VMS form coincide with the classical symmetric
interior penalty method with Nitsche boundary conditions.  The two are
nevertheless assembled along independent code paths (jump/average rows vs
one-sided trace pairings) so the equivalence stays testable.

Facet orientation: ``facet.normal`` points away from the ``left`` element,
and the scalar jump coefficient is left-trace minus right-trace.
"""
from __future__ import annotations

import numpy as np

from vmsdg.basis_quadrature import gauss_rule_1d, triangle_rule
from vmsdg.linsolve import LinearSystem
from vmsdg.mesh_spaces import DGSpace, Facet
from vmsdg.weakforms.models import (
    ConfigError,
    InteriorPenalty,
    Poisson,
    ProblemSpec,
    Zero,
)

_VOLUME_DEGREE_EXTRA = 6
_EDGE_RULE_EXTRA = 9


def _edge_quadrature(facet: Facet, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Physical quadrature points (n, 2) and weights along a facet."""
    rule = gauss_rule_1d(n_points)
    a, b = facet.vertices
    pts = 0.5 * (a + b) + 0.5 * np.outer(rule.points, b - a)
    wts = rule.weights * (facet.measure / 2.0)
    return pts, wts


def _edge_tables(space: DGSpace, e: int, pts_phys: np.ndarray):
    """Basis values (n, k) and normal-projected gradients builder for element e."""
    ref = space.phys_to_ref_2d(e, pts_phys)
    vals = space.basis.eval(ref)
    gref = space.basis.grad(ref)
    jinv_t = np.linalg.inv(space.jacobian(e)).T
    gphys = np.einsum("nkd,ed->nke", gref, jinv_t)
    return vals, gphys


def _weighted_block(test: np.ndarray, trial: np.ndarray, wts: np.ndarray) -> np.ndarray:
    """sum_q w_q test[q, i] trial[q, j]."""
    return test.T @ (trial * wts[:, None])


def _check_2d_problem(problem: ProblemSpec) -> None:
    if not isinstance(problem.operator, Poisson):
        raise ConfigError("2-D assembly supports the Poisson operator only")
    if problem.bc_mode != "weak":
        raise ConfigError("2-D assembly imposes Dirichlet data weakly (bc_mode='weak')")


def _volume_assembly(space: DGSpace, problem: ProblemSpec, matrix: np.ndarray, rhs: np.ndarray) -> None:
    rule = triangle_rule(2 * space.order + _VOLUME_DEGREE_EXTRA)
    phi = space.basis.eval(rule.points)
    gref = space.basis.grad(rule.points)
    for e in range(space.mesh.n_elements):
        det = 2.0 * float(space.mesh.areas()[e])
        wq = rule.weights * det
        jinv_t = np.linalg.inv(space.jacobian(e)).T
        gphys = np.einsum("nkd,ed->nke", gref, jinv_t)
        dofs = space.element_dofs(e)
        matrix[np.ix_(dofs, dofs)] += np.einsum("nid,njd,n->ij", gphys, gphys, wq)
        pts = space.ref_to_phys_2d(e, rule.points)
        fv = np.broadcast_to(np.asarray(problem.operator.forcing(pts), dtype=float), (len(pts),))
        rhs[dofs] += phi.T @ (wq * fv)


def _dirichlet_values(problem: ProblemSpec, pts: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(problem.dirichlet(pts), dtype=float), (len(pts),))


def assemble_poisson_vms_2d(
    space: DGSpace,
    problem: ProblemSpec,
    interface_model,
    volumetric_model,
) -> LinearSystem:
    """VMS coarse-scale Poisson form on a triangle mesh.

    Interior facets use the interior-penalty fine-scale closure
    (avg(u') = 0, avg(grad u') = -(eta/h_f) jump(u)); boundary facets use the
    fine-scale boundary model that retrieves Nitsche-type weak Dirichlet
    conditions with penalty ``problem.eta_boundary``.
    """
    _check_2d_problem(problem)
    if not isinstance(volumetric_model, Zero):
        raise ConfigError("2-D assembly supports the Zero volumetric model only")
    if not isinstance(interface_model, InteriorPenalty):
        raise ConfigError(
            "2-D VMS assembly supports the InteriorPenalty interface model only; "
            f"got {interface_model!r}"
        )

    n = space.ndofs
    matrix = np.zeros((n, n))
    rhs = np.zeros(n)
    _volume_assembly(space, problem, matrix, rhs)

    eta = interface_model.eta
    eta_b = problem.eta_boundary
    n_edge = space.order + _EDGE_RULE_EXTRA
    for facet in space.mesh.facets():
        pts, wts = _edge_quadrature(facet, n_edge)
        vals_l, gphys_l = _edge_tables(space, facet.left, pts)
        gn_l = gphys_l @ facet.normal
        dofs_l = space.element_dofs(facet.left)
        if facet.is_boundary:
            # boundary fine-scale model: jump(u') = -(u - g), avg-type terms
            # single-sided; together they reproduce weak Dirichlet conditions
            pen = eta_b / facet.h
            matrix[np.ix_(dofs_l, dofs_l)] -= _weighted_block(vals_l, gn_l, wts)
            matrix[np.ix_(dofs_l, dofs_l)] -= _weighted_block(gn_l, vals_l, wts)
            matrix[np.ix_(dofs_l, dofs_l)] += pen * _weighted_block(vals_l, vals_l, wts)
            g = _dirichlet_values(problem, pts)
            rhs[dofs_l] += gn_l.T @ (wts * g) * (-1.0) + pen * (vals_l.T @ (wts * g))
            continue

        vals_r, gphys_r = _edge_tables(space, facet.right, pts)
        gn_r = gphys_r @ facet.normal
        dofs_r = space.element_dofs(facet.right)
        dofs = np.concatenate([dofs_l, dofs_r])
        jump = np.hstack([vals_l, -vals_r])
        avg_gn = 0.5 * np.hstack([gn_l, gn_r])
        idx = np.ix_(dofs, dofs)
        matrix[idx] -= _weighted_block(jump, avg_gn, wts)
        matrix[idx] -= _weighted_block(avg_gn, jump, wts)
        matrix[idx] += (eta / facet.h) * _weighted_block(jump, jump, wts)

    return LinearSystem(matrix, rhs, [])


def assemble_classical_ip_2d(space: DGSpace, problem: ProblemSpec, formulation: InteriorPenalty) -> LinearSystem:
    """Classical symmetric IP with Nitsche boundary terms, one-sided pairings."""
    _check_2d_problem(problem)

    n = space.ndofs
    matrix = np.zeros((n, n))
    rhs = np.zeros(n)
    _volume_assembly(space, problem, matrix, rhs)

    eta = formulation.eta
    eta_b = problem.eta_boundary
    n_edge = space.order + _EDGE_RULE_EXTRA
    for facet in space.mesh.facets():
        pts, wts = _edge_quadrature(facet, n_edge)
        vals_l, gphys_l = _edge_tables(space, facet.left, pts)
        gn_l = gphys_l @ facet.normal
        dofs_l = space.element_dofs(facet.left)
        if facet.is_boundary:
            pen = eta_b / facet.h
            matrix[np.ix_(dofs_l, dofs_l)] -= _weighted_block(vals_l, gn_l, wts)
            matrix[np.ix_(dofs_l, dofs_l)] -= _weighted_block(gn_l, vals_l, wts)
            matrix[np.ix_(dofs_l, dofs_l)] += pen * _weighted_block(vals_l, vals_l, wts)
            g = _dirichlet_values(problem, pts)
            rhs[dofs_l] += -(gn_l.T @ (wts * g)) + pen * (vals_l.T @ (wts * g))
            continue

        vals_r, gphys_r = _edge_tables(space, facet.right, pts)
        gn_r = gphys_r @ facet.normal
        dofs_r = space.element_dofs(facet.right)
        sides = ((dofs_l, vals_l, gn_l, +1.0), (dofs_r, vals_r, gn_r, -1.0))

        for dofs_w, t_w, _, sign_w in sides:
            for dofs_u, _, g_u, _ in sides:
                matrix[np.ix_(dofs_w, dofs_u)] -= 0.5 * sign_w * _weighted_block(t_w, g_u, wts)
        for dofs_w, _, g_w, _ in sides:
            for dofs_u, t_u, _, sign_u in sides:
                matrix[np.ix_(dofs_w, dofs_u)] -= 0.5 * sign_u * _weighted_block(g_w, t_u, wts)
        for dofs_w, t_w, _, sign_w in sides:
            for dofs_u, t_u, _, sign_u in sides:
                matrix[np.ix_(dofs_w, dofs_u)] += (
                    (eta / facet.h) * sign_w * sign_u * _weighted_block(t_w, t_u, wts)
                )

    return LinearSystem(matrix, rhs, [])
