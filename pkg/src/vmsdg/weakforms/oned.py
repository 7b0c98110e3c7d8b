"""1-D assembly: VMS coarse-scale forms and classical DG formulations.

Orientation conventions (fixed throughout the package): at an interior facet
the *left* element is the "+" side with outward normal n+ = +1, so the scalar
jump is left-trace minus right-trace and the average is the arithmetic mean.
Interface sums run over interior facets only; Dirichlet data is imposed
strongly on the endpoint nodal dofs, and fine scales vanish at the domain
boundary.

The classical formulations are assembled along a deliberately independent
code path (one-sided trace pairings instead of combined jump/average rows)
so VMS-vs-classical equivalence tests compare genuinely different
implementations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vmsdg.basis_quadrature import gauss_rule_1d
from vmsdg.greens import ADParams, fine_scale_gammas, fine_scale_tau
from vmsdg.linsolve import LinearSystem
from vmsdg.mesh_spaces import CoarseField, DGSpace, Facet
from vmsdg.weakforms.models import (
    AdvectionDiffusion,
    BabuskaZlamal,
    BaumannOden,
    ConfigError,
    Explicit,
    InteriorPenalty,
    InteriorPenaltyUpwind,
    NIPG,
    NoModel,
    Poisson,
    ProblemSpec,
    ResidualBased,
    Upwind,
    UpwindAdvectionIP,
    Zero,
)

# Extra Gauss points past the polynomial order so forcing terms are
# integrated essentially exactly for smooth data.
_VOLUME_RULE_EXTRA = 8


def jump_average_traces(field: CoarseField, facet: Facet) -> tuple[float, float, float, float]:
    """(avg, jump, grad_avg, grad_jump) of a coarse field at an interior facet.

    The jump is reported as the coefficient of n+ (left trace minus right
    trace); averages are plain arithmetic means of the two one-sided traces.
    """
    if facet.is_boundary:
        raise ValueError("jump/average traces are defined on interior facets only")
    vl = field.trace(facet, "left")
    vr = field.trace(facet, "right")
    gl = field.trace(facet, "left", deriv=1)
    gr = field.trace(facet, "right", deriv=1)
    return 0.5 * (vl + vr), vl - vr, 0.5 * (gl + gr), gl - gr


@dataclass(frozen=True)
class _FacetRows:
    """Trace rows of all dofs adjacent to an interior facet.

    Vectors have length 2k (left element dofs then right element dofs) and
    produce the facet trace quantities when dotted with the corresponding
    coefficient slice.
    """

    dofs: np.ndarray
    val_avg: np.ndarray
    val_jump: np.ndarray
    grad_avg: np.ndarray
    grad_jump: np.ndarray


def _facet_rows(space: DGSpace, facet: Facet) -> _FacetRows:
    basis = space.basis
    k = space.dofs_per_element
    tl = basis.eval(np.array([1.0]))[0]
    tr = basis.eval(np.array([-1.0]))[0]
    gl = basis.eval(np.array([1.0]), deriv=1)[0] * (2.0 / space.mesh.element_size(facet.left))
    gr = basis.eval(np.array([-1.0]), deriv=1)[0] * (2.0 / space.mesh.element_size(facet.right))
    zero = np.zeros(k)
    left_val = np.concatenate([tl, zero])
    right_val = np.concatenate([zero, tr])
    left_grad = np.concatenate([gl, zero])
    right_grad = np.concatenate([zero, gr])
    dofs = np.concatenate([space.element_dofs(facet.left), space.element_dofs(facet.right)])
    return _FacetRows(
        dofs=dofs,
        val_avg=0.5 * (left_val + right_val),
        val_jump=left_val - right_val,
        grad_avg=0.5 * (left_grad + right_grad),
        grad_jump=left_grad - right_grad,
    )


def _forcing_values(forcing, x: np.ndarray) -> np.ndarray:
    vals = np.asarray(forcing(x), dtype=float)
    return np.broadcast_to(vals, x.shape)


def _strong_constraints(space: DGSpace, problem: ProblemSpec) -> list[tuple[int, float]]:
    u_left, u_right = problem.dirichlet
    return [(0, float(u_left)), (space.ndofs - 1, float(u_right))]


def _volume_tables(space: DGSpace):
    """Reference-element quadrature tables shared by all elements."""
    rule = gauss_rule_1d(space.order + _VOLUME_RULE_EXTRA)
    phi = space.basis.eval(rule.points)
    dphi_ref = space.basis.eval(rule.points, deriv=1)
    return rule.points, rule.weights, phi, dphi_ref


def _check_1d_strong(space: DGSpace, problem: ProblemSpec) -> None:
    if problem.bc_mode != "strong":
        raise ConfigError("1-D assembly imposes Dirichlet data strongly (bc_mode='strong')")


# ---------------------------------------------------------------------------
# VMS Poisson
# ---------------------------------------------------------------------------


def assemble_poisson_vms(
    space: DGSpace,
    problem: ProblemSpec,
    interface_model,
    volumetric_model,
) -> LinearSystem:
    """Coarse-scale Poisson form with the given fine-scale closures.

    (grad w, grad u) - <jump(w), avg(grad u)> - <avg(grad w), jump(u)>
    plus the model-supplied fine-scale terms equals (w, f).  The volumetric
    fine-scale term vanishes identically for linear elements, which is what
    the Zero model encodes.
    """
    if not isinstance(problem.operator, Poisson):
        raise ConfigError("assemble_poisson_vms requires a Poisson operator")
    if space.mesh.dim == 2:
        from vmsdg.weakforms import twod

        return twod.assemble_poisson_vms_2d(space, problem, interface_model, volumetric_model)

    _check_1d_strong(space, problem)
    if isinstance(volumetric_model, ResidualBased):
        raise ConfigError("the residual-based volumetric model requires the advection-diffusion operator")
    if not isinstance(volumetric_model, Zero):
        raise ConfigError(f"unsupported volumetric model: {volumetric_model!r}")
    if isinstance(interface_model, Explicit):
        if space.order != 1:
            raise ConfigError("explicit interface data applies to linear elements only")
    elif isinstance(interface_model, (Upwind, InteriorPenaltyUpwind)):
        raise ConfigError("upwind interface models require the advection-diffusion operator")
    elif not isinstance(interface_model, (NoModel, InteriorPenalty)):
        raise ConfigError(f"unsupported interface model for the Poisson form: {interface_model!r}")

    interior = space.mesh.interior_facets()
    if isinstance(interface_model, Explicit):
        interface_model.require_coverage([f.index for f in interior])

    n = space.ndofs
    matrix = np.zeros((n, n))
    rhs = np.zeros(n)

    xi, w, phi, dphi_ref = _volume_tables(space)
    for e in range(space.mesh.n_elements):
        h = space.mesh.element_size(e)
        dphi = dphi_ref * (2.0 / h)
        wq = w * (h / 2.0)
        dofs = space.element_dofs(e)
        matrix[np.ix_(dofs, dofs)] += dphi.T @ (dphi * wq[:, None])
        fv = _forcing_values(problem.operator.forcing, space.map_to_physical(e, xi))
        rhs[dofs] += phi.T @ (wq * fv)

    for facet in interior:
        rows = _facet_rows(space, facet)
        idx = np.ix_(rows.dofs, rows.dofs)
        matrix[idx] -= np.outer(rows.val_jump, rows.grad_avg)
        matrix[idx] -= np.outer(rows.grad_avg, rows.val_jump)
        if isinstance(interface_model, InteriorPenalty):
            matrix[idx] += (interface_model.eta / facet.h) * np.outer(rows.val_jump, rows.val_jump)
        elif isinstance(interface_model, Explicit):
            theta = interface_model.avg_grad_uprime[facet.index]
            phi_val = interface_model.avg_uprime[facet.index]
            rhs[rows.dofs] += rows.val_jump * theta - rows.grad_jump * phi_val

    return LinearSystem(matrix, rhs, _strong_constraints(space, problem))


# ---------------------------------------------------------------------------
# VMS advection-diffusion
# ---------------------------------------------------------------------------


def _gamma_closure(interface_model, volumetric_model):
    """How the volumetric gamma terms obtain the one-sided fine values.

    Returns ``None`` (gammas off), ``("explicit", left_map, right_map)`` or
    ``("implicit",)``.
    """
    if not (isinstance(volumetric_model, ResidualBased) and volumetric_model.use_gammas):
        return None
    if isinstance(interface_model, Explicit):
        if interface_model.uprime_left is None:
            raise ConfigError(
                "gamma terms with an explicit interface model need one-sided "
                "fine-scale values (uprime_left / uprime_right)"
            )
        return ("explicit", interface_model.uprime_left, interface_model.uprime_right)
    if isinstance(interface_model, (InteriorPenalty, InteriorPenaltyUpwind)):
        return ("implicit",)
    raise ConfigError(
        "gamma terms need one-sided fine-scale values (explicit model) or a "
        "jump-based interface model (implicit closure); got "
        f"{interface_model!r}"
    )


def assemble_addiff_vms(
    space: DGSpace,
    problem: ProblemSpec,
    interface_model,
    volumetric_model,
) -> LinearSystem:
    """Coarse-scale advection-diffusion form with fine-scale closures.

    Coarse terms:  -(a grad w, u) + <jump(w) a, avg(u)> + nu (grad w, grad u)
    - nu <jump(w), avg(grad u)> - nu <avg(grad w), jump(u)>  =  (w, f),
    plus interface fine-scale terms
    <jump(w) a, avg(u')> - nu <jump(w), avg(grad u')> + nu <jump(grad w), avg(u')>
    and the volumetric term (L* w, u') closed per model:

    * ``Explicit``: the three interface terms move to the right-hand side as
      data; one-sided fine values feed the volumetric gamma terms.
    * ``InteriorPenalty``: avg(u') = 0, avg(grad u') = -(eta/h) jump(u).
    * ``Upwind``: the advective average terms collapse to the upwind flux,
      assembled in the equivalent penalty form a<jw, avg(u)> +
      (|a|/2)<jw, jump(u)>.  With prescribed ``diffusive_flux`` data the
      nu-scaled facet terms are carried entirely by that data: the
      consistency term becomes the load nu<jw, flux> and the symmetrization
      term drops (the jump of the full solution vanishes), so the coupling
      runs strictly in the flow direction.
    * ``InteriorPenaltyUpwind``: jump penalty (|a|/2 + nu eta/h).
    * ``ResidualBased`` volumetric (p = 1):
      (L* w, u')_K = (-a grad w, tau R + nu g0 u'(x_left) - nu g1 u'(x_right))_K
      with R = f - a grad(u) at the element midpoint; u' at element endpoints
      comes from explicit one-sided data or implicitly from +/- jump(u)/2,
      and vanishes at domain-boundary facets.
    """
    if not isinstance(problem.operator, AdvectionDiffusion):
        raise ConfigError("assemble_addiff_vms requires an AdvectionDiffusion operator")
    if space.mesh.dim != 1:
        raise ConfigError("advection-diffusion assembly is one-dimensional")
    _check_1d_strong(space, problem)

    if not isinstance(interface_model, (NoModel, Explicit, InteriorPenalty, Upwind, InteriorPenaltyUpwind)):
        raise ConfigError(f"unsupported interface model: {interface_model!r}")
    if isinstance(volumetric_model, ResidualBased):
        if space.order != 1:
            raise ConfigError("the residual-based volumetric model is defined for linear elements")
    elif not isinstance(volumetric_model, Zero):
        raise ConfigError(f"unsupported volumetric model: {volumetric_model!r}")
    gamma_closure = _gamma_closure(interface_model, volumetric_model)

    a = problem.operator.a
    nu = problem.operator.nu
    interior = space.mesh.interior_facets()
    if isinstance(interface_model, (Explicit, Upwind)):
        interface_model.require_coverage([f.index for f in interior])
    flux_is_data = isinstance(interface_model, Upwind) and interface_model.diffusive_flux is not None

    n = space.ndofs
    matrix = np.zeros((n, n))
    rhs = np.zeros(n)

    xi, w, phi, dphi_ref = _volume_tables(space)
    stiffness = {}
    grad_integral = {}
    for e in range(space.mesh.n_elements):
        h = space.mesh.element_size(e)
        dphi = dphi_ref * (2.0 / h)
        wq = w * (h / 2.0)
        dofs = space.element_dofs(e)
        stiffness[e] = dphi.T @ (dphi * wq[:, None])
        grad_integral[e] = dphi.T @ wq
        matrix[np.ix_(dofs, dofs)] += nu * stiffness[e] - a * (dphi.T @ (phi * wq[:, None]))
        fv = _forcing_values(problem.operator.forcing, space.map_to_physical(e, xi))
        rhs[dofs] += phi.T @ (wq * fv)

    for facet in interior:
        rows = _facet_rows(space, facet)
        idx = np.ix_(rows.dofs, rows.dofs)
        matrix[idx] += a * np.outer(rows.val_jump, rows.val_avg)
        if not flux_is_data:
            matrix[idx] -= nu * np.outer(rows.val_jump, rows.grad_avg)
            matrix[idx] -= nu * np.outer(rows.grad_avg, rows.val_jump)

        if isinstance(interface_model, Explicit):
            phi_val = interface_model.avg_uprime[facet.index]
            theta = interface_model.avg_grad_uprime[facet.index]
            rhs[rows.dofs] += (
                -a * rows.val_jump * phi_val
                + nu * rows.val_jump * theta
                - nu * rows.grad_jump * phi_val
            )
        elif isinstance(interface_model, InteriorPenalty):
            matrix[idx] += nu * (interface_model.eta / facet.h) * np.outer(rows.val_jump, rows.val_jump)
        elif isinstance(interface_model, Upwind):
            matrix[idx] += 0.5 * abs(a) * np.outer(rows.val_jump, rows.val_jump)
            if flux_is_data:
                rhs[rows.dofs] += nu * rows.val_jump * interface_model.diffusive_flux[facet.index]
        elif isinstance(interface_model, InteriorPenaltyUpwind):
            coeff = 0.5 * abs(a) + nu * interface_model.eta / facet.h
            matrix[idx] += coeff * np.outer(rows.val_jump, rows.val_jump)

    if isinstance(volumetric_model, ResidualBased):
        params = ADParams(a, nu)
        facets = space.mesh.facets()
        for e in range(space.mesh.n_elements):
            h = space.mesh.element_size(e)
            dofs = space.element_dofs(e)
            intd = grad_integral[e]
            if volumetric_model.use_tau:
                tau = fine_scale_tau(params, h)
                matrix[np.ix_(dofs, dofs)] += a * a * tau * stiffness[e]
                x_mid = 0.5 * sum(space.mesh.element_bounds(e))
                f_mid = float(_forcing_values(problem.operator.forcing, np.array([x_mid]))[0])
                rhs[dofs] += a * tau * f_mid * intd
            if gamma_closure is not None:
                g0, g1 = fine_scale_gammas(params, h)
                left_facet = facets[e]
                right_facet = facets[e + 1]
                if gamma_closure[0] == "explicit":
                    _, up_left_map, up_right_map = gamma_closure
                    # u' at the element's left endpoint is the trace seen
                    # from the right element of that facet, and vice versa.
                    up_l = 0.0 if left_facet.is_boundary else up_right_map[left_facet.index]
                    up_r = 0.0 if right_facet.is_boundary else up_left_map[right_facet.index]
                    rhs[dofs] += a * (nu * g0 * up_l - nu * g1 * up_r) * intd
                else:
                    # Implicit closure: u'(x_left) = +jump(u)/2 at the left
                    # facet (this element is its right side), u'(x_right) =
                    # -jump(u)/2 at the right facet; both enter the matrix
                    # with the same signed coefficient.
                    for facet, gamma in ((left_facet, g0), (right_facet, g1)):
                        if facet.is_boundary:
                            continue
                        rows = _facet_rows(space, facet)
                        matrix[np.ix_(dofs, rows.dofs)] += (
                            -a * nu * gamma * 0.5 * np.outer(intd, rows.val_jump)
                        )

    return LinearSystem(matrix, rhs, _strong_constraints(space, problem))


# ---------------------------------------------------------------------------
# classical formulations (independent code path)
# ---------------------------------------------------------------------------


def _one_sided_traces(space: DGSpace, facet: Facet):
    """Per-side trace vectors (value and physical gradient) and dof arrays."""
    basis = space.basis
    tl = basis.eval(np.array([1.0]))[0]
    tr = basis.eval(np.array([-1.0]))[0]
    gl = basis.eval(np.array([1.0]), deriv=1)[0] * (2.0 / space.mesh.element_size(facet.left))
    gr = basis.eval(np.array([-1.0]), deriv=1)[0] * (2.0 / space.mesh.element_size(facet.right))
    return (
        (space.element_dofs(facet.left), tl, gl),
        (space.element_dofs(facet.right), tr, gr),
    )


def assemble_classical(space: DGSpace, problem: ProblemSpec, formulation) -> LinearSystem:
    """Classical DG formulations, assembled from one-sided trace pairings.

    Poisson variants (volume term (grad w, grad u) throughout):

    * InteriorPenalty: - <jw, avg(gu)> - <avg(gw), ju> + (eta/h) <jw, ju>
    * NIPG:            - <jw, avg(gu)> + <avg(gw), ju> + (eta/h) <jw, ju>
    * BaumannOden:     - <jw, avg(gu)> + <avg(gw), ju>
    * BabuskaZlamal:                                   + (eta/h) <jw, ju>

    UpwindAdvectionIP (advection-diffusion): upwind advective flux by direct
    upstream-trace selection, plus nu-scaled symmetric IP diffusion with
    penalty nu*eta/h.
    """
    if space.mesh.dim == 2:
        from vmsdg.weakforms import twod

        if isinstance(formulation, InteriorPenalty):
            return twod.assemble_classical_ip_2d(space, problem, formulation)
        raise ConfigError("2-D classical assembly supports the InteriorPenalty formulation only")
    _check_1d_strong(space, problem)

    if isinstance(formulation, UpwindAdvectionIP):
        if not isinstance(problem.operator, AdvectionDiffusion):
            raise ConfigError("UpwindAdvectionIP requires an AdvectionDiffusion operator")
    elif isinstance(formulation, (InteriorPenalty, NIPG, BaumannOden, BabuskaZlamal)):
        if not isinstance(problem.operator, Poisson):
            raise ConfigError(f"{type(formulation).__name__} requires a Poisson operator")
    else:
        raise ConfigError(
            f"unsupported formulation: {formulation!r} (lifting-operator methods are out of scope)"
        )

    n = space.ndofs
    matrix = np.zeros((n, n))
    rhs = np.zeros(n)

    if isinstance(formulation, UpwindAdvectionIP):
        a = problem.operator.a
        nu = problem.operator.nu
    else:
        a = 0.0
        nu = 1.0

    xi, w, phi, dphi_ref = _volume_tables(space)
    for e in range(space.mesh.n_elements):
        h = space.mesh.element_size(e)
        dphi = dphi_ref * (2.0 / h)
        wq = w * (h / 2.0)
        dofs = space.element_dofs(e)
        matrix[np.ix_(dofs, dofs)] += nu * (dphi.T @ (dphi * wq[:, None]))
        if isinstance(formulation, UpwindAdvectionIP):
            matrix[np.ix_(dofs, dofs)] -= a * (dphi.T @ (phi * wq[:, None]))
        fv = _forcing_values(problem.operator.forcing, space.map_to_physical(e, xi))
        rhs[dofs] += phi.T @ (wq * fv)

    consistency = not isinstance(formulation, BabuskaZlamal)
    if isinstance(formulation, (NIPG, BaumannOden)):
        symmetry_sign = +1.0
    elif isinstance(formulation, BabuskaZlamal):
        symmetry_sign = 0.0
    else:
        symmetry_sign = -1.0
    penalty_eta = getattr(formulation, "eta", 0.0)

    for facet in space.mesh.interior_facets():
        (dofs_l, tl, gl), (dofs_r, tr, gr) = _one_sided_traces(space, facet)
        sides = ((dofs_l, tl, gl, +1.0), (dofs_r, tr, gr, -1.0))

        if consistency:
            # - nu <jump(w), avg(grad u)>: jump picks the signed value trace,
            # the average weights each gradient trace by one half.
            for dofs_w, t_w, _, sign_w in sides:
                for dofs_u, _, g_u, _ in sides:
                    matrix[np.ix_(dofs_w, dofs_u)] -= nu * 0.5 * sign_w * np.outer(t_w, g_u)
        if symmetry_sign != 0.0:
            # symmetry_sign * nu <avg(grad w), jump(u)>
            for dofs_w, _, g_w, _ in sides:
                for dofs_u, t_u, _, sign_u in sides:
                    matrix[np.ix_(dofs_w, dofs_u)] += (
                        symmetry_sign * nu * 0.5 * sign_u * np.outer(g_w, t_u)
                    )
        if penalty_eta:
            # nu (eta/h) <jump(w), jump(u)>
            for dofs_w, t_w, _, sign_w in sides:
                for dofs_u, t_u, _, sign_u in sides:
                    matrix[np.ix_(dofs_w, dofs_u)] += (
                        nu * (penalty_eta / facet.h) * sign_w * sign_u * np.outer(t_w, t_u)
                    )
        if isinstance(formulation, UpwindAdvectionIP) and a != 0.0:
            # a <jump(w), u_upwind>: the upstream trace is the left one for
            # a > 0 (flow left-to-right across the facet), else the right.
            dofs_up, t_up = (dofs_l, tl) if a > 0.0 else (dofs_r, tr)
            for dofs_w, t_w, _, sign_w in sides:
                matrix[np.ix_(dofs_w, dofs_up)] += a * sign_w * np.outer(t_w, t_up)

    return LinearSystem(matrix, rhs, _strong_constraints(space, problem))


# ---------------------------------------------------------------------------
# flux-collection identity (two code paths for the same bilinear form)
# ---------------------------------------------------------------------------


def collected_flux_matrix(space: DGSpace) -> np.ndarray:
    """- sum over interior facets of <jump(w), avg(grad u)>, via jump/avg rows."""
    n = space.ndofs
    matrix = np.zeros((n, n))
    for facet in space.mesh.interior_facets():
        rows = _facet_rows(space, facet)
        matrix[np.ix_(rows.dofs, rows.dofs)] -= np.outer(rows.val_jump, rows.grad_avg)
    return matrix


def elementwise_flux_matrix(space: DGSpace) -> np.ndarray:
    """The same bilinear form written before flux collection.

    sum over interior facets of <avg(w), jump(grad u)> minus the sum over
    elements of their endpoint boundary terms <w, grad(u) . n_K>, the latter
    restricted to endpoints lying on interior facets (domain-boundary terms
    belong to the BC treatment, not to interelement flux exchange).
    """
    n = space.ndofs
    matrix = np.zeros((n, n))
    basis = space.basis
    facets = space.mesh.facets()

    for facet in space.mesh.interior_facets():
        (dofs_l, tl, gl), (dofs_r, tr, gr) = _one_sided_traces(space, facet)
        # <avg(w), jump(grad u)> = <(wl+wr)/2, gl - gr>
        matrix[np.ix_(dofs_l, dofs_l)] += 0.5 * np.outer(tl, gl)
        matrix[np.ix_(dofs_l, dofs_r)] -= 0.5 * np.outer(tl, gr)
        matrix[np.ix_(dofs_r, dofs_l)] += 0.5 * np.outer(tr, gl)
        matrix[np.ix_(dofs_r, dofs_r)] -= 0.5 * np.outer(tr, gr)

    t_minus = basis.eval(np.array([-1.0]))[0]
    t_plus = basis.eval(np.array([1.0]))[0]
    g_minus = basis.eval(np.array([-1.0]), deriv=1)[0]
    g_plus = basis.eval(np.array([1.0]), deriv=1)[0]
    for e in range(space.mesh.n_elements):
        dofs = space.element_dofs(e)
        scale = 2.0 / space.mesh.element_size(e)
        # left endpoint, outward normal n_K = -1
        if not facets[e].is_boundary:
            matrix[np.ix_(dofs, dofs)] -= np.outer(t_minus, g_minus * scale) * (-1.0)
        # right endpoint, outward normal n_K = +1
        if not facets[e + 1].is_boundary:
            matrix[np.ix_(dofs, dofs)] -= np.outer(t_plus, g_plus * scale) * (+1.0)
    return matrix
