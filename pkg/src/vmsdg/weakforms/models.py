"""Problem descriptions and fine-scale closure models.

The coarse-scale weak form leaves interface terms in the fine-scale traces
(average of u', average of grad u') and, for advection-diffusion, a
volumetric term (L* w, u') open.  A *model* closes those terms:

* interface models supply (or eliminate) the fine-scale trace averages on
  interior facets,
* volumetric models supply the element-interior fine-scale content.

Classical DG formulations (interior penalty and friends) are described by
their own marker types and assembled along an independent code path, so the
two routes can be compared term by term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping


class ConfigError(Exception):
    """Raised when a problem/model/space combination is not defined."""


# ---------------------------------------------------------------------------
# operators and problem description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Poisson:
    """-laplace(u) = f with unit diffusivity."""

    forcing: Callable


@dataclass(frozen=True)
class AdvectionDiffusion:
    """a du/dx - nu d2u/dx2 = f with constant coefficients (1-D only)."""

    a: float
    nu: float
    forcing: Callable

    def __post_init__(self) -> None:
        if not (self.nu > 0.0) or not math.isfinite(self.nu):
            raise ValueError(f"diffusivity nu must be positive and finite, got {self.nu}")
        if not math.isfinite(self.a):
            raise ValueError(f"advection speed a must be finite, got {self.a}")


@dataclass(frozen=True)
class ProblemSpec:
    """A boundary value problem: operator + Dirichlet data + BC treatment.

    ``bc_mode`` selects how Dirichlet data is imposed:

    * ``"strong"`` (1-D): endpoint degrees of freedom are constrained to the
      boundary values; ``dirichlet`` is the pair ``(u_left, u_right)``.
    * ``"weak"`` (2-D): boundary values enter through boundary-facet terms
      with penalty ``eta_boundary``; ``dirichlet`` is a callable of the
      physical coordinates.
    """

    operator: Poisson | AdvectionDiffusion
    dirichlet: tuple[float, float] | Callable
    bc_mode: str = "strong"
    eta_boundary: float | None = None

    def __post_init__(self) -> None:
        if self.bc_mode not in ("strong", "weak"):
            raise ValueError(f"bc_mode must be 'strong' or 'weak', got {self.bc_mode!r}")
        if self.bc_mode == "strong":
            if callable(self.dirichlet):
                raise ValueError("strong BCs take a (u_left, u_right) value pair, not a callable")
            ul, ur = self.dirichlet
            if not (math.isfinite(ul) and math.isfinite(ur)):
                raise ValueError(f"Dirichlet values must be finite, got {self.dirichlet}")
        else:
            if not callable(self.dirichlet):
                raise ValueError("weak BCs take a callable g(x) of the physical coordinates")
            if self.eta_boundary is None or not (self.eta_boundary > 0.0):
                raise ValueError("weak BCs require a positive eta_boundary penalty")


# ---------------------------------------------------------------------------
# interface models (close the fine-scale traces on interior facets)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoModel:
    """Drop every fine-scale interface term (set all fine traces to zero)."""


@dataclass(frozen=True)
class Explicit:
    """Prescribed fine-scale interface data, keyed by facet index.

    ``avg_uprime`` and ``avg_grad_uprime`` hold the facet averages of the
    fine solution and its gradient.  ``uprime_left`` / ``uprime_right``
    optionally hold the one-sided fine traces (value seen from the left /
    right element), which the residual-based volumetric model consumes; they
    must be given together or not at all.
    """

    avg_uprime: Mapping[int, float]
    avg_grad_uprime: Mapping[int, float]
    uprime_left: Mapping[int, float] | None = None
    uprime_right: Mapping[int, float] | None = None

    def __post_init__(self) -> None:
        for name in ("avg_uprime", "avg_grad_uprime", "uprime_left", "uprime_right"):
            data = getattr(self, name)
            if data is None:
                continue
            for key, value in data.items():
                if not math.isfinite(value):
                    raise ValueError(f"{name}[{key}] is not finite: {value}")
        if (self.uprime_left is None) != (self.uprime_right is None):
            raise ValueError("one-sided fine traces must be given for both sides or neither")

    def require_coverage(self, facet_indices: list[int]) -> None:
        """Check that every listed facet has data in both average maps."""
        for maps, name in ((self.avg_uprime, "avg_uprime"), (self.avg_grad_uprime, "avg_grad_uprime")):
            missing = [i for i in facet_indices if i not in maps]
            if missing:
                raise ConfigError(f"explicit model lacks {name} data for interior facets {missing}")


@dataclass(frozen=True)
class InteriorPenalty:
    """Fine traces chosen so the jump of the total solution is penalised.

    avg(u') = 0 and avg(grad u') = -(eta/h) * jump(u).  Doubles as the
    classical symmetric interior penalty formulation in
    :func:`vmsdg.weakforms.oned.assemble_classical`.
    """

    eta: float

    def __post_init__(self) -> None:
        if not (self.eta > 0.0) or not math.isfinite(self.eta):
            raise ValueError(f"penalty eta must be positive and finite, got {self.eta}")


@dataclass(frozen=True)
class Upwind:
    """Advective fine traces that turn the centered flux into the upwind flux.

    The advective interface terms a<jump(w), avg(u)> + a<jump(w), avg(u')>
    collapse to the upwind flux a<jump(w), u_upwind>, i.e. the model adds the
    penalty (|a|/2) <jump(w), jump(u)>.

    ``diffusive_flux`` optionally prescribes the diffusive facet flux of the
    *full* solution, as a mapping from interior-facet index to grad(u) at the
    facet.  When given, the interface diffusion is carried entirely by this
    data: the consistency term becomes the load nu*<jump(w), flux> and the
    symmetrization term drops because the jump of the full solution vanishes.
    Information then propagates strictly in the flow direction, element by
    element.  When ``None`` the usual implicit average-flux terms are kept.
    """

    diffusive_flux: Mapping[int, float] | None = None

    def __post_init__(self) -> None:
        if self.diffusive_flux is None:
            return
        object.__setattr__(self, "diffusive_flux", dict(self.diffusive_flux))
        for facet, value in self.diffusive_flux.items():
            if not math.isfinite(value):
                raise ValueError(
                    f"diffusive flux at facet {facet} must be finite, got {value}"
                )

    def require_coverage(self, facet_indices: Iterable[int]) -> None:
        """Raise ConfigError unless every given facet has a flux value."""
        if self.diffusive_flux is None:
            return
        missing = sorted(set(facet_indices) - set(self.diffusive_flux))
        if missing:
            raise ConfigError(
                f"upwind diffusive flux data missing for facets {missing}"
            )


@dataclass(frozen=True)
class InteriorPenaltyUpwind:
    """Upwind advective flux plus interior-penalty diffusive closure.

    avg(u') = 0 and nu*avg(grad u') = -(|a.n|/2 + nu*eta/h) * jump(u), which
    upwinds the advective flux and penalises the jump diffusively in one go.
    """

    eta: float

    def __post_init__(self) -> None:
        if not (self.eta > 0.0) or not math.isfinite(self.eta):
            raise ValueError(f"penalty eta must be positive and finite, got {self.eta}")


# ---------------------------------------------------------------------------
# volumetric models (close (L* w, u') on element interiors)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    """No volumetric fine-scale content."""


@dataclass(frozen=True)
class ResidualBased:
    """Element Green's function closure for advection-diffusion, p = 1.

    For linear elements the volumetric term reduces to

        (L* w, u')_K = (-a dw/dx, tau * R + nu*gamma0 * u'(x_left)
                                           - nu*gamma1 * u'(x_right))_K

    with R = f - a d(ubar)/dx the element residual and tau, gamma0, gamma1
    the moments of the element Green's function.  ``use_tau`` /
    ``use_gammas`` switch the two contributions independently.  The facet
    values u'(x_left/right) come from the interface model: interior-penalty
    type models imply u' = -jump(u)/2 seen from the right element and
    +... (sign per side) implicitly in terms of ubar, while explicit models
    supply them as data; they vanish at domain boundary facets.
    """

    use_tau: bool = True
    use_gammas: bool = True


# ---------------------------------------------------------------------------
# classical formulations (independent assembly path)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NIPG:
    """Non-symmetric interior penalty: flipped symmetrising term, penalty on."""

    eta: float

    def __post_init__(self) -> None:
        if not (self.eta > 0.0) or not math.isfinite(self.eta):
            raise ValueError(f"penalty eta must be positive and finite, got {self.eta}")


@dataclass(frozen=True)
class BaumannOden:
    """Non-symmetric formulation without a penalty term."""


@dataclass(frozen=True)
class BabuskaZlamal:
    """Volume term plus pure penalty; both consistency terms dropped."""

    eta: float

    def __post_init__(self) -> None:
        if not (self.eta > 0.0) or not math.isfinite(self.eta):
            raise ValueError(f"penalty eta must be positive and finite, got {self.eta}")


@dataclass(frozen=True)
class UpwindAdvectionIP:
    """Upwind advective flux (by trace selection) + symmetric IP diffusion."""

    eta: float

    def __post_init__(self) -> None:
        if not (self.eta > 0.0) or not math.isfinite(self.eta):
            raise ValueError(f"penalty eta must be positive and finite, got {self.eta}")
