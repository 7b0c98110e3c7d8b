"""Coarse-scale DG weak forms with pluggable fine-scale closure models."""
from __future__ import annotations

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
from vmsdg.weakforms.oned import (
    assemble_addiff_vms,
    assemble_classical,
    assemble_poisson_vms,
    collected_flux_matrix,
    elementwise_flux_matrix,
    jump_average_traces,
)

__all__ = [
    "AdvectionDiffusion",
    "BabuskaZlamal",
    "BaumannOden",
    "ConfigError",
    "Explicit",
    "InteriorPenalty",
    "InteriorPenaltyUpwind",
    "NIPG",
    "NoModel",
    "Poisson",
    "ProblemSpec",
    "ResidualBased",
    "Upwind",
    "UpwindAdvectionIP",
    "Zero",
    "assemble_addiff_vms",
    "assemble_classical",
    "assemble_poisson_vms",
    "collected_flux_matrix",
    "elementwise_flux_matrix",
    "jump_average_traces",
]
