"""vmsdg: discontinuous Galerkin solvers with pluggable fine-scale models.

The library assembles coarse-scale DG weak forms whose interface and
volumetric fine-scale terms are closed by interchangeable models (explicit
data, interior-penalty, upwind, residual-based), alongside the classical DG
formulations they reproduce, plus the projection/diagnostic machinery used by
the bundled numerical experiments (CLI: `vmsdg`).
"""

__version__ = "0.1.0"
