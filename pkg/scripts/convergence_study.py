#!/usr/bin/env python3
"""L2 convergence of the interior-penalty closure on a smooth 1-D problem.

Solves -u'' = pi^2 sin(pi x) on (0,1) with homogeneous strong Dirichlet
data for a range of mesh sizes and orders, prints the error table, and
reports the least-squares slope of log(error) against log(h).  The
penalty closure recovers the optimal rate p + 1.

Usage: python3 scripts/convergence_study.py [--eta ETA] [--orders 1 2]
"""
from __future__ import annotations

import argparse

import numpy as np

from vmsdg.basis_quadrature import gauss_rule_1d
from vmsdg.linsolve import solve
from vmsdg.mesh_spaces import CoarseField, DGSpace, uniform_mesh_1d
from vmsdg.weakforms import (
    InteriorPenalty,
    Poisson,
    ProblemSpec,
    Zero,
    assemble_poisson_vms,
)


def l2_error(fld: CoarseField, exact, n_points: int = 20) -> float:
    rule = gauss_rule_1d(n_points)
    space = fld.space
    total = 0.0
    for e in range(space.mesh.n_elements):
        h = space.mesh.element_size(e)
        x = space.map_to_physical(e, rule.points)
        diff = fld.eval_element(e, rule.points) - exact(x)
        total += float(np.sum(rule.weights * (h / 2.0) * diff**2))
    return float(np.sqrt(total))


def study(order: int, eta: float, n_values: tuple[int, ...] = (4, 8, 16, 32)):
    """Returns (errors, least-squares slope) over the mesh family."""
    exact = lambda x: np.sin(np.pi * x)  # noqa: E731
    forcing = lambda x: np.pi**2 * np.sin(np.pi * x)  # noqa: E731
    problem = ProblemSpec(Poisson(forcing), (0.0, 0.0))
    errors = []
    for n in n_values:
        space = DGSpace(uniform_mesh_1d(0.0, 1.0, n), order)
        system = assemble_poisson_vms(space, problem, InteriorPenalty(eta), Zero())
        errors.append(l2_error(CoarseField(space, solve(system).values), exact))
    slope = float(np.polyfit(np.log([1.0 / n for n in n_values]), np.log(errors), 1)[0])
    return errors, slope


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--eta", type=float, default=10.0)
    parser.add_argument("--orders", type=int, nargs="+", default=[1, 2])
    parser.add_argument("--n", type=int, nargs="+", default=[4, 8, 16, 32])
    args = parser.parse_args(argv)

    n_values = tuple(args.n)
    header = "p    " + "".join(f"n={n:<12d}" for n in n_values) + "slope"
    print(header)
    for order in args.orders:
        errors, slope = study(order, args.eta, n_values)
        row = f"{order:<5d}" + "".join(f"{err:<14.4e}" for err in errors)
        print(row + f"{slope:.3f}  (expected {order + 1})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
