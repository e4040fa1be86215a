"""Quandle cocycle invariants of knotted 2-foams.

The package is organized around the pipeline: finite G-families of quandles
(`algebra`), the chain/cocycle machinery for their associated quandles
(`homology`), colorings of trivalent spatial-graph diagrams (`diagrams`),
and movies of diagrams presenting knotted foams together with the
triple-point state sum (`foam`).  `cli` exposes everything on the command
line.
"""

from foamcocycle.algebra import (
    GFamilyTable,
    GroupTable,
    QuandleTable,
    ValidationReport,
    associated_quandle,
    check_gfamily_axioms,
    check_quandle_axioms,
    linear_gfamily,
    r_tilde,
    validate_group,
)
from foamcocycle.homology import (
    BlockGenerator,
    Chain,
    CocycleTable,
    boundary,
    boundary_chain,
    lifted_theta,
    mochizuki_theta,
    verify_cocycle_conditions,
    verify_oriented_conditions,
)

__all__ = [
    "GFamilyTable",
    "GroupTable",
    "QuandleTable",
    "ValidationReport",
    "associated_quandle",
    "check_gfamily_axioms",
    "check_quandle_axioms",
    "linear_gfamily",
    "r_tilde",
    "validate_group",
    "BlockGenerator",
    "Chain",
    "CocycleTable",
    "boundary",
    "boundary_chain",
    "lifted_theta",
    "mochizuki_theta",
    "verify_cocycle_conditions",
    "verify_oriented_conditions",
]

__version__ = "0.1.0"
