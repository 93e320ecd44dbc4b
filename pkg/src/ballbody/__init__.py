"""
Compute r-ball bodies and r-ball hulls, and check their inequalities

For a finite set of points ``X`` and a radius ``r``, the *r-ball body*
``X^r`` is the intersection of all closed balls of radius ``r`` centered at
the points of ``X``, and the *r-ball hull* ``conv_r X`` is the intersection of
all radius-``r`` balls containing ``X``.  ``ballbody`` computes both exactly in
the plane (as polygons whose edges are circular arcs) and approximately in
higher dimensions, estimates their intrinsic volumes, runs seeded randomized
checks of the identities and inequalities these bodies satisfy (a
Blaschke–Santaló-type inequality for intrinsic volumes, the Minkowski-sum
duality ``A + (−A^r) = B[o, r]``, and a product inequality), and searches for
bodies of a given volume whose dual has the smallest intrinsic volume.

Everything is also available from the command line via the ``ballbody``
command.
"""

from __future__ import annotations
from .core import (
    DEFAULT_TOLERANCES,
    EMPTY,
    Arc,
    ArcPolygon,
    Ball,
    BallBodyResult,
    ConvergenceError,
    DomainError,
    Empty,
    PointSet,
    Region,
    SinglePoint,
    Tolerances,
    ball_intrinsic_volume,
    congruence_distance,
    dual_ball,
    hausdorff_distance,
    is_congruent,
    normalize_pose,
    omega,
)
from .nd import (
    NdBallBody,
    VkEstimate,
    ball_hull_nd,
    dual_nd,
    estimate_vk_nd,
    matching_ball,
    membership_nd,
    support_nd,
)
from .plane import (
    Lens,
    ball_body_2d,
    ball_hull_2d,
    contains_2d,
    dual_2d,
    intrinsic_volumes_2d,
    make_lens,
    support_2d,
)

__version__ = "0.1.0"
__author__ = "ballbody developers"
__license__ = "MIT"

__all__ = [
    "Arc",
    "ArcPolygon",
    "Ball",
    "BallBodyResult",
    "ConvergenceError",
    "DEFAULT_TOLERANCES",
    "DomainError",
    "EMPTY",
    "Empty",
    "Lens",
    "NdBallBody",
    "PointSet",
    "Region",
    "SinglePoint",
    "Tolerances",
    "VkEstimate",
    "ball_body_2d",
    "ball_hull_2d",
    "ball_hull_nd",
    "ball_intrinsic_volume",
    "congruence_distance",
    "contains_2d",
    "dual_2d",
    "dual_ball",
    "dual_nd",
    "estimate_vk_nd",
    "hausdorff_distance",
    "intrinsic_volumes_2d",
    "is_congruent",
    "make_lens",
    "matching_ball",
    "membership_nd",
    "normalize_pose",
    "omega",
    "support_2d",
    "support_nd",
]
