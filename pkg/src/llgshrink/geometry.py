"""Limit great circles of a profile: construction, distances, angle bounds.

The binormal limit ``B`` of an orbit and its parity image
``B^- = (-B1, B2, B3)`` are unit normals of two planes through the origin;
their intersections with the unit sphere are the great circles ``C^+`` and
``C^-`` that the tangent ``m(x)`` wraps around as ``x -> +/-inf``.  This
module builds that geometry, measures chordal distances from points on the
sphere to the circles, verifies the explicit distance envelope along a
stored trace, and checks the bound on the angle between the circles.

Angle conventions: both ``angle_normals = arccos(1 - 2 B1^2)`` (the angle
between the two normals) and ``angle_circles = arccos(2 B1^2 - 1)`` (its
supplement) are computed and reported, each from its own clamped arccos;
quantitative checks use the convention-free inequality on ``B1^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import BoundCheck, _grid, _mk_check
from .constants import LimitConstants, compute_constants
from .errors import DegenerateGeometryError, ParameterError
from .integrator import DEFAULT_BUDGET, Trace, _frames_array
from .params import Params, make_params

__all__ = [
    "AngleBoundReport",
    "AngleScanRow",
    "CircleGeom",
    "angle_bound_check",
    "angle_limit_scan",
    "build_geometry",
    "circle_report",
    "dist_bound_check",
    "dist_to_circle",
    "dist_to_plane",
]

_PARITY_M = np.array([1.0, -1.0, -1.0])


@dataclass(frozen=True, eq=False)
class CircleGeom:
    """Unit normals of the two limit planes and the angles between them.

    ``angle_normals = arccos(clamp(1 - 2 B1^2))`` is the angle between
    ``B_plus`` and ``B_minus``; ``angle_circles = arccos(clamp(2 B1^2 - 1))``
    is its supplement, the angle the two great circles open up to.
    """

    B_plus: np.ndarray
    B_minus: np.ndarray
    angle_normals: float
    angle_circles: float


@dataclass(frozen=True, eq=False)
class AngleBoundReport:
    """Verdict of the inter-circle angle bound for one orbit.

    The bound ``B1^2 <= pi beta^2 / (c^2 alpha)`` is non-vacuous only for
    ``c >= beta sqrt(pi/alpha)`` (``applicable``); when it holds, the
    equivalent angle form ``angle_circles >= arccos(-1 + 2 pi beta^2 /
    (c^2 alpha))`` is reported as ``angle_floor``.
    """

    c: float
    alpha: float
    b1_sq: float
    bound: float
    applicable: bool
    angle_circles: float
    angle_floor: float
    passed: bool


@dataclass(frozen=True, eq=False)
class AngleScanRow:
    """One extraction along an angle-limit scan."""

    c: float
    alpha: float
    b1: float
    angle_normals: float
    angle_circles: float
    degraded: bool


def _clamp(u: float) -> float:
    return min(1.0, max(-1.0, u))


def _unit3(v, name: str, tol: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ParameterError(f"{name} must be a 3-vector, got shape {v.shape}")
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > tol:
        raise ParameterError(
            f"{name} must be a unit vector within {tol:g}; |{name}| = {nrm:.9g}"
        )
    return v


def build_geometry(lc: LimitConstants) -> CircleGeom:
    """Limit-circle geometry from extracted constants.

    ``lc.B`` must be within 1e-3 of unit norm (it is renormalized
    internally); a norm below 0.5 signals an extraction failure and raises
    ``DegenerateGeometryError``.
    """
    B = np.asarray(lc.B, dtype=float)
    if B.shape != (3,):
        raise ParameterError(f"lc.B must be a 3-vector, got shape {B.shape}")
    nrm = float(np.linalg.norm(B))
    if nrm < 0.5:
        raise DegenerateGeometryError(
            f"binormal limit has norm {nrm:.6g} < 0.5; the extraction did not "
            "produce a usable direction"
        )
    if abs(nrm - 1.0) > 1e-3:
        raise ParameterError(
            f"binormal limit has norm {nrm:.9g}, more than 1e-3 away from 1; "
            "re-extract at higher accuracy"
        )
    b_plus = B / nrm
    b_minus = b_plus * np.array([-1.0, 1.0, 1.0])
    b1_sq = float(b_plus[0]) ** 2
    return CircleGeom(
        B_plus=b_plus,
        B_minus=b_minus,
        angle_normals=math.acos(_clamp(1.0 - 2.0 * b1_sq)),
        angle_circles=math.acos(_clamp(2.0 * b1_sq - 1.0)),
    )


def dist_to_plane(point, normal) -> float:
    """Distance from a point to the plane through the origin with ``normal``."""
    normal = _unit3(normal, "normal", 1e-9)
    point = np.asarray(point, dtype=float)
    if point.shape != (3,):
        raise ParameterError(f"point must be a 3-vector, got shape {point.shape}")
    return abs(float(point @ normal))


def dist_to_circle(point, normal) -> float:
    """Chordal distance from a unit vector to the great circle with ``normal``.

    For ``|point| = 1`` the nearest circle point gives
    ``dist^2 = 2 - 2 sqrt(1 - (point . normal)^2)``; the distance is always
    at most ``sqrt(2)`` times the plane distance.
    """
    normal = _unit3(normal, "normal", 1e-9)
    point = _unit3(point, "point", 1e-6)
    s = _clamp(float(point @ normal))
    return math.sqrt(max(2.0 - 2.0 * math.sqrt(max(1.0 - s * s, 0.0)), 0.0))


def dist_bound_check(trace: Trace, geom: CircleGeom, x_grid=None) -> BoundCheck:
    """Sweep ``dist(m(x), C^+-)`` against ``(30 sqrt2 beta/(c alpha^2)) |x| e^{-alpha x^2/4}``.

    Positive grid entries are measured against ``C^+``; negative entries are
    evaluated through the parity map (``m(-x) = (m1, -m2, -m3)(x)``) against
    ``C^-``.  All entries need ``|x| >= 1``.  The envelope constant is
    explicit, so no safety factor applies.
    """
    p = trace.params
    if x_grid is None:
        half = _grid(1.0, trace.x_max, 0.25)
        xs = np.concatenate([-half[::-1], half])
    else:
        xs = np.atleast_1d(np.asarray(x_grid, dtype=float))
        if xs.ndim != 1 or xs.size == 0:
            raise ParameterError("x_grid must be a non-empty 1-D array")
        if np.min(np.abs(xs)) < 1.0:
            raise ParameterError(
                "distance envelope applies for |x| >= 1; got "
                f"min |x| = {np.min(np.abs(xs)):g}"
            )
    rows = _frames_array(trace, np.abs(xs))
    m = rows[:, 0:3]
    neg = xs < 0.0
    m[neg] *= _PARITY_M
    defect = np.empty(xs.size)
    for i in range(xs.size):
        normal = geom.B_minus if neg[i] else geom.B_plus
        defect[i] = dist_to_circle(m[i], normal)
    envelope = (
        (30.0 * math.sqrt(2.0) * p.beta / (p.c * p.alpha**2))
        * np.abs(xs)
        * np.exp(-p.alpha * xs**2 / 4.0)
    )
    return _mk_check("circle_distance", xs, defect, envelope, 1.0)


def angle_bound_check(params: Params, lc: LimitConstants) -> AngleBoundReport:
    """Check ``B1^2 <= pi beta^2 / (c^2 alpha)`` (non-vacuous for large ``c``).

    Below the applicability threshold ``c = beta sqrt(pi/alpha)`` the bound
    exceeds 1 and carries no information; the report then passes vacuously
    with ``applicable=False``.  A 1e-12 additive slack absorbs floating-point
    residue at ``beta = 0``, where both sides vanish exactly.
    """
    if abs(params.c - lc.c) > 1e-12 * max(1.0, abs(lc.c)) or abs(
        params.alpha - lc.alpha
    ) > 1e-12:
        raise ParameterError(
            f"limit constants for (c={lc.c:g}, alpha={lc.alpha:g}) do not "
            f"match parameters (c={params.c:g}, alpha={params.alpha:g})"
        )
    geom = build_geometry(lc)
    b1_sq = float(geom.B_plus[0]) ** 2
    bound = math.pi * params.beta**2 / (params.c**2 * params.alpha)
    applicable = params.c >= params.beta * math.sqrt(math.pi / params.alpha)
    angle_floor = math.acos(_clamp(-1.0 + 2.0 * bound))
    if applicable:
        passed = (b1_sq <= bound + 1e-12) and (
            geom.angle_circles >= angle_floor - 1e-9
        )
    else:
        passed = True
    return AngleBoundReport(
        c=params.c,
        alpha=params.alpha,
        b1_sq=b1_sq,
        bound=bound,
        applicable=applicable,
        angle_circles=geom.angle_circles,
        angle_floor=angle_floor,
        passed=passed,
    )


def angle_limit_scan(
    *,
    alpha: float | None = None,
    c: float | None = None,
    grid,
    tol: float = 1e-5,
    budget: int = DEFAULT_BUDGET,
) -> list[AngleScanRow]:
    """Angles along a one-parameter family (fixed ``alpha`` or fixed ``c``).

    Exactly one of ``alpha``/``c`` must be given; ``grid`` supplies the
    other parameter's values.  Rows report ``angle_circles``, which should
    trend toward ``pi`` as ``c`` grows or ``alpha`` approaches 1 (reported
    as data, not asserted).  Degraded extractions are flagged per row.
    """
    if (alpha is None) == (c is None):
        raise ParameterError("fix exactly one of alpha or c; scan the other")
    values = [float(v) for v in grid]
    if not values:
        raise ParameterError("scan grid must be non-empty")
    rows = []
    for v in values:
        p = make_params(c if c is not None else v, alpha if alpha is not None else v)
        lc = compute_constants(p, tol, budget=budget, allow_degraded=True)
        geom = build_geometry(lc)
        rows.append(
            AngleScanRow(
                c=p.c,
                alpha=p.alpha,
                b1=float(geom.B_plus[0]),
                angle_normals=geom.angle_normals,
                angle_circles=geom.angle_circles,
                degraded=lc.degraded,
            )
        )
    return rows


def circle_report(
    geom: CircleGeom,
    *,
    distance: BoundCheck | None = None,
    angle: AngleBoundReport | None = None,
) -> dict:
    """JSON-ready geometry summary with optional bound-check attachments."""
    out = {
        "B_plus": [float(v) for v in geom.B_plus],
        "B_minus": [float(v) for v in geom.B_minus],
        "angle_normals": geom.angle_normals,
        "angle_circles": geom.angle_circles,
        "bound_checks": [],
    }
    if distance is not None:
        out["bound_checks"].append(
            {
                "bound_name": distance.name,
                "x_grid": [float(t) for t in distance.x_grid],
                "defect": [float(t) for t in distance.defect],
                "envelope": [float(t) for t in distance.envelope],
                "factor": distance.factor,
                "max_ratio": distance.max_ratio,
                "pass": bool(distance.passed),
                "flagged": bool(distance.flagged),
            }
        )
    if angle is not None:
        out["bound_checks"].append(
            {
                "bound_name": "angle_floor",
                "b1_sq": angle.b1_sq,
                "bound": angle.bound,
                "applicable": bool(angle.applicable),
                "angle_circles": angle.angle_circles,
                "angle_floor": angle.angle_floor,
                "pass": bool(angle.passed),
            }
        )
    return out
