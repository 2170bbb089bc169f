"""Constructors for delayed-CSIT DoF regions, corner points, and plans.

Everything here is exact: antenna counts are integers, all region and
point coordinates are ``fractions.Fraction``.  A point is a plain tuple of
Fractions of length K.

Contents:

* the K-user permutation outer bound and its redundancy-reduced region,
* the two-user region (two weighted-sum lines L1, L2 and their corner Q),
* the equal-antenna three-user region (both branches),
* sum-DoF closed form and the perfect/no-CSIT scalar benchmarks,
* the fixed-d3 plane slice of the three-user region with its named
  special points, and
* exact time-sharing decompositions of any point of the three-user region
  into directly achievable operating points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations

from .exactgeom import (
    DoFRegion,
    GeometryError,
    HalfSpace,
    UnboundedRegionError,
    contains,
    is_bounded,
    rat,
    rat_str,
    remove_redundant,
    solve_square,
    vertex_enumerate,
)

__all__ = [
    "AntennaConfig",
    "DominantFace",
    "PlaneSlice",
    "PlanComponent",
    "AchievabilityPlan",
    "ThreeUserScopeError",
    "SOURCE_TWO_USER",
    "SOURCE_SINGLE_USER",
    "SOURCE_TIME_DIVISION",
    "SOURCE_EXTERNAL",
    "permutation_inequalities",
    "outer_bound_region",
    "two_user_region",
    "three_user_region",
    "point_Q",
    "sum_dof_closed_form",
    "benchmark_sum_dof",
    "plane_slice",
    "achievability_plan",
    "convex_decompose_2d",
    "region_document",
    "plan_document",
    "plan_to_csv",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class ThreeUserScopeError(GeometryError):
    """Raised for three-user antenna setups outside M <= 2N."""


@dataclass(frozen=True)
class AntennaConfig:
    """Broadcast channel dimensioning: M transmit antennas, K receivers.

    Receive antenna counts are sorted non-increasing: N1 >= ... >= NK > 0.
    """

    M: int
    N: tuple

    def __post_init__(self):
        object.__setattr__(self, "N", tuple(int(n) for n in self.N))
        if self.M < 1:
            raise ValueError("M must be a positive integer")
        if not self.N:
            raise ValueError("need at least one receiver")
        if any(n < 1 for n in self.N):
            raise ValueError("receive antenna counts must be positive")
        if any(a < b for a, b in zip(self.N, self.N[1:])):
            raise ValueError("N must be sorted non-increasing: %r" % (self.N,))

    @property
    def K(self) -> int:
        return len(self.N)


def permutation_inequalities(config: AntennaConfig):
    """The raw outer-bound inequalities, one per user permutation.

    For permutation pi, the inequality reads
    sum_i d_{pi(i)} / min(M, N_{pi(i)} + ... + N_{pi(K)}) <= 1.
    """
    k = config.K
    out = []
    for pi in permutations(range(k)):
        coeffs = [_ZERO] * k
        for i in range(k):
            tail = sum(config.N[pi[j]] for j in range(i, k))
            coeffs[pi[i]] = Fraction(1, min(config.M, tail))
        out.append(HalfSpace(tuple(coeffs), _ONE))
    return out

def outer_bound_region(config: AntennaConfig) -> DoFRegion:
    """Outer bound on the delayed-CSIT DoF region, redundancy-reduced."""
    raw = []
    seen = set()
    for hs in permutation_inequalities(config):
        if hs not in seen:
            seen.add(hs)
            raw.append(hs)
    return remove_redundant(DoFRegion(config.K, tuple(raw)))


def _assert_bounded(region: DoFRegion) -> DoFRegion:
    if not is_bounded(region):
        raise UnboundedRegionError("constructed region is unbounded")
    return region


def two_user_region(M: int, N1: int, N2: int) -> DoFRegion:
    """Two-user delayed-CSIT region: lines L1 and L2.

    L1: d1/min(M,N1+N2) + d2/min(M,N2) <= 1
    L2: d1/min(M,N1)    + d2/min(M,N1+N2) <= 1
    """
    if not 1 <= N2 <= N1:
        raise ValueError("need N1 >= N2 >= 1")
    if M < 1:
        raise ValueError("need M >= 1")
    l1 = HalfSpace((Fraction(1, min(M, N1 + N2)), Fraction(1, min(M, N2))), _ONE)
    l2 = HalfSpace((Fraction(1, min(M, N1)), Fraction(1, min(M, N1 + N2))), _ONE)
    return _assert_bounded(DoFRegion(2, (l1, l2)))


def three_user_region(M: int, N: int) -> DoFRegion:
    """Equal-antenna three-user delayed-CSIT region.

    M <= N gives the no-CSIT simplex d1+d2+d3 <= M; N < M <= 2N gives the
    three cyclic inequalities d_i + d_j + (M/N) d_k <= M.
    """
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    if M > 2 * N:
        raise ThreeUserScopeError("three-user region requires M <= 2N, got M=%d N=%d" % (M, N))
    if M <= N:
        return _assert_bounded(DoFRegion(3, (HalfSpace((_ONE, _ONE, _ONE), Fraction(M)),)))
    ratio = Fraction(M, N)
    rows = []
    for k in range(3):
        coeffs = [_ONE, _ONE, _ONE]
        coeffs[k] = ratio
        rows.append(HalfSpace(tuple(coeffs), Fraction(M)))
    return _assert_bounded(DoFRegion(3, tuple(rows)))


@dataclass(frozen=True)
class DominantFace:
    """Degenerate corner for M <= N1: the single binding line of the region.

    ``line`` holds the face with equality understood; ``endpoints`` are the
    two single-user corners it joins.
    """

    line: HalfSpace
    endpoints: tuple


def point_Q(M: int, N1: int, N2: int):
    """Corner point Q of the two-user region, or its degenerate face.

    N1 < M < N1+N2:  Q = (M N1 (M-N2), M N2 (M-N1)) / (N1(M-N2) + M(M-N1))
    M >= N1+N2:      Q = (N1^2 (N1+N2), N2^2 (N1+N2)) / (N1^2 + N2^2 + N1 N2)
    M <= N1:         the region's dominant face (time division suffices).
    """
    if not 1 <= N2 <= N1:
        raise ValueError("need N1 >= N2 >= 1")
    if M <= N1:
        line = HalfSpace((Fraction(1, min(M, N1 + N2)), Fraction(1, min(M, N2))), _ONE)
        ends = ((Fraction(min(M, N1)), _ZERO), (_ZERO, Fraction(min(M, N2))))
        return DominantFace(line, ends)
    if M < N1 + N2:
        den = N1 * (M - N2) + M * (M - N1)
        return (Fraction(M * N1 * (M - N2), den), Fraction(M * N2 * (M - N1), den))
    den = N1 * N1 + N2 * N2 + N1 * N2
    return (Fraction(N1 * N1 * (N1 + N2), den), Fraction(N2 * N2 * (N1 + N2), den))


def sum_dof_closed_form(K: int, N: int) -> Fraction:
    """Sum-DoF K*N / (1 + 1/2 + ... + 1/K), valid for M >= K*N."""
    if K < 1 or N < 1:
        raise ValueError("need K >= 1 and N >= 1")
    harmonic = sum((Fraction(1, i) for i in range(1, K + 1)), _ZERO)
    return Fraction(K * N) / harmonic


def benchmark_sum_dof(config: AntennaConfig, csit: str) -> Fraction:
    """Scalar sum-DoF comparators: perfect CSIT and no CSIT."""
    if csit == "perfect":
        return Fraction(min(config.M, sum(config.N)))
    if csit == "none":
        return Fraction(min(config.M, max(config.N)))
    raise ValueError("csit must be 'perfect' or 'none', got %r" % (csit,))


# ---------------------------------------------------------------------------
# Three-user plane-slice geometry at fixed d3
# ---------------------------------------------------------------------------

_SPECIAL_NAMES = ("P01", "P02", "P12", "P0d1", "P0d2", "P1d1", "P2d2")


@dataclass(frozen=True)
class PlaneSlice:
    """The (d1,d2) cross-section of the three-user region at fixed d3.

    ``bounds`` maps L0/L1/L2 to 2-D half-spaces, ``region`` is the slice
    polygon, ``special_points`` maps the named line/axis intersections to
    full 3-D points (None when the intersection falls outside the slice),
    and ``redundant_bounds`` lists which of L0/L1/L2 the others imply.
    """

    M: int
    N: int
    d3: Fraction
    bounds: dict
    region: DoFRegion
    special_points: dict
    redundant_bounds: frozenset


def _slice_bounds(M: int, N: int, d3: Fraction):
    ratio = Fraction(M, N)
    return {
        "L0": HalfSpace((_ONE, _ONE), Fraction(M) - ratio * d3),
        "L1": HalfSpace((ratio, _ONE), Fraction(M) - d3),
        "L2": HalfSpace((_ONE, ratio), Fraction(M) - d3),
    }


def d3_max(M: int, N: int) -> Fraction:
    """Largest feasible d3 in the slice family: MN/(M+N)."""
    return Fraction(M * N, M + N)


def d3_mid(M: int, N: int) -> Fraction:
    """The symmetric-corner height MN/(M+2N) (P12 sits on all three lines)."""
    return Fraction(M * N, M + 2 * N)


def plane_slice(M: int, N: int, d3) -> PlaneSlice:
    """Slice S(d3) of the three-user region, with named special points."""
    if not N < M <= 2 * N:
        raise ThreeUserScopeError("plane slice requires N < M <= 2N, got M=%d N=%d" % (M, N))
    d3 = rat(d3)
    if not _ZERO <= d3 <= d3_max(M, N):
        raise ValueError(
            "d3=%s outside [0, %s]" % (rat_str(d3), rat_str(d3_max(M, N)))
        )
    bounds = _slice_bounds(M, N, d3)
    region = DoFRegion(2, (bounds["L0"], bounds["L1"], bounds["L2"]))
    ratio = Fraction(M, N)
    m = Fraction(M)
    p12 = Fraction(N, M + N) * (m - d3)
    candidates = {
        # line-line intersections
        "P01": (d3, m - (1 + ratio) * d3),
        "P02": (m - (1 + ratio) * d3, d3),
        "P12": (p12, p12),
        # line-axis intersections
        "P0d1": (m - ratio * d3, _ZERO),
        "P0d2": (_ZERO, m - ratio * d3),
        "P1d1": ((m - d3) / ratio, _ZERO),
        "P2d2": (_ZERO, (m - d3) / ratio),
    }
    special = {}
    for name in _SPECIAL_NAMES:
        x, y = candidates[name]
        if x >= 0 and y >= 0 and contains(region, (x, y)):
            special[name] = (x, y, d3)
        else:
            special[name] = None
    redundant = frozenset(
        name
        for name in ("L0", "L1", "L2")
        if bounds[name] not in remove_redundant(region).halfspaces
    )
    return PlaneSlice(M, N, d3, bounds, region, special, redundant)


# ---------------------------------------------------------------------------
# Achievability plans: exact convex decomposition into operating points
# ---------------------------------------------------------------------------

SOURCE_TWO_USER = "two-user-scheme"
SOURCE_SINGLE_USER = "single-user"
SOURCE_TIME_DIVISION = "time-division"
SOURCE_EXTERNAL = "external-abdoli"


@dataclass(frozen=True)
class PlanComponent:
    """One time-shared operating point: where it runs, for how long, and how."""

    point: tuple
    weight: Fraction
    source: str
    users: tuple


@dataclass(frozen=True)
class AchievabilityPlan:
    """Exact convex decomposition of ``target``: sum w_i p_i == target."""

    target: tuple
    components: tuple

    def weighted_sum(self):
        k = len(self.target)
        total = [_ZERO] * k
        for comp in self.components:
            for i in range(k):
                total[i] += comp.weight * comp.point[i]
        return tuple(total)

    def total_weight(self) -> Fraction:
        return sum((c.weight for c in self.components), _ZERO)


def convex_decompose_2d(target, corners):
    """Write a 2-D point as an exact convex combination of given corners.

    Deterministic: corners are scanned in sorted order; the first single
    corner, segment, or triangle that contains the target wins.  Returns
    [(corner, weight), ...] with positive rational weights summing to 1.
    Raises GeometryError if the target is outside the hull.
    """
    tx, ty = rat(target[0]), rat(target[1])
    pts = sorted({(rat(x), rat(y)) for x, y in corners})
    for p in pts:
        if p == (tx, ty):
            return [(p, _ONE)]
    for a, b in combinations(pts, 2):
        ux, uy = b[0] - a[0], b[1] - a[1]
        wx, wy = tx - a[0], ty - a[1]
        if ux * wy - uy * wx != 0:
            continue
        if ux != 0:
            lam = wx / ux
        elif uy != 0:
            lam = wy / uy
        else:
            continue
        if 0 <= lam <= 1 and (a[0] + lam * ux, a[1] + lam * uy) == (tx, ty):
            out = [(a, 1 - lam), (b, lam)]
            return [(p, w) for p, w in out if w > 0]
    for a, b, c in combinations(pts, 3):
        mat = ((a[0], b[0], c[0]), (a[1], b[1], c[1]), (_ONE, _ONE, _ONE))
        sol = solve_square(mat, (tx, ty, _ONE))
        if sol is None:
            continue
        if all(w >= 0 for w in sol):
            return [(p, w) for p, w in zip((a, b, c), sol) if w > 0]
    raise GeometryError("point (%s, %s) is not in the hull of the corners" % (rat_str(tx), rat_str(ty)))


@lru_cache(maxsize=None)
def _pair_corners(M: int, N: int):
    """Vertices of the equal-antenna two-user region (plans reuse these a lot)."""
    return tuple(vertex_enumerate(two_user_region(M, N, N)))


def _embed(pair_values, axes, k=3):
    point = [_ZERO] * k
    for axis, value in zip(axes, pair_values):
        point[axis] = value
    return tuple(point)


class _PlanBuilder:
    def __init__(self, M, N):
        self.M = M
        self.N = N
        self.q = d3_max(M, N)  # two-user corner height MN/(M+N)
        self.b = d3_mid(M, N)  # symmetric corner MN/(M+2N)
        self.parts = {}

    def add(self, weight, point, source, users):
        if weight == 0:
            return
        key = (point, source, users)
        self.parts[key] = self.parts.get(key, _ZERO) + weight

    def add_origin(self, weight):
        self.add(weight, (_ZERO, _ZERO, _ZERO), SOURCE_TIME_DIVISION, ())

    def add_single(self, weight, user):
        self.add(weight, _embed((Fraction(self.N),), (user,)), SOURCE_SINGLE_USER, (user,))

    def add_two_user(self, weight, users):
        self.add(weight, _embed((self.q, self.q), users), SOURCE_TWO_USER, users)

    def add_abdoli(self, weight):
        self.add(weight, (self.b, self.b, self.b), SOURCE_EXTERNAL, (0, 1, 2))

    def add_pair_point(self, weight, users, value_first, value_second):
        """Point (value_first, value_second) of the two-user region on ``users``."""
        corners = _pair_corners(self.M, self.N)
        for corner, w in convex_decompose_2d((value_first, value_second), corners):
            if corner == (_ZERO, _ZERO):
                self.add_origin(weight * w)
            elif corner[1] == 0:
                self.add_single(weight * w, users[0])
            elif corner[0] == 0:
                self.add_single(weight * w, users[1])
            else:
                self.add_two_user(weight * w, users)


def achievability_plan(M: int, N: int, target) -> AchievabilityPlan:
    """Exact time-sharing decomposition of a three-user DoF point.

    The target is sliced at its smallest coordinate (at most MN/(M+N) for
    any feasible point), decomposed inside that plane over the slice
    corners, and each corner is expanded into directly achievable points:
    two-user corners with the third user silent, single-user corners, the
    origin, and the symmetric corner delivered by the external three-user
    scheme.  The weighted component sum reproduces the target exactly.
    """
    if not N < M <= 2 * N:
        raise ThreeUserScopeError("plans require N < M <= 2N, got M=%d N=%d" % (M, N))
    target = tuple(rat(x) for x in target)
    if len(target) != 3:
        raise ValueError("target must have three coordinates")
    region = three_user_region(M, N)
    if not contains(region, target):
        raise GeometryError("target %r is outside the three-user region" % (target,))

    k_axis = min(range(3), key=lambda i: (target[i], i))
    p_axis, r_axis = [i for i in range(3) if i != k_axis]
    z = target[k_axis]
    assert z <= d3_max(M, N), "feasible targets always have a coordinate below MN/(M+N)"
    bounds = _slice_bounds(M, N, z)
    slice_region = DoFRegion(2, (bounds["L0"], bounds["L1"], bounds["L2"]))
    builder = _PlanBuilder(M, N)
    a, b = builder.q, builder.b

    corners = vertex_enumerate(slice_region)
    for corner, weight in convex_decompose_2d((target[p_axis], target[r_axis]), corners):
        x, y = corner
        if x == 0 and y == 0:
            # on the d_k axis: time share user k's single-user corner
            builder.add_single(weight * z / Fraction(N), k_axis)
            builder.add_origin(weight * (1 - z / Fraction(N)))
        elif y == 0:
            builder.add_pair_point(weight, (p_axis, k_axis), x, z)
        elif x == 0:
            builder.add_pair_point(weight, (r_axis, k_axis), y, z)
        else:
            on = {name: bounds[name].active((x, y)) for name in ("L0", "L1", "L2")}
            if on["L1"] and on["L2"]:
                # symmetric corner: share the external point with the pair corner
                w_ext = z / b
                builder.add_abdoli(weight * w_ext)
                builder.add_two_user(weight * (1 - w_ext), (p_axis, r_axis))
            elif on["L0"] and (on["L1"] or on["L2"]):
                pair = (p_axis, k_axis) if on["L1"] else (r_axis, k_axis)
                w_pair = (z - b) / (a - b)
                builder.add_two_user(weight * w_pair, pair)
                builder.add_abdoli(weight * (1 - w_pair))
            else:
                raise GeometryError("unclassified slice corner %r" % (corner,))

    components = tuple(
        PlanComponent(point, weight, source, users)
        for (point, source, users), weight in sorted(builder.parts.items())
    )
    plan = AchievabilityPlan(target, components)
    if plan.weighted_sum() != target or plan.total_weight() != 1:
        raise AssertionError("plan decomposition failed to reproduce the target exactly")
    return plan


# ---------------------------------------------------------------------------
# JSON documents (rationals as "p/q" strings)
# ---------------------------------------------------------------------------

def region_document(config, region: DoFRegion, with_vertices: bool = True,
                    plan: AchievabilityPlan | None = None) -> dict:
    doc = {
        "config": {"M": config.M, "N": list(config.N)},
        "halfspaces": [
            {"coeffs": [rat_str(c) for c in hs.coeffs], "bound": rat_str(hs.bound)}
            for hs in region.halfspaces
        ],
    }
    if with_vertices:
        doc["vertices"] = [[rat_str(x) for x in v] for v in vertex_enumerate(region)]
    if plan is not None:
        doc["plan"] = plan_document(plan)
    return doc


def plan_document(plan: AchievabilityPlan) -> dict:
    return {
        "target": [rat_str(x) for x in plan.target],
        "components": [
            {
                "point": [rat_str(x) for x in comp.point],
                "weight": rat_str(comp.weight),
                "source": comp.source,
                "users": [u + 1 for u in comp.users],
            }
            for comp in plan.components
        ],
    }


def plan_to_csv(plan: AchievabilityPlan) -> str:
    k = len(plan.target)
    lines = [",".join(["d%d" % (i + 1) for i in range(k)] + ["weight", "source", "users"])]
    for comp in plan.components:
        users = " ".join(str(u + 1) for u in comp.users)
        lines.append(",".join(
            [rat_str(x) for x in comp.point] + [rat_str(comp.weight), comp.source, users]
        ))
    return "\n".join(lines) + "\n"
