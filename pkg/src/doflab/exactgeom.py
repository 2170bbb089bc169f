"""Exact rational half-space geometry.

Regions live in the nonnegative orthant of dimension K: a ``DoFRegion``
stores explicit half-spaces ``coeffs . d <= bound`` while the constraints
``d_i >= 0`` are implicit and always enforced.  Every number in this module
is a ``fractions.Fraction``; no floating point enters any computation, so
all results are reproducible bit for bit.

Provided operations: membership, exact linear-objective maximization
(two-phase rational simplex with Bland's rule), vertex enumeration by
basis enumeration (K <= 4), redundancy removal, and point-set equality of
two regions via mutual inclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import gcd as math_gcd

__all__ = [
    "GeometryError",
    "DimensionMismatchError",
    "UnsupportedDimensionError",
    "UnboundedRegionError",
    "EmptyRegionError",
    "HalfSpace",
    "DoFRegion",
    "rat",
    "rat_str",
    "dot",
    "contains",
    "lp_max",
    "lp_argmax",
    "is_bounded",
    "vertex_enumerate",
    "remove_redundant",
    "region_includes",
    "regions_equal",
    "solve_square",
    "vertices_to_csv",
    "halfspaces_to_csv",
    "parse_vertices_csv",
]


class GeometryError(ValueError):
    """Base class for errors raised by the exact-geometry layer."""


class DimensionMismatchError(GeometryError):
    pass


class UnsupportedDimensionError(GeometryError):
    pass


class UnboundedRegionError(GeometryError):
    pass


class EmptyRegionError(GeometryError):
    pass


def rat(x) -> Fraction:
    """Coerce an int, "p/q" string, or Fraction to an exact Fraction.

    Floats are rejected: this module is exact by contract.
    """
    if isinstance(x, float):
        raise TypeError("floating-point value not allowed in exact geometry: %r" % (x,))
    return Fraction(x)


def rat_str(x: Fraction) -> str:
    """Render a rational as "p/q" (plain "p" when q == 1)."""
    return str(Fraction(x))


def dot(a, b) -> Fraction:
    if len(a) != len(b):
        raise DimensionMismatchError("dot: length %d vs %d" % (len(a), len(b)))
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


@dataclass(frozen=True)
class HalfSpace:
    """One inequality ``coeffs . d <= bound``."""

    coeffs: tuple
    bound: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(rat(c) for c in self.coeffs))
        object.__setattr__(self, "bound", rat(self.bound))
        if not self.coeffs:
            raise GeometryError("half-space needs at least one coefficient")
        if all(c == 0 for c in self.coeffs):
            raise GeometryError("half-space coefficients must not all be zero")

    def evaluate(self, point) -> Fraction:
        return dot(self.coeffs, point)

    def holds(self, point) -> bool:
        return self.evaluate(point) <= self.bound

    def active(self, point) -> bool:
        return self.evaluate(point) == self.bound

    def render(self, var: str = "d") -> str:
        """Human-readable form, e.g. "1/4 d1 + 1/2 d2 <= 1" or "d1 <= 1"."""
        terms = []
        for i, c in enumerate(self.coeffs, start=1):
            if c == 0:
                continue
            name = "%s%d" % (var, i)
            if c == 1:
                terms.append(name)
            elif c == -1:
                terms.append("-" + name)
            else:
                terms.append("%s %s" % (rat_str(c), name))
        return "%s <= %s" % (" + ".join(terms), rat_str(self.bound))


@dataclass(frozen=True)
class DoFRegion:
    """Bounded region {d >= 0 : coeffs_j . d <= bound_j for all j}.

    Nonnegativity is implicit: it is never stored as a user half-space.
    ``vertices`` is computed lazily and cached (K <= 4 only).
    """

    dimension: int
    halfspaces: tuple

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", tuple(self.halfspaces))
        if self.dimension < 1:
            raise GeometryError("dimension must be >= 1")
        for hs in self.halfspaces:
            if not isinstance(hs, HalfSpace):
                raise GeometryError("halfspaces must be HalfSpace instances")
            if len(hs.coeffs) != self.dimension:
                raise DimensionMismatchError(
                    "half-space has %d coefficients in a %d-dimensional region"
                    % (len(hs.coeffs), self.dimension)
                )

    @cached_property
    def vertices(self) -> tuple:
        return tuple(vertex_enumerate(self))


def contains(region: DoFRegion, point) -> bool:
    """Exact membership: every half-space plus nonnegativity."""
    if len(point) != region.dimension:
        raise DimensionMismatchError(
            "point of length %d in %d-dimensional region" % (len(point), region.dimension)
        )
    pt = tuple(rat(x) for x in point)
    if any(x < 0 for x in pt):
        return False
    return all(hs.holds(pt) for hs in region.halfspaces)


# ---------------------------------------------------------------------------
# Exact two-phase simplex (Bland's rule, guaranteed termination)
# ---------------------------------------------------------------------------

_OPTIMAL = "optimal"
_UNBOUNDED = "unbounded"
_INFEASIBLE = "infeasible"

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _pivot(tab, basis, row, col):
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    prow = tab[row]
    for i, r in enumerate(tab):
        if i != row and r[col] != 0:
            f = r[col]
            tab[i] = [v - f * p for v, p in zip(r, prow)]
    basis[row] = col


def _run_simplex(tab, basis, m, ncols):
    """Maximize with objective in tab[m]; Bland's rule on both choices."""
    while True:
        enter = -1
        obj = tab[m]
        for j in range(ncols):
            if obj[j] > 0:
                enter = j
                break
        if enter < 0:
            return _OPTIMAL
        leave = -1
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return _UNBOUNDED
        _pivot(tab, basis, leave, enter)


def _canonical_objective(tab, basis, m, ncols, costs):
    """Install objective row tab[m] = reduced costs of ``costs`` w.r.t. basis."""
    row = list(costs) + [_ZERO] * (ncols - len(costs)) + [_ZERO]
    for i in range(m):
        c = row[basis[i]]
        if c != 0:
            row = [v - c * t for v, t in zip(row, tab[i])]
    tab[m] = row


def _solve_lp(a_rows, b_vals, objective):
    """max objective . x  s.t.  a_rows x <= b_vals, x >= 0  (all Fractions).

    Returns (status, value, x) with exact rationals.
    """
    m = len(a_rows)
    n = len(objective)
    # Equality form with one slack per row; rows with negative rhs are negated
    # and receive an artificial variable.
    art_of_row = {}
    rows = []
    for i in range(m):
        row = list(a_rows[i]) + [_ZERO] * m
        row[n + i] = _ONE
        rhs = b_vals[i]
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
            art_of_row[i] = None
        rows.append((row, rhs))
    n_art = len(art_of_row)
    ncols = n + m + n_art
    for k, i in enumerate(sorted(art_of_row)):
        art_of_row[i] = n + m + k

    tab = []
    basis = []
    for i, (row, rhs) in enumerate(rows):
        full = row + [_ZERO] * n_art + [rhs]
        if i in art_of_row:
            full[art_of_row[i]] = _ONE
            basis.append(art_of_row[i])
        else:
            basis.append(n + i)
        tab.append(full)
    tab.append([_ZERO] * (ncols + 1))

    if n_art:
        phase1 = [_ZERO] * ncols
        for col in art_of_row.values():
            phase1[col] = Fraction(-1)
        _canonical_objective(tab, basis, m, ncols, phase1)
        status = _run_simplex(tab, basis, m, ncols)
        assert status == _OPTIMAL, "phase 1 cannot be unbounded"
        if tab[m][-1] != 0:  # -value != 0  =>  some artificial stayed positive
            return _INFEASIBLE, None, None
        # Drive any basic artificials left at zero out of the basis.
        art_cols = set(art_of_row.values())
        for i in range(m):
            if basis[i] in art_cols:
                for j in range(n + m):
                    if tab[i][j] != 0:
                        _pivot(tab, basis, i, j)
                        break
        # Discard the artificial columns so they can never re-enter; a row
        # whose artificial could not leave is redundant and is dropped.
        keep = [i for i in range(m) if basis[i] not in art_cols]
        ncols = n + m
        tab = [tab[i][:ncols] + [tab[i][-1]] for i in keep]
        basis = [basis[i] for i in keep]
        m = len(keep)
        tab.append([_ZERO] * (ncols + 1))

    _canonical_objective(tab, basis, m, ncols, list(objective))
    status = _run_simplex(tab, basis, m, ncols)
    if status == _UNBOUNDED:
        return _UNBOUNDED, None, None
    x = [_ZERO] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tab[i][-1]
    return _OPTIMAL, -tab[m][-1], tuple(x)


def _support(region: DoFRegion, objective):
    a_rows = [hs.coeffs for hs in region.halfspaces]
    b_vals = [hs.bound for hs in region.halfspaces]
    return _solve_lp(a_rows, b_vals, [rat(c) for c in objective])


def lp_argmax(region: DoFRegion, objective):
    """Exact maximum of objective . d over the region, with a maximizer.

    Raises EmptyRegionError / UnboundedRegionError accordingly.
    """
    if len(objective) != region.dimension:
        raise DimensionMismatchError("objective length != region dimension")
    status, value, x = _support(region, objective)
    if status == _INFEASIBLE:
        raise EmptyRegionError("region is empty")
    if status == _UNBOUNDED:
        raise UnboundedRegionError("objective unbounded over region")
    return value, x


def lp_max(region: DoFRegion, objective) -> Fraction:
    value, _ = lp_argmax(region, objective)
    return value


def is_bounded(region: DoFRegion) -> bool:
    """True iff every coordinate is bounded above (d >= 0 bounds below)."""
    unit = [_ZERO] * region.dimension
    for i in range(region.dimension):
        unit[i] = _ONE
        status, _, _ = _support(region, unit)
        unit[i] = _ZERO
        if status == _INFEASIBLE:
            raise EmptyRegionError("region is empty")
        if status == _UNBOUNDED:
            return False
    return True


def _assert_bounded(region: DoFRegion):
    if not is_bounded(region):
        raise UnboundedRegionError("region is unbounded")


# ---------------------------------------------------------------------------
# Vertex enumeration and redundancy removal
# ---------------------------------------------------------------------------

def solve_square(matrix, rhs):
    """Exact solution of a square rational system; None if singular."""
    n = len(rhs)
    aug = [list(row) + [r] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if aug[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        prow = aug[col]
        inv = _ONE / prow[col]
        aug[col] = [v * inv for v in prow]
        prow = aug[col]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * p for v, p in zip(aug[r], prow)]
    return tuple(aug[i][-1] for i in range(n))


def _det_int(m):
    """Integer determinant by cofactor expansion (n <= 4)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
    total = 0
    sign = 1
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        if m[0][j]:
            total += sign * m[0][j] * _det_int(minor)
        sign = -sign
    return total


def vertex_enumerate(region: DoFRegion):
    """Exact vertex set by exhaustive K-subset basis enumeration.

    Each returned point is a basic feasible solution: K linearly
    independent constraints (half-spaces or axes) active, all constraints
    satisfied.  Output is deduplicated and sorted lexicographically.
    """
    k = region.dimension
    if k > 4:
        raise UnsupportedDimensionError("vertex enumeration supports K <= 4, got K=%d" % k)
    _assert_bounded(region)
    # integerize each constraint row once so the per-basis solves are
    # Cramer determinants over plain ints
    rows = []
    for hs in region.halfspaces:
        scale = 1
        for c in list(hs.coeffs) + [hs.bound]:
            scale = scale * c.denominator // math_gcd(scale, c.denominator)
        rows.append(([int(c * scale) for c in hs.coeffs], int(hs.bound * scale)))
    for i in range(k):
        rows.append(([1 if j == i else 0 for j in range(k)], 0))
    halfspaces = region.halfspaces

    found = {}
    for subset in combinations(range(len(rows)), k):
        mat = [rows[i][0] for i in subset]
        det = _det_int(mat)
        if det == 0:
            continue
        rhs = [rows[i][1] for i in subset]
        point = tuple(
            Fraction(_det_int([row[:j] + [r] + row[j + 1 :] for row, r in zip(mat, rhs)]), det)
            for j in range(k)
        )
        if point in found:
            continue
        if all(x >= 0 for x in point) and all(hs.evaluate(point) <= hs.bound for hs in halfspaces):
            found[point] = True
    return sorted(found)


def remove_redundant(region: DoFRegion) -> DoFRegion:
    """Drop every half-space implied by the remaining ones.

    A half-space is redundant iff maximizing its left side subject to the
    others (and nonnegativity) stays <= its bound; a sub-problem that
    becomes unbounded means the half-space is load-bearing and is kept.
    """
    _assert_bounded(region)
    survivors = list(region.halfspaces)
    i = 0
    while i < len(survivors):
        hs = survivors[i]
        others = survivors[:i] + survivors[i + 1 :]
        status, value, _ = _solve_lp(
            [o.coeffs for o in others], [o.bound for o in others], list(hs.coeffs)
        )
        if status == _OPTIMAL and value <= hs.bound:
            survivors.pop(i)
        else:
            i += 1
    return DoFRegion(region.dimension, tuple(survivors))


def region_includes(outer: DoFRegion, inner: DoFRegion) -> bool:
    """True iff inner is a subset of outer (exact, via support LPs)."""
    if outer.dimension != inner.dimension:
        raise DimensionMismatchError("regions of dimension %d vs %d" % (outer.dimension, inner.dimension))
    for hs in outer.halfspaces:
        if lp_max(inner, hs.coeffs) > hs.bound:
            return False
    return True


def regions_equal(a: DoFRegion, b: DoFRegion) -> bool:
    """True iff the two regions have identical point sets."""
    return region_includes(a, b) and region_includes(b, a)


# ---------------------------------------------------------------------------
# CSV serialization: rationals rendered "p/q", header row "d1,...,dK"
# ---------------------------------------------------------------------------

def _header(dimension: int, extra=()):
    return ",".join(["d%d" % (i + 1) for i in range(dimension)] + list(extra))


def vertices_to_csv(vertices, dimension: int) -> str:
    lines = [_header(dimension)]
    for v in vertices:
        if len(v) != dimension:
            raise DimensionMismatchError("vertex of length %d, expected %d" % (len(v), dimension))
        lines.append(",".join(rat_str(x) for x in v))
    return "\n".join(lines) + "\n"


def halfspaces_to_csv(region: DoFRegion) -> str:
    lines = [_header(region.dimension, extra=("bound",))]
    for hs in region.halfspaces:
        lines.append(",".join([rat_str(c) for c in hs.coeffs] + [rat_str(hs.bound)]))
    return "\n".join(lines) + "\n"


def parse_vertices_csv(text: str):
    """Inverse of vertices_to_csv; returns (dimension, list of points)."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    dimension = len(header)
    if header != ["d%d" % (i + 1) for i in range(dimension)]:
        raise GeometryError("unexpected CSV header: %r" % lines[0])
    points = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != dimension:
            raise DimensionMismatchError("CSV row of length %d, expected %d" % (len(cells), dimension))
        points.append(tuple(Fraction(c) for c in cells))
    return dimension, points
