"""Inverse cones, lifted polytopes, intersection queries and vertex enumeration.

A :class:`Polytope` may carry auxiliary coordinates appended after the ambient
ones (always nonnegative). The set it represents is the projection onto the
ambient coordinates. Inverse cones keep their cone coefficients this way, so no
projection step is ever needed; every query is an LP over the lifted system.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from . import lp as _lp
from ._linalg import nullspace, rank, solve_linear
from .core import (
    SIMPLEX,
    CapacityError,
    Dataset,
    DimensionError,
    OutcomeSpace,
    SchemaError,
    UnknownAgent,
    sign,
    to_number,
    vsub,
)

DEFAULT_VERTEX_CAP = 10_000


@dataclass(frozen=True)
class Polytope:
    """``{y : exists z >= 0 with a.(y, z) <= c for inequalities and a.(y, z) = c for equalities}``."""

    ambient_dim: int
    inequalities: tuple = ()
    equalities: tuple = ()
    aux: int = 0
    label: str = ""

    def __post_init__(self):
        width = self.ambient_dim + self.aux
        ineq = tuple((tuple(a), c) for a, c in self.inequalities)
        eq = tuple((tuple(a), c) for a, c in self.equalities)
        for a, _ in ineq + eq:
            if len(a) != width:
                raise DimensionError(f"row of length {len(a)} in polytope of width {width}")
        object.__setattr__(self, "inequalities", ineq)
        object.__setattr__(self, "equalities", eq)

    @property
    def width(self) -> int:
        return self.ambient_dim + self.aux


@dataclass(frozen=True)
class ConeRep:
    apex: tuple
    generators: tuple


def outcome_rows(Y: OutcomeSpace, dim: int, aux: int = 0):
    """Inequality and equality rows describing ``Y`` padded with ``aux`` zero columns."""
    pad = (0,) * aux
    ineq, eq = [], []
    if Y.is_simplex:
        for k in range(dim):
            ineq.append((tuple(-1 if j == k else 0 for j in range(dim)) + pad, 0))
        eq.append((tuple(1 for _ in range(dim)) + pad, 1))
    else:
        if len(Y.A[0]) != dim:
            raise DimensionError(f"outcome space of dimension {len(Y.A[0])} used with {dim} alternatives")
        for row, c in zip(Y.A, Y.c):
            ineq.append((tuple(row) + pad, c))
    return ineq, eq


def cone_rep(d: Dataset, group, agent: str) -> ConeRep:
    obs = d.observation(group)
    if agent not in obs.group:
        raise UnknownAgent(f"{agent} is not a member of {d.group_label(obs.group)}")
    p = obs.choices[agent]
    gens = tuple(vsub(p, obs.choices[j]) for j in d.ordered(obs.group - {agent}))
    return ConeRep(p, gens)


def cone_polytope(apex: Sequence, generators: Sequence[Sequence], Y: OutcomeSpace = SIMPLEX,
                  label: str = "") -> Polytope:
    """``{v in Y : v = apex + sum_j mu_j g_j, mu >= 0}`` with ``mu`` kept as auxiliary coordinates."""
    dim = len(apex)
    k = len(generators)
    eq = []
    for x in range(dim):
        row = tuple(1 if j == x else 0 for j in range(dim)) + tuple(-g[x] for g in generators)
        eq.append((row, apex[x]))
    ineq, yeq = outcome_rows(Y, dim, k)
    return Polytope(dim, tuple(ineq), tuple(eq + yeq), k, label)


def inverse_cone(d: Dataset, group, agent: str, Y: OutcomeSpace | None = None) -> Polytope:
    Y = d.outcome_space if Y is None else Y
    rep = cone_rep(d, group, agent)
    label = d.group_label(d.observation(group).group)
    return cone_polytope(rep.apex, rep.generators, Y, label)


def hull_polytope(points: Sequence[Sequence]) -> Polytope:
    """Convex hull of ``points`` as a lifted polytope (barycentric weights are the auxiliaries)."""
    if not points:
        raise ValueError("hull of no points")
    dim = len(points[0])
    k = len(points)
    eq = []
    for x in range(dim):
        eq.append((tuple(1 if j == x else 0 for j in range(dim)) + tuple(-q[x] for q in points), 0))
    eq.append(((0,) * dim + (1,) * k, 1))
    return Polytope(dim, (), tuple(eq), k, "hull")


def box_polytope(lower: Sequence, upper: Sequence) -> Polytope:
    dim = len(lower)
    ineq = []
    for k in range(dim):
        e = tuple(1 if j == k else 0 for j in range(dim))
        ineq.append((e, upper[k]))
        ineq.append((tuple(-x for x in e), -lower[k]))
    return Polytope(dim, tuple(ineq))


# --------------------------------------------------------------------------
# LP assembly


def stack(Ps: Sequence[Polytope]):
    """One LP over ``(y, aux_1, ..., aux_m)`` whose feasible y's are the common points."""
    if not Ps:
        raise ValueError("no polytopes")
    dim = Ps[0].ambient_dim
    if any(P.ambient_dim != dim for P in Ps):
        raise DimensionError("polytopes of different ambient dimension")
    n = dim + sum(P.aux for P in Ps)
    prog = _lp.LinearProgram(n)
    offset = dim
    for P in Ps:
        for k in range(P.aux):
            prog.bound(offset + k, 0, None)

        def spread(a, off=offset, P=P):
            row = [0] * n
            row[:dim] = a[:dim]
            row[off:off + P.aux] = a[dim:]
            return row

        for a, c in P.equalities:
            prog.add(spread(a), _lp.EQ, c)
        for a, c in P.inequalities:
            prog.add(spread(a), _lp.LE, c)
        offset += P.aux
    return prog


def member(P: Polytope, y: Sequence) -> bool:
    if len(y) != P.ambient_dim:
        raise DimensionError("point dimension mismatch")
    dim = P.ambient_dim
    if P.aux == 0:
        for a, c in P.inequalities:
            if sign(sum(ai * yi for ai, yi in zip(a, y)) - c) > 0:
                return False
        for a, c in P.equalities:
            if sign(sum(ai * yi for ai, yi in zip(a, y)) - c) != 0:
                return False
        return True
    prog = _lp.LinearProgram(P.aux)
    for k in range(P.aux):
        prog.bound(k, 0, None)
    for rows, rel in ((P.equalities, _lp.EQ), (P.inequalities, _lp.LE)):
        for a, c in rows:
            fixed = sum(ai * yi for ai, yi in zip(a[:dim], y))
            prog.add(a[dim:], rel, c - fixed)
    if not prog.constraints:
        return True
    return _lp.solve_checked(prog).status != _lp.INFEASIBLE


@dataclass(frozen=True)
class Intersection:
    """Result of :func:`intersection_status`.

    ``nonempty`` selects which fields are populated: a witness (and, when
    requested, the affine dimension and a relative-interior point) or the
    infeasible LP together with its verified Farkas outcome.
    """

    nonempty: bool
    witness: tuple | None = None
    dim: int | None = None
    center: tuple | None = None
    points: tuple = ()
    program: object = None
    outcome: object = None
    lifted: tuple | None = None

    @property
    def farkas(self):
        return self.outcome.farkas if self.outcome is not None else None


def intersection_status(Ps: Sequence[Polytope], dimension: bool = True) -> Intersection:
    prog = stack(Ps)
    out = _lp.solve_checked(prog)
    if out.status == _lp.INFEASIBLE:
        return Intersection(False, program=prog, outcome=out)
    dim = Ps[0].ambient_dim
    witness = tuple(out.assignment[:dim])
    if not dimension:
        return Intersection(True, witness=witness, program=prog, outcome=out, lifted=out.assignment)
    d, points, center = affine_hull_probe(prog, dim, witness, _flat_hints(Ps))
    return Intersection(True, witness=witness, dim=d, center=center, points=points,
                        program=prog, outcome=out, lifted=out.assignment)


def _flat_hints(Ps):
    hints = []
    for P in Ps:
        for a, _ in P.equalities:
            if all(sign(x) == 0 for x in a[P.ambient_dim:]):
                hints.append(tuple(to_number(x) for x in a[:P.ambient_dim]))
    return hints


def affine_hull_probe(prog, dim: int, x0: tuple, flat_hints=()):
    """Affine dimension of the projection of ``prog``'s feasible set onto the first ``dim`` coordinates.

    Directions are chosen orthogonal to everything found so far, so each
    positive-width direction contributes a new affinely independent point and
    each zero-width direction is a normal of the affine hull.
    """
    diffs: list[tuple] = []
    flats: list[tuple] = []
    for h in flat_hints:
        if rank(flats + [h]) > len(flats):
            flats.append(h)
    points = [x0]
    while len(diffs) + len(flats) < dim:
        basis = nullspace(diffs + flats, dim)
        c = basis[0]
        obj = list(c) + [0] * (prog.n - dim)
        work = prog.copy()
        base = sum(ci * xi for ci, xi in zip(c, x0))
        found = None
        for sense in ("max", "min"):
            work.set_objective(obj, sense)
            out = _lp.solve_checked(work)
            if out.status != _lp.OPTIMAL:
                raise ValueError("intersection is unbounded; outcome space must be bounded")
            if sign(out.value - base) != 0:
                found = tuple(out.assignment[:dim])
                break
        if found is None:
            flats.append(c)
        else:
            diffs.append(vsub(found, x0))
            points.append(found)
    k = len(points)
    center = tuple(sum(p[x] for p in points) / k for x in range(dim))
    return len(diffs), tuple(points), center


def affinely_independent(points: Sequence[Sequence]) -> bool:
    if len(points) <= 1:
        return True
    base = points[0]
    diffs = [vsub(p, base) for p in points[1:]]
    return rank(diffs) == len(diffs)


def check_bounded_nonempty(A: Sequence[Sequence], c: Sequence) -> None:
    """Raise SchemaError unless ``{y : A y <= c}`` is nonempty and bounded."""
    dim = len(A[0])
    prog = _lp.LinearProgram(dim)
    for row, ci in zip(A, c):
        prog.add(row, _lp.LE, ci)
    if _lp.solve_checked(prog).status == _lp.INFEASIBLE:
        raise SchemaError("outcome polytope is empty")
    for k in range(dim):
        for sense in ("max", "min"):
            obj = [1 if j == k else 0 for j in range(dim)]
            prog.set_objective(obj, sense)
            if _lp.solve_checked(prog).status == _lp.UNBOUNDED:
                raise SchemaError(f"outcome polytope is unbounded along coordinate {k}")


# --------------------------------------------------------------------------
# vertex enumeration


def enumerate_vertices(P: Polytope, cap: int = DEFAULT_VERTEX_CAP) -> list[tuple]:
    """Vertices of the projected polytope, sorted, by enumerating basic solutions of the lift."""
    n = P.width
    dim = P.ambient_dim
    eq_rows = [(tuple(to_number(x) for x in a), to_number(c)) for a, c in P.equalities]
    ineq = {}
    for a, c in P.inequalities:
        ineq.setdefault((tuple(to_number(x) for x in a), to_number(c)), None)
    for k in range(P.aux):
        row = tuple(to_number(-1 if j == dim + k else 0) for j in range(n))
        ineq.setdefault((row, to_number(0)), None)
    ineq_rows = list(ineq)
    E = [a for a, _ in eq_rows]
    r = rank(E) if E else 0
    need = n - r
    if need < 0 or need > len(ineq_rows):
        return []
    total = _binom(len(ineq_rows), need)
    if total > cap:
        raise CapacityError(f"{total} basis candidates exceed the cap of {cap}")
    found = {}
    for S in combinations(range(len(ineq_rows)), need):
        A = E + [ineq_rows[s][0] for s in S]
        b = [c for _, c in eq_rows] + [ineq_rows[s][1] for s in S]
        z, rk = solve_linear(A, b)
        if z is None or rk < n:
            continue
        if any(sign(sum(ai * zi for ai, zi in zip(a, z)) - c) > 0 for a, c in ineq_rows):
            continue
        if any(sign(sum(ai * zi for ai, zi in zip(a, z)) - c) != 0 for a, c in eq_rows):
            continue
        y = tuple(z[:dim])
        if not any(all(sign(a - b) == 0 for a, b in zip(y, q)) for q in found):
            found[y] = None
    cands = list(found)
    if P.aux == 0 or len(cands) <= 2:
        return sorted(cands)
    # projection can expose non-extreme basic points
    extreme = []
    for k, q in enumerate(cands):
        others = [o for j, o in enumerate(cands) if j != k]
        if not member(hull_polytope(others), q):
            extreme.append(q)
    return sorted(extreme)


def _binom(n: int, k: int) -> int:
    from math import comb

    return comb(n, k)


# --------------------------------------------------------------------------
# convex weights


def convex_weights(target: Sequence, points: Sequence[Sequence], prefer: int | None = None,
                   fixed_zero: Sequence[int] = ()) -> tuple | None:
    """Canonical convex weights ``g`` with ``sum_k g_k points[k] = target``, or None.

    With ``prefer`` set, the weight on that point is maximized first; the
    remaining weights are then minimized lexicographically in index order.
    When the points are affinely independent the weights are unique and are
    obtained by a direct solve.
    """
    k = len(points)
    if k == 0:
        return None
    dim = len(target)
    if not fixed_zero and affinely_independent(points):
        A = [[q[x] for q in points] for x in range(dim)] + [[1] * k]
        b = list(target) + [1]
        g, _ = solve_linear(A, b)
        if g is None or any(sign(x) < 0 for x in g):
            return None
        return g
    prog = _lp.LinearProgram(k)
    for j in range(k):
        prog.bound(j, 0, 0 if j in fixed_zero else None)
    prog.add([1] * k, _lp.EQ, 1)
    for x in range(dim):
        prog.add([q[x] for q in points], _lp.EQ, target[x])
    order = list(range(k))
    if prefer is not None:
        prog.set_objective([1 if j == prefer else 0 for j in range(k)], "max")
        out = _lp.solve_checked(prog)
        if out.status == _lp.INFEASIBLE:
            return None
        prog.add([1 if j == prefer else 0 for j in range(k)], _lp.EQ, out.value)
        order.remove(prefer)
    prog.objective = None
    return _lp.lexmin(prog, order)


def in_hull(point: Sequence, points: Sequence[Sequence]) -> bool:
    if not points:
        return False
    return member(hull_polytope(points), point)
