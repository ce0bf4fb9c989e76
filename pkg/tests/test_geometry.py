from __future__ import annotations

from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linmeans import geometry as geo
from linmeans._linalg import rank, solve_linear
from linmeans.core import SIMPLEX, OutcomeSpace, CapacityError, UnknownAgent, UnknownGroup, make_dataset, vsub
from linmeans.lp import verify_certificate

from conftest import vec


def _big_box(dim):
    A = [tuple(s if j == k else 0 for j in range(dim)) for k in range(dim) for s in (1, -1)]
    return OutcomeSpace("polytope", tuple(A), tuple(F(2) if k % 2 == 0 else F(1) for k in range(2 * dim)))


def _interval(lo, hi):
    return geo.box_polytope((F(lo),), (F(hi),))


class TestInverseCone:
    def test_abc_ray(self, abc):
        rep = geo.cone_rep(abc, {"Ann", "Ben"}, "Ann")
        assert rep.apex == vec("1/2", "1/10", "2/5")
        assert rep.generators == (vec("-1/5", "0", "1/5"),)
        P = geo.inverse_cone(abc, {"Ann", "Ben"}, "Ann")
        assert geo.member(P, vec("1/10", "1/10", "4/5"))
        assert geo.member(P, rep.apex)
        assert not geo.member(P, vec("3/5", "1/10", "3/10"))

    def test_ray_leaves_simplex(self, abc):
        P = geo.inverse_cone(abc, {"Ann", "Ben"}, "Ann")
        # t = 5/2 puts the first coordinate at zero; one step further is outside
        assert geo.member(P, vec("0", "1/10", "9/10"))
        assert not geo.member(P, vec("-1/10", "1/10", "1"))

    def test_identical_choices_give_apex(self):
        d = make_dataset(("x", "y", "z"), [{"a": ["0.2", "0.3", "0.5"], "b": ["0.2", "0.3", "0.5"]}])
        P = geo.inverse_cone(d, {"a", "b"}, "a")
        assert geo.enumerate_vertices(P) == [vec("1/5", "3/10", "1/2")]

    def test_one_d_segment(self, one_d):
        P = geo.inverse_cone(one_d, {"Ann", "Ben"}, "Ann")
        assert geo.enumerate_vertices(P) == [vec(0, 1), vec("4/5", "1/5")]

    def test_errors(self, abc):
        with pytest.raises(UnknownAgent):
            geo.inverse_cone(abc, {"Ann", "Ben"}, "Can")
        with pytest.raises(UnknownGroup):
            geo.inverse_cone(abc, {"Ben", "Can"}, "Ben")

    def test_generators_sum_to_zero(self, abc_three):
        for obs in abc_three.observations:
            for a in obs.group:
                for g in geo.cone_rep(abc_three, obs.group, a).generators:
                    assert sum(g) == 0


class TestIntersection:
    def test_abc_point(self, abc):
        Ps = [geo.inverse_cone(abc, g, "Ann") for g in ({"Ann", "Ben"}, {"Ann", "Can"})]
        res = geo.intersection_status(Ps)
        assert res.nonempty and res.dim == 0
        assert res.witness == vec("1/10", "1/10", "4/5")

    def test_one_d_interval(self, one_d):
        Ps = [geo.inverse_cone(one_d, o.group, "Ann") for o in one_d.observations]
        res = geo.intersection_status(Ps)
        assert res.nonempty and res.dim == 1
        assert all(geo.member(P, res.center) for P in Ps)
        merged = geo.Polytope(2, Ps[0].inequalities, Ps[0].equalities, Ps[0].aux)
        assert geo.member(merged, res.center)

    def test_disjoint_intervals(self):
        Ps = [_interval(0, "0.3"), _interval("0.5", 1)]
        res = geo.intersection_status(Ps)
        assert not res.nonempty
        assert verify_certificate(res.program, res.outcome)
        assert res.farkas is not None

    def test_full_dimensional_box(self):
        res = geo.intersection_status([geo.box_polytope((0, 0), (1, 1)), geo.box_polytope((F(1, 2), 0), (2, 2))])
        assert res.dim == 2
        assert res.center[0] > F(1, 2)

    def test_witness_is_member(self, one_d_bad):
        for agent in ("2", "3"):
            obs = one_d_bad.groups_of(agent)
            Ps = [geo.inverse_cone(one_d_bad, o.group, agent) for o in obs]
            res = geo.intersection_status(Ps)
            assert all(geo.member(P, res.witness) for P in Ps)


class TestAffineIndependence:
    def test_pair(self):
        assert geo.affinely_independent([vec("0.1", "0.1", "0.8"), vec("0.7", "0.1", "0.2")])

    def test_duplicate(self):
        p = vec("0.3", "0.7")
        assert not geo.affinely_independent([p, p])

    def test_midpoint(self):
        assert not geo.affinely_independent([vec(1, 0), vec(0, 1), vec("0.5", "0.5")])

    def test_single(self):
        assert geo.affinely_independent([vec(1, 0)])


class TestVertices:
    def test_simplex(self):
        P = geo.Polytope(3, *geo.outcome_rows(SIMPLEX, 3))
        assert geo.enumerate_vertices(P) == [vec(0, 0, 1), vec(0, 1, 0), vec(1, 0, 0)]

    def test_one_d_identified_segment(self, one_d):
        from linmeans.identify import sharp_set

        assert geo.enumerate_vertices(sharp_set(one_d, "Ann")) == [vec(0, 1), vec("7/10", "3/10")]

    def test_abc_point(self, abc):
        from linmeans.identify import sharp_set

        assert geo.enumerate_vertices(sharp_set(abc, "Ann")) == [vec("1/10", "1/10", "4/5")]

    def test_cap(self):
        P = geo.Polytope(3, *geo.outcome_rows(SIMPLEX, 3))
        with pytest.raises(CapacityError):
            geo.enumerate_vertices(P, cap=1)

    def test_vertices_lie_in_cone(self, abc_three):
        for obs in abc_three.observations:
            for a in obs.group:
                rep = geo.cone_rep(abc_three, obs.group, a)
                P = geo.inverse_cone(abc_three, obs.group, a)
                for v in geo.enumerate_vertices(P):
                    assert geo.member(geo.cone_polytope(rep.apex, rep.generators, _big_box(len(v))), v)


class TestConvexWeights:
    def test_direct(self):
        g = geo.convex_weights(vec("0.5", "0.1", "0.4"), [vec("0.1", "0.1", "0.8"), vec("0.7", "0.1", "0.2")])
        assert g == (F(1, 3), F(2, 3))

    def test_outside(self):
        assert geo.convex_weights(vec(1, 0), [vec(0, 1), vec("0.5", "0.5")]) is None

    def test_dependent_prefers(self):
        pts = [vec(1, 0), vec(0, 1), vec("0.5", "0.5")]
        g = geo.convex_weights(vec("0.5", "0.5"), pts, prefer=0)
        assert g == (F(1, 2), F(1, 2), 0)

    def test_hull(self):
        assert geo.in_hull(vec("0.5", "0.5"), [vec(1, 0), vec(0, 1)])
        assert not geo.in_hull(vec("0.5", "0.1", "0.4"), [vec("0.7", "0.1", "0.2")])


@st.composite
def cone_cases(draw):
    """A group of two or three agents in two or three dimensions plus a candidate ideal point."""
    dim = draw(st.integers(2, 3))

    def point():
        raw = [draw(st.integers(0, 4)) for _ in range(dim)]
        if sum(raw) == 0:
            raw[0] = 1
        s = sum(raw)
        return tuple(F(x, s) for x in raw)

    members = [point() for _ in range(draw(st.integers(2, 3)))]
    return members, point()


def _cone_oracle(apex, gens, v):
    """Conic Caratheodory: try every linearly independent subset of generators."""
    if any(x < 0 for x in v) or sum(v) != 1:
        return False
    rhs = vsub(v, apex)
    if all(x == 0 for x in rhs):
        return True
    for r in range(1, len(gens) + 1):
        for S in combinations(gens, r):
            if rank(list(S)) < r:
                continue
            mu, _ = solve_linear([[g[x] for g in S] for x in range(len(v))], list(rhs))
            if mu is not None and all(m >= 0 for m in mu):
                return True
    return False


class TestConeVersusOracle:
    @given(cone_cases())
    def test_equivalence(self, case):
        members, v = case
        p, peers = members[0], members[1:]
        gens = [vsub(p, q) for q in peers]
        assert geo.member(geo.cone_polytope(p, gens), v) == _cone_oracle(p, gens, v)
