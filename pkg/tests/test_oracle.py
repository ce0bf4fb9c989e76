from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linmeans import oracle
from linmeans.consistency import test_glm
from linmeans.core import CapacityError, make_dataset
from linmeans.geometry import hull_polytope, member
from linmeans.oracle import GridSpec, grid_glm_oracle, hull_membership_oracle

from conftest import vec


class TestGrid:
    def test_spec_bounds(self):
        with pytest.raises(ValueError):
            GridSpec(0, 3)

    def test_compositions(self):
        assert sorted(oracle.compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
        assert sum(1 for _ in oracle.compositions(4, 3)) == 15

    def test_abc_ann(self, abc):
        r = grid_glm_oracle(abc, "Ann", GridSpec(30, 30))
        assert r.found and r.v == vec("3/30", "3/30", "24/30")
        assert all(w["Ann"] == F(10, 30) for w in r.weights.values())

    @pytest.mark.parametrize("k", [5, 10, 20])
    def test_inconsistent(self, one_d_bad, k):
        assert not grid_glm_oracle(one_d_bad, "1", GridSpec(k, k)).found

    def test_identical_choices(self):
        d = make_dataset(("x", "y", "z"), [{"a": ["0.2", "0.3", "0.5"], "b": ["0.2", "0.3", "0.5"]}])
        r = grid_glm_oracle(d, "a", GridSpec(10, 4))
        assert r.found and r.v == vec("1/5", "3/10", "1/2")

    def test_capacity(self):
        d = make_dataset(tuple("abcde"), [{"x": ["0.2"] * 5}])
        with pytest.raises(CapacityError):
            grid_glm_oracle(d, "x", GridSpec(5, 5))
        big = make_dataset(("p", "q"), [{k: ["0.5", "0.5"] for k in "wxyz"}])
        with pytest.raises(CapacityError):
            grid_glm_oracle(big, "w", GridSpec(5, 5))

    @given(st.integers(0, 10_000))
    def test_one_sided_agreement(self, seed):
        rng = random.Random(seed)
        rows = []
        for _ in range(2):
            rows.append({a: _grid_point(rng, 2, 4) for a in rng.sample("abc", 2) + ["a"]})
        d = make_dataset(("x", "y"), [r for r in _dedupe(rows)])
        found = grid_glm_oracle(d, "a", GridSpec(8, 8)).found
        if found:
            assert test_glm(d, "a", certificates=False).consistent


def _grid_point(rng, dim, k):
    cuts = sorted(rng.randint(0, k) for _ in range(dim - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [k])]
    return [F(p, k) for p in parts]


def _dedupe(rows):
    seen, out = set(), []
    for r in rows:
        key = frozenset(r)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


class TestHull:
    def test_midpoint(self):
        assert hull_membership_oracle(vec("1/2", "1/2"), [vec(1, 0), vec(0, 1)])

    def test_singleton_hull(self):
        assert not hull_membership_oracle(vec("1/2", "1/10", "2/5"), [vec("7/10", "1/10", "1/5")])

    def test_vertex(self):
        pts = [vec(1, 0, 0), vec(0, 1, 0), vec(0, 0, 1)]
        assert hull_membership_oracle(pts[1], pts)

    def test_dependent_points(self):
        pts = [vec(0, 0), vec(1, 0), vec(2, 0), vec(1, 1)]
        assert hull_membership_oracle(vec("3/2", "1/2"), pts)
        assert not hull_membership_oracle(vec(2, "1/2"), pts)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            hull_membership_oracle(vec(0), [vec(k) for k in range(5)])
        with pytest.raises(CapacityError):
            hull_membership_oracle(vec(0, 0, 0, 0, 0), [vec(0, 0, 0, 0, 0)])

    @given(st.integers(1, 4), st.integers(1, 4), st.data())
    def test_agrees_with_lp(self, dim, count, data):
        coord = st.fractions(min_value=-2, max_value=2, max_denominator=3)
        pts = [tuple(data.draw(coord) for _ in range(dim)) for _ in range(count)]
        q = tuple(data.draw(coord) for _ in range(dim))
        if data.draw(st.booleans()):
            lam = [data.draw(st.integers(0, 3)) for _ in range(count)]
            if sum(lam):
                q = tuple(sum(F(l, sum(lam)) * p[x] for l, p in zip(lam, pts)) for x in range(dim))
        assert hull_membership_oracle(q, pts) == member(hull_polytope(pts), q)
