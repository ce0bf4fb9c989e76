from __future__ import annotations

from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linmeans import lp
from linmeans.core import CapacityError, float_mode
from linmeans.lp import EQ, GE, LE, LinearProgram, LpOutcome, lexmin, solve, solve_checked, verify_certificate


def _box(n, lo=-3, hi=3):
    prog = LinearProgram(n)
    for k in range(n):
        prog.bound(k, lo, hi)
    return prog


class TestExamples:
    def test_box_maximum(self):
        prog = LinearProgram(1)
        prog.add([1], GE, 0)
        prog.add([1], LE, 1)
        prog.set_objective([1], "max")
        out = solve(prog)
        assert out.status == lp.OPTIMAL
        assert out.assignment == (1,) and out.value == 1
        assert verify_certificate(prog, out)

    def test_contradiction(self):
        prog = LinearProgram(1)
        prog.add([1], GE, 1)
        prog.add([1], LE, 0)
        out = solve(prog)
        assert out.status == lp.INFEASIBLE
        assert out.farkas == (1, 1)
        assert verify_certificate(prog, out)

    def test_feasibility_without_objective(self):
        prog = LinearProgram(2)
        prog.add([1, 1], EQ, 1)
        prog.bound(0, 0, None)
        prog.bound(1, 0, None)
        out = solve(prog)
        assert out.status == lp.FEASIBLE
        assert sum(out.assignment) == 1

    def test_unbounded_ray(self):
        prog = LinearProgram(2)
        prog.add([1, -1], LE, 1)
        prog.bound(0, 0, None)
        prog.bound(1, 0, None)
        prog.set_objective([1, 1], "max")
        out = solve(prog)
        assert out.status == lp.UNBOUNDED
        assert verify_certificate(prog, out)

    def test_min_sense_duals(self):
        prog = LinearProgram(2)
        prog.add([1, 1], GE, 2)
        prog.bound(0, 0, None)
        prog.bound(1, 0, None)
        prog.set_objective([3, 1], "min")
        out = solve_checked(prog)
        assert out.value == 2 and out.assignment == (0, 2)

    def test_float_mode(self):
        prog = LinearProgram(2)
        prog.add([1, 2], LE, 3)
        prog.bound(0, 0, 3)
        prog.bound(1, 0, None)
        prog.set_objective([3, 1], "max")
        with float_mode():
            out = solve_checked(prog)
        assert out.value == pytest.approx(9.0)


class TestCertificateGate:
    def test_perturbed_assignment_fails(self):
        prog = LinearProgram(2)
        prog.add([1, 1], LE, 1)
        prog.bound(0, 0, None)
        prog.bound(1, 0, None)
        prog.set_objective([1, 2], "max")
        out = solve(prog)
        bumped = LpOutcome(lp.FEASIBLE, (out.assignment[0], out.assignment[1] + F(1, 1000)))
        assert verify_certificate(prog, LpOutcome(lp.FEASIBLE, out.assignment))
        assert not verify_certificate(prog, bumped)

    def test_negative_multiplier_fails(self):
        prog = LinearProgram(1)
        prog.add([1], GE, 1)
        prog.add([1], LE, 0)
        out = solve(prog)
        bad = LpOutcome(lp.INFEASIBLE, farkas=(F(-1), out.farkas[1]), bound_farkas=out.bound_farkas)
        assert not verify_certificate(prog, bad)

    def test_wrong_optimum_fails(self):
        prog = _box(1)
        prog.set_objective([1], "max")
        out = solve(prog)
        assert not verify_certificate(prog, LpOutcome(lp.OPTIMAL, (F(2),), F(2), duals=(), bound_duals=((0, 1),)))
        assert verify_certificate(prog, out)


class TestCapacityAndShape:
    def test_capacity(self):
        with pytest.raises(CapacityError):
            solve(_box(5), capacity=4)

    def test_row_length(self):
        with pytest.raises(ValueError):
            LinearProgram(2).add([1], LE, 0)

    def test_bad_relation(self):
        with pytest.raises(ValueError):
            LinearProgram(1).add([1], "<", 0)


class TestLexmin:
    def test_order_matters(self):
        prog = LinearProgram(2)
        prog.add([1, 1], EQ, 1)
        prog.bound(0, 0, None)
        prog.bound(1, 0, None)
        assert lexmin(prog, [0, 1]) == (0, 1)
        assert lexmin(prog, [1, 0]) == (1, 0)

    def test_infeasible(self):
        prog = LinearProgram(1)
        prog.add([1], GE, 1)
        prog.add([1], LE, 0)
        assert lexmin(prog, [0]) is None


# --------------------------------------------------------------------------
# independent oracle: enumerate basic solutions of a boxed program


def _det(m):
    if len(m) == 1:
        return m[0][0]
    return sum((-1) ** c * m[0][c] * _det([row[:c] + row[c + 1:] for row in m[1:]]) for c in range(len(m)))


def _cramer(A, b):
    D = _det(A)
    if D == 0:
        return None
    out = []
    for c in range(len(A)):
        Ac = [row[:c] + [b[r]] + row[c + 1:] for r, row in enumerate(A)]
        out.append(F(_det(Ac)) / D)
    return tuple(out)


def _oracle(n, rows, objective):
    """Max of ``objective`` over all feasible basic points, or None if there are none."""
    hyper = [(list(a), r) for a, _, r in rows]
    for k in range(n):
        e = [1 if j == k else 0 for j in range(n)]
        hyper += [(e, F(-3)), (e, F(3))]
    best = None
    for pick in combinations(hyper, n):
        x = _cramer([list(a) for a, _ in pick], [r for _, r in pick])
        if x is None or any(abs(v) > 3 for v in x):
            continue
        ok = True
        for a, rel, r in rows:
            s = sum(ai * xi for ai, xi in zip(a, x))
            if (rel == LE and s > r) or (rel == GE and s < r) or (rel == EQ and s != r):
                ok = False
                break
        if ok:
            val = sum(c * xi for c, xi in zip(objective, x))
            best = val if best is None or val > best else best
    return best


small = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def boxed_programs(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 5))
    rows = []
    for _ in range(m):
        a = tuple(draw(small) for _ in range(n))
        rows.append((a, draw(st.sampled_from([LE, GE, LE, EQ])), draw(small)))
    obj = tuple(draw(small) for _ in range(n))
    return n, rows, obj


class TestAgainstVertexOracle:
    @given(boxed_programs())
    def test_status_and_value(self, case):
        n, rows, obj = case
        prog = _box(n)
        for a, rel, r in rows:
            prog.add(a, rel, r)
        prog.set_objective(obj, "max")
        out = solve(prog)
        assert verify_certificate(prog, out)
        expected = _oracle(n, rows, obj)
        if expected is None:
            assert out.status == lp.INFEASIBLE
        else:
            assert out.status == lp.OPTIMAL
            assert out.value == expected

    @given(boxed_programs())
    def test_deterministic(self, case):
        n, rows, obj = case
        prog = _box(n)
        for a, rel, r in rows:
            prog.add(a, rel, r)
        prog.set_objective(obj, "min")
        assert solve(prog) == solve(prog.copy())
