from __future__ import annotations

import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linmeans import fixtures, simulate as sim
from linmeans.consistency import test_glm, test_llm
from linmeans.core import CapacityError, SingularSpec, SpecError, dataset_to_json
from linmeans.identify import verify_equilibrium
from linmeans.simulate import InfluenceSpec
from linmeans.ulm import test_ulm

from conftest import vec


def _row(spec, group, agent):
    return dict(sim.build_influence(spec, group)[agent].weights)


class TestBuildInfluence:
    def test_uniform(self):
        rows = sim.build_influence(InfluenceSpec(sim.UNIFORM), ["a", "b", "c"])
        assert all(x == F(1, 3) for r in rows.values() for x in r.weights.values())

    def test_luce(self):
        spec = InfluenceSpec(sim.LUCE, w={"Ann": {"Ann": 1, "Ben": 2, "Can": 2}, "Ben": {"Ann": 1, "Ben": 1}})
        assert _row(spec, ["Ann", "Ben"], "Ann") == {"Ann": F(1, 3), "Ben": F(2, 3)}

    def test_club(self):
        spec = InfluenceSpec(sim.CLUB, partition=(("a", "b"), ("c",)),
                             alpha={"a": {0: 1, 1: 3}, "b": {0: 1, 1: 1}, "c": {0: 1, 1: 1}})
        assert _row(spec, ["a", "b", "c"], "a") == {"a": F(1, 8), "b": F(1, 8), "c": F(3, 4)}
        # only the own club meets a pair of club mates
        assert _row(spec, ["a", "b"], "a") == {"a": F(1, 2), "b": F(1, 2)}

    def test_friendship(self):
        spec = InfluenceSpec(sim.FRIENDSHIP, rank={"a": ("b", "c"), "b": ("a", "c"), "c": ("a", "b")},
                             alpha_self={"a": F(1, 2), "b": F(1, 4), "c": F(3, 4)},
                             rank_weight={"a": (1, 1), "b": (2, 1), "c": (3, 1)})
        assert _row(spec, ["a", "b", "c"], "a") == {"a": F(1, 2), "b": F(1, 3), "c": F(1, 6)}
        # c moves up to first place once b is absent
        assert _row(spec, ["a", "c"], "a") == {"a": F(1, 2), "c": F(1, 2)}
        assert _row(spec, ["a"], "a") == {"a": 1}

    def test_participation(self):
        spec = InfluenceSpec(sim.PARTICIPATION, gamma={"a": F(1, 2), "b": F(1, 2)},
                             w={"a": {"a": 1, "b": 1}, "b": {"a": 1, "b": 1}})
        assert _row(spec, ["a", "b"], "a") == {"a": F(3, 4), "b": F(1, 4)}

    def test_participation_cap(self):
        agents = [f"a{k:02d}" for k in range(13)]
        spec = InfluenceSpec(sim.PARTICIPATION, gamma={a: F(1, 2) for a in agents},
                             w={a: {b: 1 for b in agents} for a in agents})
        with pytest.raises(CapacityError):
            sim.build_influence(spec, agents)

    def test_single_arrangement_is_luce(self):
        w = {"a": 1, "b": 3, "c": 2}
        arrival = InfluenceSpec(sim.ARRIVAL, arrangements=((F(1), w),))
        luce = InfluenceSpec(sim.LUCE, w={"a": w, "b": w, "c": w})
        for agent in "abc":
            assert _row(arrival, ["a", "b", "c"], agent) == _row(luce, ["a", "b", "c"], agent)

    def test_arrival_per_agent(self):
        spec = InfluenceSpec(sim.ARRIVAL, per_agent=True, arrangements=(
            (F(1, 2), {"a": {"a": 1, "b": 1}, "b": {"a": 1, "b": 3}}),
            (F(1, 2), {"a": {"a": 1, "b": 0}, "b": {"a": 1, "b": 1}})))
        assert _row(spec, ["a", "b"], "a") == {"a": F(3, 4), "b": F(1, 4)}
        assert _row(spec, ["a", "b"], "b") == {"a": F(3, 8), "b": F(5, 8)}

    def test_arrival_probabilities(self):
        with pytest.raises(SpecError):
            InfluenceSpec(sim.ARRIVAL, arrangements=((F(1, 2), {"a": 1}),))

    def test_uncovered_agent(self):
        with pytest.raises(SpecError):
            sim.build_influence(InfluenceSpec(sim.LUCE, w={"a": {"a": 1}}), ["a", "b"])

    def test_bad_kind(self):
        with pytest.raises(SpecError):
            InfluenceSpec("nope")

    @given(st.integers(0, 10_000), st.sampled_from(sim.KINDS))
    def test_rows_stochastic(self, seed, kind):
        rng = random.Random(seed)
        agents = ["A", "B", "C", "D"]
        groups = sim.random_groups(rng, agents, 4)
        spec = sim.random_spec(kind, agents, rng, groups)
        for g in groups:
            for r in sim.build_influence(spec, g).values():
                assert sum(r.weights.values()) == 1
                assert r.self_weight > 0
                assert all(x >= 0 for x in r.weights.values())


class TestEquilibrium:
    def test_u2(self):
        rows = sim.build_influence(InfluenceSpec(sim.UNIFORM), ["1", "2"])
        out = sim.solve_equilibrium(rows, {"1": vec(1, 0), "2": vec(0, 1)})
        assert out == {"1": vec("2/3", "1/3"), "2": vec("1/3", "2/3")}

    def test_single_agent(self):
        assert sim.solve_equilibrium({"a": {"a": 1}}, {"a": vec("1/4", "3/4")}) == {"a": vec("1/4", "3/4")}

    def test_zero_self_weight(self):
        with pytest.raises(SingularSpec):
            sim.solve_equilibrium({"a": {"a": 0, "b": 1}, "b": {"a": 0, "b": 1}},
                                  {"a": vec(1, 0), "b": vec(0, 1)})


class TestGenerate:
    def test_u2(self, u2):
        truth = sim.generate_dataset(InfluenceSpec(sim.UNIFORM), {"1": vec(1, 0), "2": vec(0, 1)}, [["1", "2"]],
                                     alternatives=("x", "y"))
        assert dataset_to_json(truth.dataset) == dataset_to_json(u2)

    def test_abc_narrative(self, abc_three):
        prof = fixtures.abc_profiles()
        spec = InfluenceSpec(sim.LUCE, w={a: dict(w) for a, (_, w) in prof.items()})
        truth = sim.generate_dataset(spec, {a: v for a, (v, _) in prof.items()},
                                     [["Ann", "Ben"], ["Ann", "Can"], ["Ben", "Can"]], alternatives=fixtures.ACTIVITIES)
        assert dataset_to_json(truth.dataset) == dataset_to_json(abc_three)

    def test_deterministic(self):
        a = sim.random_instance(sim.GENERAL, 11, n_agents=4, n_groups=4)
        b = sim.random_instance(sim.GENERAL, 11, n_agents=4, n_groups=4)
        assert a.to_json() == b.to_json()

    def test_random_ideals_need_alternatives(self):
        with pytest.raises(SpecError):
            sim.generate_dataset(InfluenceSpec(sim.UNIFORM), "random", [["a"]])

    def test_ground_truth_json(self):
        doc = sim.random_instance(sim.LUCE, 3).to_json()
        assert set(doc) == {"dataset", "ideals", "rows"}
        json.dumps(doc)

    def test_general_non_luce_corpus_item(self):
        from test_consistency import _general_non_luce

        d = _general_non_luce()
        assert test_glm(d, "1").consistent and not test_llm(d, "1").consistent


class TestSpecJson:
    @given(st.integers(0, 10_000), st.sampled_from(sim.KINDS))
    def test_round_trip(self, seed, kind):
        rng = random.Random(seed)
        agents = ["A", "B", "C"]
        groups = sim.random_groups(rng, agents, 3)
        spec = sim.random_spec(kind, agents, rng, groups)
        again = sim.parse_spec(json.dumps(sim.spec_to_json(spec)))
        for g in groups:
            assert sim.build_influence(again, g) == sim.build_influence(spec, g)


class TestNesting:
    @given(st.integers(0, 10_000))
    def test_uniform_passes_ulm(self, seed):
        truth = sim.random_instance(sim.UNIFORM, seed, n_agents=4, n_groups=4)
        v = test_ulm(truth.dataset)
        assert v.consistent and v.v == dict(truth.ideals)

    @given(st.integers(0, 10_000))
    def test_luce_passes_llm(self, seed):
        d = sim.random_instance(sim.LUCE, seed, n_agents=4, n_groups=4).dataset
        assert all(test_llm(d, a).consistent for a in d.agents if d.groups_of(a))

    @given(st.integers(0, 10_000), st.sampled_from(sim.KINDS))
    def test_everything_passes_glm(self, seed, kind):
        truth = sim.random_instance(kind, seed, n_agents=4, n_groups=4)
        d = truth.dataset
        assert all(test_glm(d, a, certificates=False).consistent for a in d.agents if d.groups_of(a))
        for o in d.observations:
            label = d.group_label(o.group)
            rows = {a: truth.rows[(label, a)] for a in o.group}
            assert verify_equilibrium(o.choices, rows, truth.ideals)


class TestCorpus:
    def test_mix(self):
        items = sim.corpus(28, seed=5)
        tags = {t.split("+")[0] for t, _ in items}
        assert tags == set(sim.KINDS)
        assert any("perturbed" in t for t, _ in items)

    def test_perturb_keeps_simplex(self):
        rng = random.Random(1)
        d = sim.random_instance(sim.LUCE, 2).dataset
        p = sim.perturb(d, rng)
        assert p != d
        assert all(sum(r) == 1 and min(r) >= 0 for o in p.observations for r in o.choices.values())
