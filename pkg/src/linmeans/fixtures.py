"""Small canonical datasets used in tests, docs and CLI demos."""

from __future__ import annotations

from fractions import Fraction as F

from .core import Dataset, make_dataset

ACTIVITIES = ("tennis", "volleyball", "walking")


def abc() -> Dataset:
    """Ann, Ben and Can over three activities; two semesters observed."""
    return make_dataset(ACTIVITIES, [
        {"Ann": ["0.5", "0.1", "0.4"], "Ben": ["0.7", "0.1", "0.2"]},
        {"Ann": ["0.1", "0.5", "0.4"], "Can": ["0.1", "0.7", "0.2"]},
    ], agents=["Ann", "Ben", "Can"])


def abc_three() -> Dataset:
    """``abc`` plus a semester where Ben and Can are together without Ann.

    The third group's choices are the equilibrium of Ben's and Can's Luce
    profiles, so every agent's ideal point and weights are recoverable.
    """
    return make_dataset(ACTIVITIES, [
        {"Ann": ["0.5", "0.1", "0.4"], "Ben": ["0.7", "0.1", "0.2"]},
        {"Ann": ["0.1", "0.5", "0.4"], "Can": ["0.1", "0.7", "0.2"]},
        {"Ben": ["19/30", "11/30", "0"], "Can": ["11/30", "19/30", "0"]},
    ], agents=["Ann", "Ben", "Can"])


def abc_three_even_split() -> Dataset:
    """Third semester with both Ben and Can at ``(1/2, 1/2, 0)``; GLM-inconsistent for Ben."""
    return make_dataset(ACTIVITIES, [
        {"Ann": ["0.5", "0.1", "0.4"], "Ben": ["0.7", "0.1", "0.2"]},
        {"Ann": ["0.1", "0.5", "0.4"], "Can": ["0.1", "0.7", "0.2"]},
        {"Ben": ["0.5", "0.5", "0"], "Can": ["0.5", "0.5", "0"]},
    ], agents=["Ann", "Ben", "Can"])


def abc_profiles() -> dict:
    """Ideal points and Luce weights (ordered Ann, Ben, Can) behind ``abc_three``."""
    return {
        "Ann": ((F(1, 10), F(1, 10), F(4, 5)), {"Ann": F(1), "Ben": F(2), "Can": F(2)}),
        "Ben": ((F(9, 10), F(1, 10), F(0)), {"Ann": F(1), "Ben": F(1), "Can": F(1)}),
        "Can": ((F(1, 10), F(9, 10), F(0)), {"Ann": F(1), "Ben": F(1), "Can": F(1)}),
    }


def one_d() -> Dataset:
    """Two activities; Ann's ideal share of volleyball is only bounded to ``[0, 7/10]``."""
    return make_dataset(("volleyball", "walking"), [
        {"Ann": ["0.8", "0.2"], "Ben": ["0.9", "0.1"]},
        {"Ann": ["0.7", "0.3"], "Can": ["0.85", "0.15"]},
    ], agents=["Ann", "Ben", "Can"])


def one_d_inconsistent() -> Dataset:
    """Agent 1 sits below her peer at 3/10 and above her peer at 1/2; no ideal point fits."""
    return make_dataset(("x", "y"), [
        {"1": ["0.3", "0.7"], "2": ["0.6", "0.4"]},
        {"1": ["0.5", "0.5"], "3": ["0.2", "0.8"]},
    ], agents=["1", "2", "3"])


def u2() -> Dataset:
    """Two agents with opposite ideal points and equal weights."""
    return make_dataset(("x", "y"), [
        {"1": ["2/3", "1/3"], "2": ["1/3", "2/3"]},
    ], agents=["1", "2"])
