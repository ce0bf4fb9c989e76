"""Consistency tests, identification and simulation for linear-in-means choice data."""

from .consistency import (
    GLM,
    GLM_STAR,
    LLM,
    Bet,
    ConsistencyVerdict,
    Witness,
    run_test,
    samet_no_trade_check,
    test_glm,
    test_glm_1d,
    test_glm_star,
    test_llm,
    verify_bet,
    verify_witness,
)
from .core import (
    SIMPLEX,
    Dataset,
    LinMeansError,
    Observation,
    OutcomeSpace,
    float_mode,
    make_dataset,
    parse_dataset,
    serialize_dataset,
    validate_dataset,
)
from .identify import (
    point_identify_ideal,
    predict_group,
    recover_influence,
    recover_luce_weights,
    sharp_set,
)
from .simulate import InfluenceSpec, generate_dataset
from .ulm import decompose_with_shocks, test_ulm

__all__ = [
    "GLM", "GLM_STAR", "LLM", "SIMPLEX",
    "Bet", "ConsistencyVerdict", "Dataset", "InfluenceSpec", "LinMeansError",
    "Observation", "OutcomeSpace", "Witness",
    "decompose_with_shocks", "float_mode", "generate_dataset", "make_dataset",
    "parse_dataset", "point_identify_ideal", "predict_group", "recover_influence",
    "recover_luce_weights", "run_test", "samet_no_trade_check", "serialize_dataset",
    "sharp_set", "test_glm", "test_glm_1d", "test_glm_star", "test_llm", "test_ulm",
    "validate_dataset", "verify_bet", "verify_witness",
]
