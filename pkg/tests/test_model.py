import math

import numpy as np
import pytest

from lpirls.apps import gen_rpr, gen_rr, gen_slr
from lpirls.model import (
    BestKTerm,
    ExponentialDecay,
    Fixed,
    IrlsConfig,
    RegressionInstance,
    ResidualQuantile,
    RspReport,
    SmoothingState,
    TheoryConstants,
    validate_instance,
)


def test_valid_identity_instance():
    inst = RegressionInstance(np.eye(2), [1.0, 1.0], x_star=[1.0, 1.0], k=0)
    assert validate_instance(inst) == []


def test_dimension_mismatch():
    inst = RegressionInstance(np.ones((3, 2)), [1.0, 2.0])
    assert validate_instance(inst) == ["dimension mismatch"]


def test_residual_not_sparse():
    inst = RegressionInstance(np.eye(2), [1.0, 0.0], x_star=[1.0, 1.0], k=0)
    assert validate_instance(inst) == ["residual not 0-sparse"]


def test_support_must_match_residual():
    inst = RegressionInstance(np.eye(3), [1.0, 0.0, 0.0], x_star=[1.0, 1.0, 0.0], k=1,
                              support_star=(0,))
    assert validate_instance(inst) == ["support_star does not match residual support"]


def test_sparsity_threshold_depends_on_noise_flag():
    y = np.array([1.0, 1.0 + 1e-14])
    exact = RegressionInstance(np.eye(2), y, x_star=[1.0, 1.0], k=0, noise_sigma=0.0)
    unknown = RegressionInstance(np.eye(2), y, x_star=[1.0, 1.0], k=0)
    noisy = RegressionInstance(np.eye(2), [1.0, 1.5], x_star=[1.0, 1.0], k=0, noise_sigma=0.1)
    assert validate_instance(exact) == ["residual not 0-sparse"]
    assert validate_instance(unknown) == []
    assert validate_instance(noisy) == []


@pytest.mark.parametrize("seed", range(5))
def test_generators_produce_valid_instances(seed):
    for inst in (gen_rr(30, 3, 6, seed=seed), gen_rr(30, 3, 6, sigma=0.1, seed=seed),
                 gen_slr(30, 3, shuffle_ratio=0.4, seed=seed), gen_rpr(30, 3, 20, seed=seed)):
        assert validate_instance(inst) == []


def test_instance_arrays_are_read_only():
    inst = RegressionInstance(np.eye(2), [1.0, 2.0], x_star=[0.0, 0.0])
    with pytest.raises(ValueError):
        inst.a_matrix[0, 0] = 5.0
    with pytest.raises(ValueError):
        inst.y[0] = 5.0


def test_smoothing_rule_validation():
    with pytest.raises(ValueError):
        Fixed(0.0)
    with pytest.raises(ValueError):
        ExponentialDecay(1.0, 1.0)
    with pytest.raises(ValueError):
        ExponentialDecay(-1.0, 0.5)


def test_initial_smoothing_state():
    assert SmoothingState.initial(Fixed(0.3)).eps_current == 0.3
    assert SmoothingState.initial(ExponentialDecay(2.0, 0.5)).eps_current == 2.0
    assert math.isinf(SmoothingState.initial(BestKTerm()).eps_current)
    assert math.isinf(SmoothingState.initial(ResidualQuantile()).eps_current)


def test_config_defaults_and_validation():
    cfg = IrlsConfig()
    assert (cfg.max_iters, cfg.stop_rel_change, cfg.eps_floor) == (50, 1e-15, 1e-16)
    assert isinstance(cfg.smoothing, BestKTerm)
    for bad in ({"p": 1.5}, {"p": -0.1}, {"eps_floor": 0.0}, {"stop_rel_change": -1.0},
                {"max_iters": 0}, {"alpha": -1}, {"init": "random"}, {"wls_method": "cg"}):
        with pytest.raises(ValueError):
            IrlsConfig(**bad)


def test_rsp_report_flags():
    rep = RspReport(1.0, 1, math.inf, "exact", np.array([1.0, 0.0]), (0,))
    assert rep.infinite and not rep.holds
    assert rep.to_dict()["eta"] == "inf"
    rep = RspReport(1.0, 1, 0.5, "exact", np.ones(3), (0,))
    assert rep.holds and rep.to_dict()["rsp_fails"] is False


def test_theory_constants_radius():
    tc = TheoryConstants(eta=0.1, c=0.5, mu=1.0, p=0.0, min_abs_residual=0.4)
    assert tc.radius == 0.2
