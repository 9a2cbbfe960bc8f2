"""Numerical laboratory for the friend's two-time records in Wigner's friend scenarios."""

from .collapse import CollapseReport, collapse_predictions, trajectory_sampler
from .joint import (
    JointVerdict,
    Verdict,
    classify_parameter_space,
    commutator_criterion,
    feasibility_solver,
    grid_certificate,
)
from .kernel import ContractViolation
from .povm import Povm, friend_povm, is_sharp, pullback
from .predict import (
    NoJointDistribution,
    TwoTimeTable,
    linearity_check,
    one_time_prob,
    two_time_table,
)
from .scenario import ScenarioConfig, TimeTag, Variant, build_isometry, build_state, evolve_mixed

__version__ = "0.1.0"
