"""One-time and two-time probabilities for the friend's perceived records.

One-time probabilities come from unitary quantum mechanics alone, through the
pulled-back POVMs.  A two-time table exists only when those POVMs are jointly
measurable; it is then read off the unique joint POVM.  No rule is invented
for the other configurations: :class:`NoJointDistribution` is raised instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernel as K
from .joint import JointVerdict, commutator_criterion
from .povm import friend_povm
from .scenario import FRIEND_LABELS, ScenarioConfig, TimeTag

EPS_CONDITION = 1e-12
SIG_DIGITS = 15


class NoJointDistribution(Exception):
    """No joint distribution of the two records is linear in the initial state
    while reproducing the unitary one-time marginals, for this configuration."""

    def __init__(self, cfg: ScenarioConfig, verdict: JointVerdict):
        self.cfg = cfg
        self.verdict = verdict
        super().__init__(
            "no joint distribution p(f1, f2) linear in rho reproduces the unitary marginals "
            f"(commutator norm {verdict.commutator_norm:.6g}) for config "
            f"{json.dumps(cfg.to_json(), sort_keys=True)}"
        )


@dataclass(frozen=True)
class TwoTimeTable:
    rho: np.ndarray
    joint: dict
    conditionals: dict
    marginals_t1: dict
    marginals_t2: dict

    def check(self, eps_sum: float = 1e-10, eps_neg: float = 1e-12) -> "TwoTimeTable":
        total = sum(self.joint.values())
        if abs(total - 1.0) > eps_sum:
            raise K.ContractViolation(f"joint table sums to {total!r}")
        if min(self.joint.values()) < -eps_neg:
            raise K.ContractViolation("joint table has a negative entry")
        for f1, p in self.marginals_t1.items():
            if abs(sum(self.joint[(f1, f2)] for f2 in self.marginals_t2) - p) > eps_sum:
                raise K.ContractViolation(f"t1 marginal mismatch at {f1}")
        for f2, p in self.marginals_t2.items():
            if abs(sum(self.joint[(f1, f2)] for f1 in self.marginals_t1) - p) > eps_sum:
                raise K.ContractViolation(f"t2 marginal mismatch at {f2}")
        return self


def _density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2) or not K.is_density(rho):
        raise K.ContractViolation("rho must be a 2x2 density operator")
    return rho


def one_time_prob(cfg: ScenarioConfig, rho, t, outcome: str) -> float:
    """``tr(E^t_outcome rho)`` with no state update between t1 and t2."""
    rho = _density(rho)
    t = TimeTag.coerce(t)
    if t is TimeTag.T0:
        raise K.ContractViolation("the friend has no record at t0")
    if outcome not in FRIEND_LABELS:
        raise K.ContractViolation(f"unknown outcome {outcome!r}")
    return K.expectation(friend_povm(cfg, t)[outcome], rho)


def joint_verdict(cfg: ScenarioConfig) -> JointVerdict:
    return commutator_criterion(friend_povm(cfg, TimeTag.T1), friend_povm(cfg, TimeTag.T2))


def two_time_table(cfg: ScenarioConfig, rho, verdict: JointVerdict | None = None) -> TwoTimeTable:
    """Joint and conditional record probabilities from the unique joint POVM.

    Conditionals on a record of vanishing probability are ``None``.
    """
    rho = _density(rho)
    verdict = verdict or joint_verdict(cfg)
    if not verdict.jointly_measurable:
        raise NoJointDistribution(cfg, verdict)
    joint = {label: K.expectation(G, rho) for label, G in verdict.witness.items()}
    m1 = {f1: sum(joint[(f1, f2)] for f2 in FRIEND_LABELS) for f1 in FRIEND_LABELS}
    m2 = {f2: sum(joint[(f1, f2)] for f1 in FRIEND_LABELS) for f2 in FRIEND_LABELS}
    conditionals = {}
    for f1 in FRIEND_LABELS:
        if m1[f1] > EPS_CONDITION:
            conditionals[f1] = {f2: joint[(f1, f2)] / m1[f1] for f2 in FRIEND_LABELS}
        else:
            conditionals[f1] = None
    return TwoTimeTable(rho, joint, conditionals, m1, m2).check()


def linearity_check(cfg: ScenarioConfig, sigma, tau, lam: float) -> float:
    """Largest deviation of ``p_{lam sigma + (1-lam) tau}`` from the mixture of tables."""
    if not 0.0 <= lam <= 1.0:
        raise K.ContractViolation("lambda must lie in [0, 1]")
    sigma, tau = _density(sigma), _density(tau)
    verdict = joint_verdict(cfg)
    mixed = two_time_table(cfg, lam * sigma + (1 - lam) * tau, verdict).joint
    ps = two_time_table(cfg, sigma, verdict).joint
    pt = two_time_table(cfg, tau, verdict).joint
    return max(abs(mixed[k] - lam * ps[k] - (1 - lam) * pt[k]) for k in mixed)


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    return float(f"{x:.{digits}g}")


def table_report(cfg: ScenarioConfig, rho=None) -> dict:
    """JSON-ready report; ``feasible`` is False and tables are absent when no joint exists."""
    rho = cfg.system_density if rho is None else rho
    report = {"config": cfg.to_json(), "feasible": False}
    try:
        table = two_time_table(cfg, rho)
    except NoJointDistribution as exc:
        report["commutator_norm"] = round_sig(exc.verdict.commutator_norm)
        return report
    report["feasible"] = True
    report["joint"] = {f"{f1}{f2}": round_sig(p) for (f1, f2), p in table.joint.items()}
    report["conditionals"] = {
        f1: None if row is None else {f2: round_sig(p) for f2, p in row.items()}
        for f1, row in table.conditionals.items()
    }
    report["marginals"] = {
        "t1": {f: round_sig(p) for f, p in table.marginals_t1.items()},
        "t2": {f: round_sig(p) for f, p in table.marginals_t2.items()},
    }
    return report
