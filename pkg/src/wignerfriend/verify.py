"""Seeded invariant suites behind ``wignerfriend verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernel as K
from .joint import Verdict, commutator_criterion, feasibility_solver
from .povm import expected_second_effects, friend_povm
from .predict import linearity_check, one_time_prob, two_time_table
from .scenario import (
    FRIEND_LABELS,
    ScenarioConfig,
    TimeTag,
    Variant,
    build_isometry,
    build_state,
    evolve_mixed,
    friend_record_projectors,
)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def random_unit_pair(rng) -> tuple[complex, complex]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def random_config(rng, variant: Variant = Variant.MEASUREMENT) -> ScenarioConfig:
    alpha, beta = random_unit_pair(rng)
    a, b = random_unit_pair(rng)
    return ScenarioConfig(alpha, beta, a, b, variant)


def random_density(rng, dim: int = 2) -> np.ndarray:
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def feasible_configs(rng, n: int) -> list[ScenarioConfig]:
    """Random-phase members of the two commuting families."""
    out = []
    for k in range(n):
        chi = rng.uniform(0, 2 * math.pi)
        phase = complex(math.cos(chi), math.sin(chi))
        if k % 2 == 0:
            out.append(ScenarioConfig(1.0, 0.0, phase, 0.0))
        else:
            out.append(ScenarioConfig(1.0, 0.0, phase / math.sqrt(2), 1 / math.sqrt(2)))
    return out


def run_suites(seed: int = 0, samples: int = 200,
               tol_override: float | None = None) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    configs = [random_config(rng) for _ in range(samples)]
    results = []

    def record(name, dev, tol):
        results.append(SuiteResult(name, float(dev), tol if tol_override is None else tol_override))

    dev = 0.0
    for cfg in configs:
        for t in (TimeTag.T1, TimeTag.T2):
            V = build_isometry(cfg, t)
            dev = max(dev, np.max(np.abs(V.conj().T @ V - np.eye(2))))
    record("isometry", dev, 1e-12)

    dev = 0.0
    for cfg in configs:
        for t in (TimeTag.T1, TimeTag.T2):
            direct = build_state(cfg, t).state
            dev = max(dev, np.max(np.abs(build_isometry(cfg, t) @ cfg.system_ket - direct)))
    record("state_vs_isometry", dev, 1e-12)

    dev = 0.0
    for cfg in configs:
        E1, E2 = friend_povm(cfg, TimeTag.T1), friend_povm(cfg, TimeTag.T2)
        closed = expected_second_effects(cfg)
        dev = max(dev, np.max(np.abs(E1["U"] - np.diag([1, 0]))),
                  np.max(np.abs(E1["D"] - np.diag([0, 1]))),
                  *(np.max(np.abs(E2[f] - closed[f])) for f in FRIEND_LABELS))
    record("pullback_closed_form", dev, 1e-12)

    dev = 0.0
    for cfg in configs:
        E1, E2 = friend_povm(cfg, TimeTag.T1), friend_povm(cfg, TimeTag.T2)
        a, b = cfg.a, cfg.b
        x = (abs(a) ** 2 - abs(b) ** 2) * a * b.conjugate()
        expected = np.array([[0, x], [-x.conjugate(), 0]])
        dev = max(dev, np.max(np.abs(K.commutator(E1["U"], E2["U"]) - expected)))
    record("commutator_formula", dev, 1e-12)

    dev = 0.0
    records = friend_record_projectors()
    for cfg in configs:
        rho = random_density(rng)
        for t in (TimeTag.T1, TimeTag.T2):
            sigma = evolve_mixed(cfg, rho, t)
            for f in FRIEND_LABELS:
                dev = max(dev, abs(one_time_prob(cfg, rho, t, f) - K.expectation(records[f], sigma)))
    record("born_consistency", dev, 1e-12)

    disagreements = 0
    for cfg in configs[: max(1, samples // 4)] + feasible_configs(rng, 8):
        E1, E2 = friend_povm(cfg, TimeTag.T1), friend_povm(cfg, TimeTag.T2)
        exact = commutator_criterion(E1, E2)
        solved = feasibility_solver(E1, E2, certify=False)
        if solved.verdict is Verdict.INDETERMINATE or solved.verdict is not exact.verdict:
            disagreements += 1
    record("solver_agreement", disagreements, 0.0)

    feasible = feasible_configs(rng, 20)
    dev = 0.0
    for cfg in feasible:
        for _ in range(max(1, samples // 20)):
            rho = random_density(rng)
            table = two_time_table(cfg, rho)
            for f in FRIEND_LABELS:
                dev = max(dev, abs(table.marginals_t1[f] - one_time_prob(cfg, rho, TimeTag.T1, f)),
                          abs(table.marginals_t2[f] - one_time_prob(cfg, rho, TimeTag.T2, f)))
    record("marginals", dev, 1e-10)

    dev = 0.0
    for cfg in feasible:
        for _ in range(max(1, samples // 20)):
            dev = max(dev, linearity_check(cfg, random_density(rng), random_density(rng),
                                           float(rng.uniform())))
    record("linearity", dev, 1e-10)

    dev = 0.0
    dev_flip = 0.0
    for cfg in feasible:
        for _ in range(max(1, samples // 20)):
            cond = two_time_table(cfg, random_density(rng)).conditionals
            for f1 in FRIEND_LABELS:
                for f2 in FRIEND_LABELS:
                    if cfg.b == 0:
                        dev = max(dev, abs(cond[f1][f2] - (1.0 if f1 == f2 else 0.0)))
                    else:
                        dev_flip = max(dev_flip, abs(cond[f1][f2] - 0.5))
    record("memory_persistence", dev, 1e-12)
    record("memory_flip", dev_flip, 1e-12)

    hadamard = ScenarioConfig(1.0, 0.0, 1.0, 0.0, Variant.HADAMARD)
    verdict = commutator_criterion(friend_povm(hadamard, TimeTag.T1),
                                   friend_povm(hadamard, TimeTag.T2))
    record("hadamard_incompatible", 1.0 if verdict.jointly_measurable else 0.0, 0.0)
    return results
