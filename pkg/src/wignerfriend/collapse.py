"""Predictions of a friend who applies the state-update rule, against unitary ones.

Update chain used by :func:`collapse_predictions` (Lüders updates on the lab
density operator):

1. ``Sigma1 = V1 rho V1^dagger``; the friend sees ``f1`` with probability
   ``tr(Pi_f1 Sigma1)`` and the lab collapses to ``Pi_f1 Sigma1 Pi_f1 / p``.
   S and F are collapsed together, giving ``|up,U>`` or ``|down,D>``.
2. Wigner measures ``{|1><1|_SF, |2><2|_SF}`` and the lab is projected onto
   his outcome ``w``.  In the Hadamard variant his unitary is applied instead
   and ``w`` is reported as ``"-"``.
3. The friend's record ``f2`` is read from the resulting state.

:func:`trajectory_sampler` reproduces the same protocol shot by shot on state
vectors and serves as a Monte-Carlo check of the closed-form chain.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernel as K
from .predict import one_time_prob
from .scenario import (
    FRIEND_LABELS,
    WIGNER_LABELS,
    ScenarioConfig,
    TimeTag,
    Variant,
    build_state,
    evolve_mixed,
    friend_record_projectors,
    hadamard_sf,
    wigner_basis,
    wigner_outcome_projectors,
    wigner_unitary,
)

NO_OUTCOME = "-"
SHARD_SIZE = 1 << 16


@dataclass(frozen=True)
class CollapseReport:
    p_f1: dict
    p_f2_given_f1_collapse: dict
    p_f2_collapse: dict
    p_f2_unitary: dict
    max_gap: float
    branches: dict = field(default_factory=dict)
    wigner_unitary: bool = False


def _wigner_steps(cfg: ScenarioConfig):
    if cfg.variant is Variant.HADAMARD:
        U = wigner_unitary(cfg)
        return [(NO_OUTCOME, U, True)]
    return [(w, P, False) for w, P in wigner_outcome_projectors(cfg).items()]


def collapse_predictions(cfg: ScenarioConfig, rho) -> CollapseReport:
    rho = np.asarray(rho, dtype=complex)
    sigma = evolve_mixed(cfg, rho, TimeTag.T1)
    records = friend_record_projectors()
    branches = {}
    p_f1 = {}
    cond = {}
    for f1, P1 in records.items():
        p1 = K.expectation(P1, sigma)
        p_f1[f1] = p1
        if p1 <= 1e-15:
            cond[f1] = None
            for w, _, _ in _wigner_steps(cfg):
                for f2 in FRIEND_LABELS:
                    branches[(f1, w, f2)] = 0.0
            continue
        post = P1 @ sigma @ P1 / p1
        row = dict.fromkeys(FRIEND_LABELS, 0.0)
        for w, op, unitary in _wigner_steps(cfg):
            if unitary:
                pw, after = 1.0, op @ post @ op.conj().T
            else:
                pw = K.expectation(op, post)
                after = op @ post @ op / pw if pw > 1e-15 else None
            for f2, P2 in records.items():
                pf2 = K.expectation(P2, after) if after is not None else 0.0
                branches[(f1, w, f2)] = p1 * pw * pf2
                row[f2] += pw * pf2
        cond[f1] = row
    p_f2 = {f2: sum(p for (_, _, y), p in branches.items() if y == f2) for f2 in FRIEND_LABELS}
    p_unitary = {f2: one_time_prob(cfg, rho, TimeTag.T2, f2) for f2 in FRIEND_LABELS}
    gap = max(abs(p_f2[f] - p_unitary[f]) for f in FRIEND_LABELS)
    return CollapseReport(p_f1, cond, p_f2, p_unitary, gap, branches,
                          cfg.variant is Variant.HADAMARD)


# -- Monte-Carlo trajectories -----------------------------------------------------

def _record_bit() -> np.ndarray:
    """Friend-record bit (0 = U, 1 = D) of each of the 8 basis indices."""
    return (np.arange(8) >> 1) & 1


def _born_record(rng, states: np.ndarray) -> np.ndarray:
    """Sample the friend's record on each row and collapse the rows in place."""
    bit = _record_bit()
    weights = np.abs(states) ** 2
    p_u = weights[:, bit == 0].sum(axis=1) / weights.sum(axis=1)
    outcome = (rng.random(len(states)) >= p_u).astype(np.int64)
    states[bit[None, :] != outcome[:, None]] = 0.0
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    return outcome


def _initial_states(cfg: ScenarioConfig, rho) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble of pure t1 lab states realising ``rho`` and their weights."""
    vals, vecs = np.linalg.eigh(np.asarray(rho, dtype=complex))
    vals = np.clip(vals, 0.0, None)
    vals = vals / vals.sum()
    states = []
    for k in range(2):
        sub = ScenarioConfig(vecs[0, k], vecs[1, k], cfg.a, cfg.b, cfg.variant)
        states.append(build_state(sub, TimeTag.T1).state)
    return np.array(states), vals


def _run_shard(cfg: ScenarioConfig, rho, n: int, seed_seq) -> tuple[dict, dict]:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    t1_states, weights = _initial_states(cfg, rho)

    # collapse protocol
    which = (rng.random(n) >= weights[0]).astype(np.int64)
    psi = t1_states[which].copy()
    f1 = _born_record(rng, psi)
    sf = psi.reshape(n, 4, 2)
    if cfg.variant is Variant.HADAMARD:
        sf = np.einsum("ij,njw->niw", hadamard_sf(), sf)
        w = np.full(n, -1)
    else:
        one, two = wigner_basis(cfg)
        amp1 = np.einsum("i,niw->nw", one.conj(), sf)
        amp2 = np.einsum("i,niw->nw", two.conj(), sf)
        p1 = (np.abs(amp1) ** 2).sum(axis=1)
        p2 = (np.abs(amp2) ** 2).sum(axis=1)
        w = (rng.random(n) * (p1 + p2) >= p1).astype(np.int64)
        chosen = np.where(w[:, None, None] == 0,
                          one[None, :, None] * amp1[:, None, :],
                          two[None, :, None] * amp2[:, None, :])
        sf = chosen / np.linalg.norm(chosen.reshape(n, 8), axis=1)[:, None, None]
    psi = np.ascontiguousarray(sf.reshape(n, 8))
    f2 = _born_record(rng, psi)
    code = f1 * 100 + (w + 1) * 10 + f2
    keys, cnt = np.unique(code, return_counts=True)
    counts = {}
    for k, c in zip(keys.tolist(), cnt.tolist()):
        wl = NO_OUTCOME if (k // 10) % 10 == 0 else WIGNER_LABELS[(k // 10) % 10 - 1]
        counts[(FRIEND_LABELS[k // 100], wl, FRIEND_LABELS[k % 10])] = c

    # unitary stream: Born rule on the final lab state, no collapse at t1
    which = (rng.random(n) >= weights[0]).astype(np.int64)
    final = t1_states @ wigner_unitary(cfg).T
    psi = final[which].copy()
    g = _born_record(rng, psi)
    unitary = {"U": int(np.sum(g == 0)), "D": int(np.sum(g == 1))}
    return counts, unitary


def _run_shard_star(args):
    return _run_shard(*args)


@dataclass(frozen=True)
class SampledReport:
    shots: int
    seed: int
    counts: dict
    unitary_counts: dict
    analytic: CollapseReport

    def frequency(self, key) -> float:
        return self.counts.get(key, 0) / self.shots

    def std_err(self, p: float) -> float:
        return math.sqrt(max(p * (1 - p), 0.0) / self.shots)

    def keys(self) -> list:
        w_labels = [NO_OUTCOME] if self.analytic.wigner_unitary else list(WIGNER_LABELS)
        return [(f1, w, f2) for f1 in FRIEND_LABELS for w in w_labels for f2 in FRIEND_LABELS]

    def rows(self) -> list[dict]:
        out = []
        for key in self.keys():
            freq = self.frequency(key)
            out.append({
                "f1": key[0], "w": key[1], "f2": key[2],
                "count": self.counts.get(key, 0),
                "frequency": freq,
                "analytic_p": self.analytic.branches.get(key, 0.0),
                "std_err": self.std_err(freq),
            })
        return out

    def empirical(self) -> CollapseReport:
        n = self.shots
        p_f1 = {f1: sum(c for k, c in self.counts.items() if k[0] == f1) / n
                for f1 in FRIEND_LABELS}
        cond = {}
        for f1 in FRIEND_LABELS:
            tot = p_f1[f1] * n
            cond[f1] = None if tot == 0 else {
                f2: sum(c for k, c in self.counts.items() if k[0] == f1 and k[2] == f2) / tot
                for f2 in FRIEND_LABELS}
        p_f2 = {f2: sum(c for k, c in self.counts.items() if k[2] == f2) / n
                for f2 in FRIEND_LABELS}
        p_u = {f2: self.unitary_counts.get(f2, 0) / n for f2 in FRIEND_LABELS}
        gap = max(abs(p_f2[f] - p_u[f]) for f in FRIEND_LABELS)
        branches = {k: self.frequency(k) for k in self.keys()}
        return CollapseReport(p_f1, cond, p_f2, p_u, gap, branches,
                              self.analytic.wigner_unitary)


def trajectory_sampler(cfg: ScenarioConfig, rho, shots: int, seed: int,
                       jobs: int = 1) -> SampledReport:
    """Sample ``shots`` records ``(f1, w, f2)`` under the collapse protocol.

    A second, independent stream samples the friend's t2 record from the
    unitarily evolved lab.  Shots are split into fixed-size shards, each with
    its own stream spawned from ``seed``, so the counts do not depend on
    ``jobs``.
    """
    if shots < 1:
        raise K.ContractViolation("shots must be at least 1")
    rho = np.asarray(rho, dtype=complex)
    if not K.is_density(rho):
        raise K.ContractViolation("rho must be a density operator")
    cfg.validate()
    analytic = collapse_predictions(cfg, rho)
    sizes = [SHARD_SIZE] * (shots // SHARD_SIZE)
    if shots % SHARD_SIZE:
        sizes.append(shots % SHARD_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(cfg, rho, n, s) for n, s in zip(sizes, seeds)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_shard_star, tasks))
    else:
        parts = [_run_shard_star(t) for t in tasks]
    counts: dict = {}
    unitary = {"U": 0, "D": 0}
    for c, u in parts:
        for k, v in c.items():
            counts[k] = counts.get(k, 0) + v
        for k, v in u.items():
            unitary[k] += v
    return SampledReport(shots, seed, counts, unitary, analytic)
