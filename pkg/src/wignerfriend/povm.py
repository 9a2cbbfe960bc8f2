"""Effective POVMs on the system qubit for the friend's record at t1 and t2.

A record projector on the lab at time t is pulled back through the dilation
isometry, ``E_f = V_t^dagger Pi_f V_t``, so that ``p(f) = tr(E_f rho)`` for
every initial system state ``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np

from . import kernel as K
from .scenario import (
    ScenarioConfig,
    TimeTag,
    build_isometry,
    friend_record_projectors,
    phi_states,
)

EPS_COMPLETE = 1e-12
EPS_SHARP = 1e-10


@dataclass(frozen=True)
class Povm:
    """Ordered, labelled effects summing to the identity."""

    labels: tuple
    effects: tuple

    def __post_init__(self):
        if len(self.labels) != len(self.effects) or not self.labels:
            raise K.ContractViolation("a POVM needs one effect per label")
        if len(set(self.labels)) != len(self.labels):
            raise K.ContractViolation(f"duplicate outcome labels {self.labels}")
        effects = []
        for E in self.effects:
            E = np.array(E, dtype=complex)
            E.flags.writeable = False
            effects.append(E)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "effects", tuple(effects))

    @classmethod
    def from_mapping(cls, effects: Mapping[Hashable, np.ndarray]) -> "Povm":
        return cls(tuple(effects), tuple(effects.values()))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __getitem__(self, label) -> np.ndarray:
        try:
            return self.effects[self.labels.index(label)]
        except ValueError:
            raise KeyError(label) from None

    def items(self):
        return zip(self.labels, self.effects)

    def probabilities(self, rho) -> dict:
        return {label: K.expectation(E, rho) for label, E in self.items()}

    def completeness_error(self) -> float:
        total = sum(self.effects)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def check(self, complete_eps: float = EPS_COMPLETE, psd_eps: float = K.EPS_PSD,
              herm_eps: float = K.EPS_HERM) -> "Povm":
        """Raise unless every effect is PSD and the effects sum to identity."""
        for label, E in self.items():
            if not K.is_psd(E, psd_eps, herm_eps):
                raise K.ContractViolation(f"effect {label!r} is not positive semidefinite")
        if self.completeness_error() > complete_eps:
            raise K.ContractViolation(
                f"effects do not sum to identity (error {self.completeness_error():.3e})")
        return self


def pullback(V, record_projectors: Mapping[str, np.ndarray]) -> Povm:
    """Heisenberg-picture POVM ``{V^dagger Pi V}`` of a projective record."""
    V = np.asarray(V, dtype=complex)
    if not K.is_isometry(V):
        raise K.ContractViolation("pullback requires an isometry")
    dim = V.shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for label, P in record_projectors.items():
        P = np.asarray(P, dtype=complex)
        if P.shape != (dim, dim):
            raise K.ContractViolation(f"projector {label!r} has shape {P.shape}, need {(dim, dim)}")
        if not K.is_hermitian(P) or np.max(np.abs(P @ P - P)) > K.EPS_HERM:
            raise K.ContractViolation(f"record operator {label!r} is not an orthogonal projector")
        total += P
    if np.max(np.abs(total - np.eye(dim))) > EPS_COMPLETE:
        raise K.ContractViolation("record projectors do not sum to identity")
    effects = {}
    for label, P in record_projectors.items():
        E = K.dagger(V) @ P @ V
        effects[label] = (E + E.conj().T) / 2
    return Povm.from_mapping(effects).check()


def friend_povm(cfg: ScenarioConfig, t) -> Povm:
    """POVM on S whose outcome is the friend's record seen at ``t`` (t1 or t2)."""
    return pullback(build_isometry(cfg, TimeTag.coerce(t)), friend_record_projectors())


def is_sharp(P: Povm, eps: float = EPS_SHARP) -> bool:
    """True iff every effect is idempotent to within ``eps``."""
    return all(float(np.max(np.abs(E @ E - E))) <= eps for E in P.effects)


def expected_second_effects(cfg: ScenarioConfig) -> dict[str, np.ndarray]:
    """Closed-form t2 effects for the measurement variant.

    ``E_U = |a|^2 |phi1><phi1| + |b|^2 |phi2><phi2|`` and ``E_D`` with the
    weights swapped.  Used as an independent check on :func:`pullback`.
    """
    phi1, phi2 = phi_states(cfg)
    pa, pb = abs(cfg.a) ** 2, abs(cfg.b) ** 2
    P1, P2 = K.projector(phi1), K.projector(phi2)
    return {"U": pa * P1 + pb * P2, "D": pb * P1 + pa * P2}
