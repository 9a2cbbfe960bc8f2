"""States and dilation isometries of the Wigner's friend experiment.

The friend F measures a spin S in the z basis at t1.  At t_W Wigner measures
S and F jointly in the basis

    |1>_SF = a |up, U> + b |down, D>
    |2>_SF = b* |up, U> - a* |down, D>

and the lab is described unitarily throughout.  Alternatively Wigner applies a
"Hadamard" unitary to the SF pair and leaves his own register untouched.

Register layout
---------------
The friend is reduced to a single record qubit (U, D).  Her "ready" state only
exists at t0, where no 8-dimensional state is materialised: the t0 global
state is the system ket together with the implicit ``|0>_F |0>_W`` ready flag.

Wigner's register W has two slots.  Slot 0 holds ``|0>_W`` (ready) until
Wigner acts and ``|1>_W`` afterwards; slot 1 holds ``|2>_W``.  The two uses of
slot 0 never coexist in one state, so the 8-dimensional space S x F x W is
enough.  Wigner's measurement is purified by the unitary

    |1>_SF |0>_W -> |1>_SF |1>_W,     |2>_SF |0>_W -> |2>_SF |2>_W,

which in the folded register is an X on W controlled by ``|2><2|_SF``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernel as K

DIM_S = 2
DIM_SF = 4
DIM = 8

UP, DOWN = 0, 1
REC_U, REC_D = 0, 1
FRIEND_LABELS = ("U", "D")
WIGNER_LABELS = ("1", "2")


class Variant(enum.Enum):
    MEASUREMENT = "measurement"
    HADAMARD = "hadamard"


class TimeTag(enum.Enum):
    T0 = "t0"
    T1 = "t1"
    T2 = "t2"

    @classmethod
    def coerce(cls, t) -> "TimeTag":
        if isinstance(t, cls):
            return t
        try:
            return cls(str(t).lower())
        except ValueError:
            raise K.ContractViolation(f"unknown time tag {t!r}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    """Free parameters of the experiment.

    ``alpha, beta`` are the system amplitudes and ``a, b`` define Wigner's
    measurement basis.  Both pairs must be normalised.
    """

    alpha: complex = 1.0
    beta: complex = 0.0
    a: complex = 1.0
    b: complex = 0.0
    variant: Variant = Variant.MEASUREMENT

    def __post_init__(self):
        for name in ("alpha", "beta", "a", "b"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))

    def validate(self) -> "ScenarioConfig":
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1) > K.EPS_NORM:
            raise K.ContractViolation(f"|alpha|^2 + |beta|^2 != 1 for {self}")
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1) > K.EPS_NORM:
            raise K.ContractViolation(f"|a|^2 + |b|^2 != 1 for {self}")
        return self

    @classmethod
    def from_angle(cls, theta: float, phase: float = 0.0, alpha: complex = 1.0,
                   beta: complex = 0.0, variant: Variant = Variant.MEASUREMENT) -> "ScenarioConfig":
        """Wigner basis ``a = cos(theta) e^{i phase}``, ``b = sin(theta)``."""
        a = math.cos(theta) * complex(math.cos(phase), math.sin(phase))
        return cls(alpha, beta, a, math.sin(theta), variant)

    @property
    def system_ket(self) -> np.ndarray:
        return K.ket(self.alpha, self.beta)

    @property
    def system_density(self) -> np.ndarray:
        return K.projector(self.system_ket)

    def to_json(self) -> dict:
        return {
            "alpha": [self.alpha.real, self.alpha.imag],
            "beta": [self.beta.real, self.beta.imag],
            "a": [self.a.real, self.a.imag],
            "b": [self.b.real, self.b.imag],
            "variant": self.variant.value,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScenarioConfig":
        def c(key):
            value = data[key]
            if isinstance(value, (int, float)):
                return complex(value)
            re, im = value
            return complex(float(re), float(im))

        try:
            cfg = cls(c("alpha"), c("beta"), c("a"), c("b"),
                      Variant(data.get("variant", "measurement")))
        except (KeyError, TypeError, ValueError) as exc:
            raise K.ContractViolation(f"malformed scenario config: {exc}") from None
        return cfg.validate()

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class GlobalState:
    """The lab at one time.

    At t0 ``state`` is the 2-dim system ket (F and W implicitly ready); at t1
    and t2 it is an 8-dim ket, or an 8x8 density operator for mixed inputs.
    """

    time_tag: TimeTag
    state: np.ndarray


def index(s: int, f: int, w: int) -> int:
    return 4 * s + 2 * f + w


def sfw(s: int, f: int, w: int) -> np.ndarray:
    return K.basis(DIM, index(s, f, w))


def wigner_basis(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """``|1>_SF`` and ``|2>_SF`` as 4-dim kets over (S, F)."""
    up_u = K.basis(DIM_SF, 2 * UP + REC_U)
    down_d = K.basis(DIM_SF, 2 * DOWN + REC_D)
    one = cfg.a * up_u + cfg.b * down_d
    two = cfg.b.conjugate() * up_u - cfg.a.conjugate() * down_d
    return one, two


def phi_states(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """System kets ``phi_1 = a up + b down`` and ``phi_2 = b* up - a* down``."""
    return K.ket(cfg.a, cfg.b), K.ket(cfg.b.conjugate(), -cfg.a.conjugate())


def hadamard_sf() -> np.ndarray:
    """Wigner's alternative unitary on SF; identity on |up,D> and |down,U>."""
    H = K.identity(DIM_SF)
    uu, dd = 2 * UP + REC_U, 2 * DOWN + REC_D
    r = 1 / math.sqrt(2)
    H[uu, uu], H[uu, dd] = r, r
    H[dd, uu], H[dd, dd] = r, -r
    return H


def wigner_unitary(cfg: ScenarioConfig) -> np.ndarray:
    """Unitary realisation of Wigner's intervention on the 8-dim space."""
    if cfg.variant is Variant.HADAMARD:
        return K.kron(hadamard_sf(), K.identity(2))
    _, two = wigner_basis(cfg)
    p2 = K.projector(two)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    return K.kron(K.identity(DIM_SF) - p2, K.identity(2)) + K.kron(p2, X)


def friend_record_projectors() -> dict[str, np.ndarray]:
    """``|f><f|_F`` tensored with identity on S and W, keyed by record label."""
    out = {}
    for label, f in zip(FRIEND_LABELS, (REC_U, REC_D)):
        out[label] = K.kron_all(K.identity(2), K.projector(K.basis(2, f)), K.identity(2))
    return out


def wigner_outcome_projectors(cfg: ScenarioConfig) -> dict[str, np.ndarray]:
    """``|w><w|_SF`` tensored with identity on W, for w in {1, 2}."""
    return {
        label: K.kron(K.projector(vec), K.identity(2))
        for label, vec in zip(WIGNER_LABELS, wigner_basis(cfg))
    }


def build_state(cfg: ScenarioConfig, t) -> GlobalState:
    """Global pure state at ``t``, written term by term as in the protocol."""
    cfg.validate()
    t = TimeTag.coerce(t)
    al, be, a, b = cfg.alpha, cfg.beta, cfg.a, cfg.b
    if t is TimeTag.T0:
        return GlobalState(t, cfg.system_ket)
    if t is TimeTag.T1:
        psi = al * sfw(UP, REC_U, 0) + be * sfw(DOWN, REC_D, 0)
        return GlobalState(t, psi)
    if cfg.variant is Variant.HADAMARD:
        r = 1 / math.sqrt(2)
        psi = r * (al + be) * sfw(UP, REC_U, 0) + r * (al - be) * sfw(DOWN, REC_D, 0)
        return GlobalState(t, psi)
    c1 = al * a.conjugate() + be * b.conjugate()
    c2 = al * b - be * a
    psi = (
        a * c1 * sfw(UP, REC_U, 0)
        + b * c1 * sfw(DOWN, REC_D, 0)
        + b.conjugate() * c2 * sfw(UP, REC_U, 1)
        - a.conjugate() * c2 * sfw(DOWN, REC_D, 1)
    )
    return GlobalState(t, psi)


def build_isometry(cfg: ScenarioConfig, t) -> np.ndarray:
    """Dilation ``V_t`` (8x2) taking the initial system ket to the lab at ``t``."""
    cfg.validate()
    t = TimeTag.coerce(t)
    if t is TimeTag.T0:
        raise K.ContractViolation("no isometry is defined at t0")
    V1 = np.column_stack([sfw(UP, REC_U, 0), sfw(DOWN, REC_D, 0)])
    if t is TimeTag.T1:
        return V1
    if cfg.variant is Variant.HADAMARD:
        return K.matmul(wigner_unitary(cfg), V1)
    one, two = wigner_basis(cfg)
    phi1, phi2 = phi_states(cfg)
    w1 = K.basis(2, 0)
    w2 = K.basis(2, 1)
    return (np.outer(K.kron(one, w1), phi1.conj())
            + np.outer(K.kron(two, w2), phi2.conj()))


def evolve_mixed(cfg: ScenarioConfig, rho_s, t) -> np.ndarray:
    """``V_t rho V_t^dagger``; at t0 the system state itself is returned."""
    rho_s = np.asarray(rho_s, dtype=complex)
    if rho_s.shape != (DIM_S, DIM_S) or not K.is_density(rho_s):
        raise K.ContractViolation("evolve_mixed requires a 2x2 density operator")
    t = TimeTag.coerce(t)
    if t is TimeTag.T0:
        return rho_s.copy()
    V = build_isometry(cfg, t)
    return V @ rho_s @ V.conj().T
