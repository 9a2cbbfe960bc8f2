"""Does a joint POVM for the friend's records at t1 and t2 exist?

Two independent routes answer this for a pair of two-outcome qubit POVMs
``E1 = {E1_U, E1_D}`` and ``E2 = {E2_U, E2_D}``:

* :func:`commutator_criterion` -- when ``E1`` is projective, joint
  measurability holds iff ``[E1_U, E2_U] = 0``, and the joint POVM is then
  unique, ``G_{f1 f2} = E1_{f1} E2_{f2}``.
* :func:`feasibility_solver` -- a direct search.  The marginal equations fix
  three joint effects in terms of ``G = G_UU``::

      G_UD = E1_U - G,  G_DU = E2_U - G,  G_DD = I - E1_U - E2_U + G

  so existence reduces to four PSD constraints on one Hermitian 2x2 matrix.
  Dykstra's alternating projections look for a point in the intersection;
  a branch-and-bound sweep over a grid in Bloch coordinates bounds the
  smallest achievable constraint violation when Dykstra stalls.

All solver arithmetic runs on Bloch coordinates ``G = g0 I + g.sigma`` with
plain floats, where projection onto the PSD cone has a closed form.
"""

from __future__ import annotations

import enum
import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernel as K
from .povm import Povm, friend_povm, is_sharp
from .scenario import ScenarioConfig, TimeTag, Variant

EPS_COMMUTE = 1e-10
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
PLATEAU_WINDOW = 1000
PLATEAU_DELTA = 1e-14
DEFAULT_RESOLUTION = 2e-3


class Verdict(enum.IntEnum):
    INFEASIBLE = 0
    FEASIBLE = 1
    INDETERMINATE = -1


class Method(enum.Enum):
    COMMUTATOR_EXACT = "commutator"
    FEASIBILITY_SOLVER = "solver"


class NotSharpError(K.ContractViolation):
    """The commutator test only applies when the first POVM is projective."""


class MethodDisagreement(RuntimeError):
    """The exact and numerical routes returned different verdicts."""


@dataclass(frozen=True)
class GridCertificate:
    """Outcome of a grid sweep for the least-violating ``G``.

    ``grid_min`` is the smallest worst-case violation among grid points (the
    trace part of ``G`` is optimised exactly at each point).  ``lower_bound``
    is a rigorous bound on the violation of every Hermitian ``G``, obtained
    from ``grid_min`` by Lipschitz continuity.
    """

    resolution: float
    grid_min: float
    lower_bound: float
    argmin: tuple[float, float, float, float]
    boxes: int

    @property
    def no_feasible_point(self) -> bool:
        return self.grid_min > 0.0


@dataclass(frozen=True)
class JointVerdict:
    verdict: Verdict
    witness: Povm | None
    commutator_norm: float
    method: Method
    residual: float
    iterations: int = 0
    certificate: GridCertificate | None = None

    @property
    def jointly_measurable(self) -> bool:
        return self.verdict is Verdict.FEASIBLE


def _two_outcome(E: Povm, name: str) -> None:
    if len(E.labels) != 2 or E.dim != 2:
        raise K.ContractViolation(f"{name} must be a two-outcome qubit POVM")


def commutator_norm(E1: Povm, E2: Povm) -> float:
    return K.operator_norm_2x2(K.commutator(E1.effects[0], E2.effects[0]))


def joint_from_g(E1: Povm, E2: Povm, G) -> Povm:
    """Joint effects with the required marginals, parametrised by ``G_{11}``."""
    (l1, m1), (l2, m2) = E1.labels, E2.labels
    A, B = E1.effects[0], E2.effects[0]
    G = np.asarray(G, dtype=complex)
    return Povm(
        ((l1, l2), (l1, m2), (m1, l2), (m1, m2)),
        (G, A - G, B - G, np.eye(2) - A - B + G),
    )


def marginal_error(joint: Povm, E1: Povm, E2: Povm) -> float:
    """Largest entrywise deviation of the joint's marginals from ``E1, E2``."""
    err = 0.0
    for f1, E in E1.items():
        total = sum(G for (x, _), G in joint.items() if x == f1)
        err = max(err, float(np.max(np.abs(total - E))))
    for f2, E in E2.items():
        total = sum(G for (_, y), G in joint.items() if y == f2)
        err = max(err, float(np.max(np.abs(total - E))))
    return err


def commutator_criterion(E1: Povm, E2: Povm, eps: float = EPS_COMMUTE) -> JointVerdict:
    """Exact verdict for a projective ``E1``; raises :class:`NotSharpError` otherwise."""
    _two_outcome(E1, "E1")
    _two_outcome(E2, "E2")
    if not is_sharp(E1):
        raise NotSharpError("E1 is not sharp; use feasibility_solver instead")
    norm = commutator_norm(E1, E2)
    if norm > eps:
        return JointVerdict(Verdict.INFEASIBLE, None, norm, Method.COMMUTATOR_EXACT, norm)
    labels, effects = [], []
    for f1, A in E1.items():
        for f2, B in E2.items():
            labels.append((f1, f2))
            # symmetrised product; equals A B when the effects commute
            effects.append((A @ B + B @ A) / 2)
    witness = Povm(tuple(labels), tuple(effects)).check()
    return JointVerdict(Verdict.FEASIBLE, witness, norm, Method.COMMUTATOR_EXACT,
                        marginal_error(witness, E1, E2))


# -- Bloch-coordinate machinery -------------------------------------------------

def _constraints(E1: Povm, E2: Povm) -> list[tuple[int, tuple[float, float, float, float]]]:
    """``(sign, A)`` pairs encoding ``sign * (G - A) >= 0``."""
    A, B = E1.effects[0], E2.effects[0]
    return [
        (+1, (0.0, 0.0, 0.0, 0.0)),
        (-1, K.to_bloch(A)),
        (-1, K.to_bloch(B)),
        (+1, K.to_bloch(A + B - np.eye(2))),
    ]


def _violation(sign, A, g) -> float:
    c0 = sign * (g[0] - A[0])
    r = math.sqrt((g[1] - A[1]) ** 2 + (g[2] - A[2]) ** 2 + (g[3] - A[3]) ** 2)
    return max(0.0, r - c0)


def max_violation(E1: Povm, E2: Povm, g) -> float:
    """Largest negative eigenvalue (as a positive number) among the four joint effects."""
    return max(_violation(s, A, g) for s, A in _constraints(E1, E2))


def _project(sign, A, g):
    """Nearest point (Frobenius) to ``g`` in ``{G : sign * (G - A) >= 0}``."""
    c0 = sign * (g[0] - A[0])
    c1 = sign * (g[1] - A[1])
    c2 = sign * (g[2] - A[2])
    c3 = sign * (g[3] - A[3])
    r = math.sqrt(c1 * c1 + c2 * c2 + c3 * c3)
    if c0 >= r:
        return g
    if c0 <= -r:
        return A
    h = (c0 + r) / 2
    s = sign * h / r
    return (A[0] + sign * h, A[1] + s * c1, A[2] + s * c2, A[3] + s * c3)


def dykstra(constraints, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
            start=(0.0, 0.0, 0.0, 0.0), window: int = PLATEAU_WINDOW,
            delta: float = PLATEAU_DELTA) -> tuple[Verdict, tuple, float, int]:
    """Dykstra's projections onto the intersection of shifted PSD cones.

    Stops with FEASIBLE once the worst violation is at most ``tol``, with
    INFEASIBLE once the best violation seen has not dropped by ``delta`` over
    ``window`` consecutive sweeps, and with INDETERMINATE after ``max_iter``.
    """
    x = tuple(start)
    increments = [(0.0, 0.0, 0.0, 0.0)] * len(constraints)
    best = math.inf
    stale = 0
    residual = max(_violation(s, A, x) for s, A in constraints)
    if residual <= tol:
        return Verdict.FEASIBLE, x, residual, 0
    for it in range(1, max_iter + 1):
        for k, (s, A) in enumerate(constraints):
            p = increments[k]
            y = (x[0] + p[0], x[1] + p[1], x[2] + p[2], x[3] + p[3])
            x = _project(s, A, y)
            increments[k] = (y[0] - x[0], y[1] - x[1], y[2] - x[2], y[3] - x[3])
        residual = max(_violation(s, A, x) for s, A in constraints)
        if residual <= tol:
            return Verdict.FEASIBLE, x, residual, it
        if best - residual >= delta:
            best = residual
            stale = 0
        else:
            stale += 1
            if stale >= window:
                return Verdict.INFEASIBLE, x, residual, it
    return Verdict.INDETERMINATE, x, residual, max_iter


def grid_certificate(E1: Povm, E2: Povm, resolution: float = DEFAULT_RESOLUTION) -> GridCertificate:
    """Minimum worst-case violation over a Bloch grid, with a rigorous lower bound.

    The vector part of ``G`` runs over a cubic grid on ``[-1, 1]^3`` with
    spacing ``2 / 2**depth <= resolution``; at each grid point the trace part
    is chosen optimally in closed form.  Best-first branch and bound over
    dyadic boxes visits only boxes that could contain the grid minimum, and
    returns the same value as an exhaustive sweep.  The violation is
    1-Lipschitz in the vector part, and exceeds 1/2 whenever ``|g| > 1``.
    """
    if resolution <= 0:
        raise K.ContractViolation("resolution must be positive")
    cons = _constraints(E1, E2)
    lower = [A for s, A in cons if s > 0]
    upper = [A for s, A in cons if s < 0]

    def h(x, y, z):
        P = max(math.sqrt((x - A[1]) ** 2 + (y - A[2]) ** 2 + (z - A[3]) ** 2) + A[0]
                for A in lower)
        Q = max(math.sqrt((x - A[1]) ** 2 + (y - A[2]) ** 2 + (z - A[3]) ** 2) - A[0]
                for A in upper)
        return max(0.0, (P + Q) / 2), (P - Q) / 2

    depth = max(0, math.ceil(math.log2(2.0 / resolution)))
    root3 = math.sqrt(3.0)
    heap = []
    counter = 0

    def push(center, half, level):
        nonlocal counter
        value, g0 = h(*center)
        key = value if level == depth else max(0.0, value - root3 * half)
        heapq.heappush(heap, (key, counter, center, half, level, value, g0))
        counter += 1

    push((0.0, 0.0, 0.0), 1.0, 0)
    while True:
        _, _, c, half, level, value, g0 = heapq.heappop(heap)
        if level == depth:
            bound = min(max(0.0, value - root3 * half), 0.5)
            return GridCertificate(2.0 / 2 ** depth, value, bound, (g0, *c), counter)
        q = half / 2
        for dx in (-q, q):
            for dy in (-q, q):
                for dz in (-q, q):
                    push((c[0] + dx, c[1] + dy, c[2] + dz), q, level + 1)


def feasibility_solver(E1: Povm, E2: Povm, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER, certify: bool = True,
                       resolution: float = DEFAULT_RESOLUTION) -> JointVerdict:
    """Search for a joint POVM without assuming either input is projective."""
    _two_outcome(E1, "E1")
    _two_outcome(E2, "E2")
    verdict, g, residual, iters = dykstra(_constraints(E1, E2), tol, max_iter)
    norm = commutator_norm(E1, E2)
    witness = None
    certificate = None
    if verdict is Verdict.FEASIBLE:
        witness = joint_from_g(E1, E2, K.from_bloch(*g)).check(psd_eps=max(tol, K.EPS_PSD))
    elif certify:
        certificate = grid_certificate(E1, E2, resolution)
    return JointVerdict(verdict, witness, norm, Method.FEASIBILITY_SOLVER, residual, iters,
                        certificate)


# -- parameter sweeps -----------------------------------------------------------

@dataclass(frozen=True)
class ClassifiedPoint:
    index: int
    theta: float
    a: complex
    b: complex
    exact: JointVerdict
    solver: JointVerdict

    @property
    def verdict(self) -> Verdict:
        return self.solver.verdict


def angle_grid(thetas: Iterable[float], phases: int = 1) -> list[tuple[complex, complex]]:
    """``(a, b) = (cos t e^{i chi}, sin t)`` for each angle and ``chi = 2 pi k / phases``."""
    out = []
    for t in thetas:
        for k in range(phases):
            chi = 2 * math.pi * k / phases
            out.append((math.cos(t) * complex(math.cos(chi), math.sin(chi)), complex(math.sin(t))))
    return out


def classify_point(index: int, a: complex, b: complex,
                   variant: Variant = Variant.MEASUREMENT, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER, certify: bool = True,
                   resolution: float = DEFAULT_RESOLUTION) -> ClassifiedPoint:
    cfg = ScenarioConfig(1.0, 0.0, a, b, variant).validate()
    E1 = friend_povm(cfg, TimeTag.T1)
    E2 = friend_povm(cfg, TimeTag.T2)
    exact = commutator_criterion(E1, E2)
    solver = feasibility_solver(E1, E2, tol, max_iter, certify, resolution)
    if solver.verdict is not Verdict.INDETERMINATE and solver.verdict is not exact.verdict:
        raise MethodDisagreement(
            f"a={a}, b={b}: commutator says {exact.verdict.name}, solver says {solver.verdict.name}")
    theta = math.atan2(abs(b), abs(a))
    return ClassifiedPoint(index, theta, complex(a), complex(b), exact, solver)


def _classify_star(args):
    return classify_point(*args)


def classify_parameter_space(grid: Sequence[tuple[complex, complex]],
                             variant: Variant = Variant.MEASUREMENT, tol: float = DEFAULT_TOL,
                             max_iter: int = DEFAULT_MAX_ITER, certify: bool = True,
                             resolution: float = DEFAULT_RESOLUTION,
                             jobs: int = 1) -> list[ClassifiedPoint]:
    """Verdicts from both methods for every ``(a, b)``, in grid order."""
    tasks = [(i, complex(a), complex(b), variant, tol, max_iter, certify, resolution)
             for i, (a, b) in enumerate(grid)]
    if jobs <= 1 or len(tasks) < 2:
        return [_classify_star(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_classify_star, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return sorted(results, key=lambda p: p.index)
