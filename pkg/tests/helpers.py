import math

import numpy as np


def random_unit_pair(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def random_density(rng, dim=2, rank=None):
    k = dim if rank is None else rank
    X = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (X + X.conj().T) / 2


def cs(theta):
    return math.cos(theta), math.sin(theta)


def cfg_angle(theta, alpha=1.0, beta=0.0, **kw):
    from wignerfriend.scenario import ScenarioConfig

    return ScenarioConfig.from_angle(theta, alpha=alpha, beta=beta, **kw)
