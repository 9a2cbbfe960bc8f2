import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerfriend import kernel as K
from wignerfriend.scenario import (
    DOWN,
    REC_D,
    REC_U,
    UP,
    ScenarioConfig,
    TimeTag,
    Variant,
    build_isometry,
    build_state,
    evolve_mixed,
    index,
    phi_states,
    wigner_basis,
    wigner_unitary,
)

from .helpers import random_density, random_unit_pair

R2 = 1 / math.sqrt(2)


def random_config(rng, variant=Variant.MEASUREMENT):
    alpha, beta = random_unit_pair(rng)
    a, b = random_unit_pair(rng)
    return ScenarioConfig(alpha, beta, a, b, variant)


def test_index_layout():
    assert index(UP, REC_U, 0) == 0
    assert index(DOWN, REC_D, 1) == 7
    assert index(DOWN, REC_U, 0) == 4


def test_t0_is_system_ket():
    cfg = ScenarioConfig(0.6, 0.8j, 1, 0)
    st0 = build_state(cfg, "t0")
    assert st0.time_tag is TimeTag.T0
    np.testing.assert_array_equal(st0.state, [0.6, 0.8j])


def test_t1_deterministic_branch():
    cfg = ScenarioConfig(1, 0, 0.3, math.sqrt(1 - 0.09))
    np.testing.assert_array_equal(build_state(cfg, TimeTag.T1).state, K.basis(8, 0))


def test_t2_nondisturbing_eigenstate():
    cfg = ScenarioConfig(R2, R2, R2, R2)
    psi = build_state(cfg, TimeTag.T2).state
    one, two = wigner_basis(cfg)
    amp1 = np.vdot(K.kron(one, K.basis(2, 0)), psi)
    amp2 = np.vdot(K.kron(two, K.basis(2, 1)), psi)
    assert amp1 == pytest.approx(1.0, abs=1e-15)
    assert abs(amp2) <= 1e-15


def test_t2_four_term_expansion_at_pi_over_8():
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    cfg = ScenarioConfig(1, 0, c, s)
    psi = build_state(cfg, TimeTag.T2).state
    got = [psi[index(UP, REC_U, 0)], psi[index(DOWN, REC_D, 0)],
           psi[index(UP, REC_U, 1)], psi[index(DOWN, REC_D, 1)]]
    # a*a, b*a, b*b, -a*b with a = cos(pi/8), b = sin(pi/8)
    np.testing.assert_allclose(got, [0.8535533905932737, 0.35355339059327373,
                                     0.14644660940672624, -0.35355339059327373], atol=1e-15)
    assert np.count_nonzero(psi) == 4


def test_v1_action():
    cfg = ScenarioConfig(1, 0, R2, R2)
    V1 = build_isometry(cfg, TimeTag.T1)
    np.testing.assert_array_equal(V1 @ K.ket(1, 0), K.basis(8, index(UP, REC_U, 0)))
    np.testing.assert_array_equal(V1 @ K.ket(0, 1), K.basis(8, index(DOWN, REC_D, 0)))


def test_v2_maps_phi_to_wigner_outcomes(rng):
    for _ in range(10):
        cfg = random_config(rng)
        V2 = build_isometry(cfg, TimeTag.T2)
        one, two = wigner_basis(cfg)
        phi1, phi2 = phi_states(cfg)
        np.testing.assert_allclose(V2 @ phi1, K.kron(one, K.basis(2, 0)), atol=1e-15)
        np.testing.assert_allclose(V2 @ phi2, K.kron(two, K.basis(2, 1)), atol=1e-15)
        assert K.is_isometry(V2)


def test_no_isometry_at_t0():
    with pytest.raises(K.ContractViolation):
        build_isometry(ScenarioConfig(), TimeTag.T0)


@pytest.mark.parametrize("variant", list(Variant))
def test_state_equals_isometry_image(rng, variant):
    for _ in range(100):
        cfg = random_config(rng, variant)
        for t in (TimeTag.T1, TimeTag.T2):
            direct = build_state(cfg, t).state
            assert np.max(np.abs(build_isometry(cfg, t) @ cfg.system_ket - direct)) <= 1e-12


@pytest.mark.parametrize("variant", list(Variant))
def test_t2_is_wigner_dilation_of_t1(rng, variant):
    for _ in range(50):
        cfg = random_config(rng, variant)
        U = wigner_unitary(cfg)
        assert np.max(np.abs(U.conj().T @ U - np.eye(8))) <= 1e-12
        t1 = build_state(cfg, TimeTag.T1).state
        np.testing.assert_allclose(U @ t1, build_state(cfg, TimeTag.T2).state, atol=1e-12)


def test_hadamard_leaves_wigner_ready(rng):
    for _ in range(20):
        psi = build_state(random_config(rng, Variant.HADAMARD), TimeTag.T2).state
        assert np.all(psi[1::2] == 0)


def test_hadamard_images_of_basis_states():
    V2 = build_isometry(ScenarioConfig(1, 0, 1, 0, Variant.HADAMARD), TimeTag.T2)
    uu, dd = index(UP, REC_U, 0), index(DOWN, REC_D, 0)
    np.testing.assert_allclose(V2[[uu, dd], 0], [R2, R2], atol=1e-15)
    np.testing.assert_allclose(V2[[uu, dd], 1], [R2, -R2], atol=1e-15)


def test_evolve_mixed_examples():
    cfg = ScenarioConfig(1, 0, R2, R2)
    up = np.diag([1, 0]).astype(complex)
    np.testing.assert_array_equal(evolve_mixed(cfg, up, TimeTag.T1),
                                  K.projector(K.basis(8, 0)))
    mixed = evolve_mixed(cfg, np.eye(2) / 2, TimeTag.T1)
    expected = (K.projector(K.basis(8, index(UP, REC_U, 0)))
                + K.projector(K.basis(8, index(DOWN, REC_D, 0)))) / 2
    np.testing.assert_allclose(mixed, expected, atol=1e-16)


def test_evolve_mixed_trace_and_density(rng):
    for _ in range(20):
        cfg = random_config(rng)
        out = evolve_mixed(cfg, random_density(rng), TimeTag.T2)
        assert abs(K.trace(out) - 1) <= 1e-12
        assert K.is_density(out)


def test_evolve_mixed_rejects_non_density():
    with pytest.raises(K.ContractViolation):
        evolve_mixed(ScenarioConfig(), np.eye(2), TimeTag.T1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_evolve_mixed_is_linear(lam, seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng)
    sigma, tau = random_density(rng), random_density(rng)
    for t in (TimeTag.T1, TimeTag.T2):
        lhs = evolve_mixed(cfg, lam * sigma + (1 - lam) * tau, t)
        rhs = lam * evolve_mixed(cfg, sigma, t) + (1 - lam) * evolve_mixed(cfg, tau, t)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_config_validation():
    with pytest.raises(K.ContractViolation):
        build_state(ScenarioConfig(1, 1, 1, 0), TimeTag.T1)
    with pytest.raises(K.ContractViolation):
        ScenarioConfig(1, 0, 0.5, 0.5).validate()


def test_config_json_round_trip(tmp_path):
    cfg = ScenarioConfig(0.6, 0.8j, R2 * 1j, R2, Variant.HADAMARD)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_json()))
    assert ScenarioConfig.load(path) == cfg


def test_config_json_schema():
    cfg = ScenarioConfig.from_json({"alpha": [1, 0], "beta": [0, 0], "a": [0, 1],
                                    "b": [0, 0], "variant": "measurement"})
    assert cfg.a == 1j and cfg.variant is Variant.MEASUREMENT
    with pytest.raises(K.ContractViolation):
        ScenarioConfig.from_json({"alpha": [1, 0]})
    with pytest.raises(K.ContractViolation):
        ScenarioConfig.from_json({"alpha": [1, 0], "beta": [0, 0], "a": [1, 0],
                                  "b": [0, 0], "variant": "collapse"})
