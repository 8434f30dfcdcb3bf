import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biloc.network import (
    CANONICAL_BITS,
    DichotomicSetting,
    JointMeasurement,
    TripartiteDistribution,
    biloc_score,
    born_distribution,
    canonical_bsm,
    chsh_score,
    compute_I,
    compute_J,
    correlator,
    measurement_after_unitary,
    sample_outcomes,
    score_from_IJ,
    zx_plane_settings,
)
from biloc.states import (
    BELL_STATES,
    DomainError,
    SX,
    I2,
    SchmidtPureState,
    make_werner,
    random_state,
    random_unitary,
)

SQRT2 = math.sqrt(2.0)


def _dist(rho_ab, rho_bc, alpha, gamma, bob=None):
    return born_distribution(
        rho_ab, rho_bc, zx_plane_settings(alpha), zx_plane_settings(gamma), bob or canonical_bsm()
    )


# ---- settings and measurements ---------------------------------------------

def test_setting_requires_unit_vector():
    with pytest.raises(DomainError):
        DichotomicSetting(np.array([1.0, 1.0, 0.0]))
    np.testing.assert_allclose(DichotomicSetting.normalized([0, 0, 2]).bloch, [0, 0, 1])


def test_setting_projectors_resolve_identity(rng):
    s = DichotomicSetting.normalized(rng.standard_normal(3))
    p_plus, p_minus = s.projectors()
    np.testing.assert_allclose(p_plus + p_minus, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(p_plus @ p_plus, p_plus, atol=1e-15)


def test_canonical_bsm_identity_is_bell_basis():
    np.testing.assert_allclose(canonical_bsm().basis, BELL_STATES, atol=1e-15)
    assert canonical_bsm().bits == CANONICAL_BITS


def test_bsm_observables_are_zz_and_xx():
    bsm = canonical_bsm()
    sz = np.diag([1.0, -1.0])
    np.testing.assert_allclose(bsm.observable(0), np.kron(sz, sz), atol=1e-15)
    np.testing.assert_allclose(bsm.observable(1), np.kron(SX, SX), atol=1e-15)


def test_bsm_on_maximally_mixed_is_uniform(rng, maximally_mixed):
    for _ in range(20):
        bsm = canonical_bsm(random_unitary(rng), random_unitary(rng))
        probs = np.einsum("kij,ji->k", bsm.projectors(), maximally_mixed.matrix).real
        np.testing.assert_allclose(probs, np.full(4, 0.25), atol=1e-14)


def test_bsm_after_sigma_x_permutes_bell_states():
    overlap = np.abs(canonical_bsm(SX, I2).basis.conj() @ BELL_STATES.T)
    np.testing.assert_allclose(np.sort(overlap, axis=1)[:, -1], np.ones(4), atol=1e-15)
    np.testing.assert_allclose(overlap.sum(axis=0), np.ones(4), atol=1e-15)


def test_bsm_rejects_non_unitary():
    with pytest.raises(DomainError):
        canonical_bsm(2 * I2, I2)


def test_joint_measurement_validation():
    with pytest.raises(DomainError):
        JointMeasurement(np.ones((4, 4)))
    with pytest.raises(DomainError):
        JointMeasurement(np.eye(4), bits=((1, 1), (1, 1), (-1, 1), (-1, -1)))


def test_mirrored_measurement_round_trip(rng):
    m = measurement_after_unitary(random_unitary(rng, 4))
    np.testing.assert_allclose(m.mirrored().mirrored().basis, m.basis)


# ---- Born rule ----------------------------------------------------------------

def test_phi_plus_pair_along_z(phi_plus):
    p = _dist(phi_plus, phi_plus, 0.0, 0.0).p
    signs = np.array([1, -1])
    for x in (0, 1):
        for z in (0, 1):
            for a, b0, b1, c in np.ndindex(2, 2, 2, 2):
                expected = 0.125 if signs[a] * signs[b0] * signs[c] == 1 else 0.0
                assert p[x, z, a, b0, b1, c] == pytest.approx(expected, abs=1e-15)


def test_maximally_mixed_gives_uniform(maximally_mixed, rng):
    alice = (DichotomicSetting.normalized(rng.standard_normal(3)),) * 2
    dist = born_distribution(maximally_mixed, maximally_mixed, alice, alice, canonical_bsm())
    np.testing.assert_allclose(dist.p, np.full((2,) * 6, 1 / 16), atol=1e-15)


def test_product_states_factorize(product00, rng):
    for _ in range(20):
        alice = tuple(DichotomicSetting.normalized(rng.standard_normal(3)) for _ in range(2))
        charlie = tuple(DichotomicSetting.normalized(rng.standard_normal(3)) for _ in range(2))
        bob = measurement_after_unitary(random_unitary(rng, 4))
        p = born_distribution(product00, product00, alice, charlie, bob).p
        for x, z in np.ndindex(2, 2):
            slab = p[x, z]
            pa = slab.sum(axis=(1, 2, 3))
            pb = slab.sum(axis=(0, 3))
            pc = slab.sum(axis=(0, 1, 2))
            np.testing.assert_allclose(slab, np.einsum("a,bd,c->abdc", pa, pb, pc), atol=1e-12)


def test_distributions_are_valid_and_no_signaling(rng):
    for seed in range(200):
        rho_ab, rho_bc = random_state("mixed", 2 * seed), random_state("pure", 2 * seed + 1)
        alice = tuple(DichotomicSetting.normalized(rng.standard_normal(3)) for _ in range(2))
        charlie = tuple(DichotomicSetting.normalized(rng.standard_normal(3)) for _ in range(2))
        bob = measurement_after_unitary(random_unitary(rng, 4))
        born_distribution(rho_ab, rho_bc, alice, charlie, bob).check()


def test_check_detects_signaling():
    p = np.full((2,) * 6, 1 / 16)
    p[0, 0] = 0.0
    p[0, 0, 0, 0, 0, 0] = 1.0
    with pytest.raises(AssertionError):
        TripartiteDistribution(p).check()


# ---- correlators and scores -----------------------------------------------------

def test_correlator_examples(phi_plus):
    dist = _dist(phi_plus, phi_plus, 0.0, 0.0)
    assert correlator(dist, 0, 0, 0) == pytest.approx(1.0, abs=1e-15)
    assert correlator(dist, 0, 0, 1) == pytest.approx(0.0, abs=1e-15)
    uniform = TripartiteDistribution(np.full((2,) * 6, 1 / 16))
    assert correlator(uniform, 1, 0, 1) == 0.0


def test_phi_plus_pair_at_quarter_pi(phi_plus):
    dist = _dist(phi_plus, phi_plus, math.pi / 4, math.pi / 4)
    assert compute_I(dist) == pytest.approx(2.0, abs=1e-12)
    assert compute_J(dist) == pytest.approx(2.0, abs=1e-12)
    assert biloc_score(dist) == pytest.approx(2 * SQRT2, abs=1e-12)


def test_product_pair_has_zero_j(product00, rng):
    for _ in range(10):
        alpha, gamma = rng.uniform(0, math.pi, size=2)
        assert compute_J(_dist(product00, product00, alpha, gamma)) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("v", [0.3, 0.7, 0.95])
def test_werner_scales_by_v_squared(phi_plus, v):
    pure = _dist(phi_plus, phi_plus, 0.4, 1.1)
    noisy = _dist(make_werner(v), make_werner(v), 0.4, 1.1)
    assert compute_I(noisy) == pytest.approx(v * v * compute_I(pure), abs=1e-14)
    assert compute_J(noisy) == pytest.approx(v * v * compute_J(pure), abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0, 1), st.floats(0, 1),
    st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi),
)
def test_pure_pair_closed_form_correlators(c, q, alpha, gamma):
    rho_ab = SchmidtPureState.from_concurrence(c).state()
    rho_bc = SchmidtPureState.from_concurrence(q).state()
    dist = _dist(rho_ab, rho_bc, alpha, gamma)
    assert compute_I(dist) == pytest.approx(4 * math.cos(alpha) * math.cos(gamma), abs=1e-12)
    assert compute_J(dist) == pytest.approx(4 * math.sin(alpha) * math.sin(gamma) * c * q, abs=1e-12)


@pytest.mark.parametrize("i,j,s", [(2, 2, 2 * SQRT2), (4, 0, 2.0), (0, 0, 0.0), (-4, 0, 2.0)])
def test_score_examples(i, j, s):
    assert score_from_IJ(i, j) == pytest.approx(s, abs=1e-15)


def test_chsh_examples(phi_plus, maximally_mixed):
    a = (DichotomicSetting.from_angles(0.0), DichotomicSetting.from_angles(math.pi / 2))
    b = zx_plane_settings(math.pi / 4)
    assert chsh_score(phi_plus, a, b) == pytest.approx(2 * SQRT2, abs=1e-9)
    assert chsh_score(maximally_mixed, a, b) == pytest.approx(0.0, abs=1e-15)
    assert chsh_score(make_werner(0.6), a, b) == pytest.approx(2 * SQRT2 * 0.6, abs=1e-12)


# ---- sampling -------------------------------------------------------------------

def test_sampling_deterministic_distribution():
    p = np.zeros((2,) * 6)
    p[..., 0, 0, 0, 0] = 1.0
    est = sample_outcomes(TripartiteDistribution(p), 100, seed=3)
    assert np.all(est.counts[..., 0] == 100)
    assert est.I == 4.0 and est.J == 0.0
    assert est.stderr_I == 0.0 and est.stderr_J == 0.0


def test_sampling_is_seed_deterministic(phi_plus):
    dist = _dist(phi_plus, phi_plus, math.pi / 4, math.pi / 4)
    first, second = sample_outcomes(dist, 5000, 7), sample_outcomes(dist, 5000, 7)
    assert first.to_json() == second.to_json()
    assert sample_outcomes(dist, 5000, 8).to_json() != first.to_json()


def test_sampling_single_shot_is_unreliable(phi_plus):
    est = sample_outcomes(_dist(phi_plus, phi_plus, 0.3, 0.3), 1, 0)
    assert not est.reliable
    assert math.isnan(est.stderr_S)
    assert est.to_json()["stderr_S"] is None


@pytest.mark.parametrize("shots", [0, -5, 2.5])
def test_sampling_rejects_bad_shot_counts(phi_plus, shots):
    with pytest.raises(DomainError):
        sample_outcomes(_dist(phi_plus, phi_plus, 0.3, 0.3), shots, 0)


def test_sampling_stderr_matches_spread(phi_plus):
    dist = _dist(phi_plus, phi_plus, math.pi / 4, math.pi / 4)
    values = np.array([sample_outcomes(dist, 2000, seed).S for seed in range(300)])
    predicted = sample_outcomes(dist, 2000, 0).stderr_S
    assert values.std(ddof=1) == pytest.approx(predicted, rel=0.2)
