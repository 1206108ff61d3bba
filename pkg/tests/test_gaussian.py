import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_min_energy, random_cm, random_orthogonal, scan_minimum
from fermiwork import fock
from fermiwork import gaussian as ga
from fermiwork.covariance import (
    block_matrix,
    canonical_form,
    energy_cm,
    from_two_mode_parameters,
    is_pure,
    thermal_cm,
    two_mode_parameters,
)
from fermiwork.exceptions import CapacityError, PatternError, ValidationError

VACUUM2 = block_matrix([1, 1])
FILLED2 = block_matrix([-1, -1])


def test_rotation_examples():
    assert np.allclose(ga.rotation_matrix(0, 1, 3).matrix, np.eye(6))
    out = ga.apply(ga.rotation_matrix(np.pi / 2, 0, 2), VACUUM2)
    assert np.allclose(out.matrix, VACUUM2)
    t = 0.7
    u = fock.fock_gaussian_unitary("rotation", -t, (1,), 2)
    assert np.allclose(fock.extract_orthogonal_action(u).matrix, ga.rotation_matrix(t, 1, 2).matrix, atol=1e-12)
    with pytest.raises(ValidationError):
        ga.rotation_matrix(0.1, 2, 2)


def test_squeeze_examples(rng):
    assert np.allclose(ga.squeeze_matrix(0, (0, 1), 2).matrix, np.eye(4))
    out = ga.apply(ga.squeeze_matrix(np.pi / 2, (0, 1), 2), FILLED2)
    assert np.allclose(out.matrix, VACUUM2, atol=1e-15)
    for r in rng.uniform(-5, 5, 10):
        m = ga.squeeze_matrix(r, (1, 2), 3)
        assert np.max(np.abs(m.matrix @ m.matrix.T - np.eye(6))) < 1e-12
        assert m.det_sign == 1
    with pytest.raises(ValidationError):
        ga.squeeze_matrix(0.1, (0, 0), 2)


def test_squeeze_matches_fock_action():
    r = 0.42
    u = fock.fock_gaussian_unitary("squeeze", -r, (0, 2), 3)
    assert np.allclose(fock.extract_orthogonal_action(u).matrix, ga.squeeze_matrix(r, (0, 2), 3).matrix, atol=1e-12)


def test_beamsplit_examples(rng):
    assert np.allclose(ga.beamsplit_matrix(0, (0, 1), 2).matrix, np.eye(4))
    g = block_matrix([0.3, -0.8])
    swapped = ga.apply(ga.beamsplit_matrix(np.pi / 2, (0, 1), 2), g)
    assert np.allclose(swapped.matrix, block_matrix([-0.8, 0.3]), atol=1e-15)
    for _ in range(10):
        cm = random_cm(rng, 2)
        out = ga.apply(ga.beamsplit_matrix(rng.uniform(-3, 3), (0, 1), 2), cm)
        assert energy_cm(out, [1.3, 1.3]) == pytest.approx(energy_cm(cm, [1.3, 1.3]), abs=1e-12)


def test_beamsplit_matches_fock_action():
    phi = -1.2
    u = fock.fock_gaussian_unitary("beamsplit", -phi, (1, 0), 2)
    assert np.allclose(fock.extract_orthogonal_action(u).matrix, ga.beamsplit_matrix(phi, (1, 0), 2).matrix, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31), st.booleans())
def test_apply_preserves_structure(n, seed, pure):
    rng = np.random.default_rng(seed)
    cm = random_cm(rng, n, pure=pure)
    o = random_orthogonal(rng, 2 * n)
    out = ga.apply(o, cm)
    assert np.allclose(ga.apply(np.eye(2 * n), cm).matrix, cm)
    assert np.allclose(np.abs(canonical_form(out).values), np.abs(canonical_form(cm).values), atol=1e-10)
    if pure:
        assert np.max(np.abs(out.matrix @ out.matrix.T - np.eye(2 * n))) < 1e-10


def test_apply_dimension_mismatch():
    with pytest.raises(ValidationError):
        ga.apply(np.eye(6), VACUUM2)


def test_optimal_squeeze_examples():
    g = from_two_mode_parameters(0.4, 0.7, 0, 0)
    r, out = ga.optimal_squeeze(g, [1, 1])
    assert r == 0 and np.allclose(out.matrix, g)

    g = from_two_mode_parameters(0, 0, 0.5, 0.5)
    r, out = ga.optimal_squeeze(g, [1, 1])
    assert r == pytest.approx(3 * np.pi / 4)  # i.e. -pi/4
    a, b, _, _ = two_mode_parameters(out.matrix)
    assert (a, b) == pytest.approx((0.5, 0.5), abs=1e-12)
    assert energy_cm(g, [1, 1]) == pytest.approx(1.0)
    assert energy_cm(out, [1, 1]) == pytest.approx(0.5, abs=1e-12)

    r, out = ga.optimal_squeeze(FILLED2, [1, 1])
    assert r == pytest.approx(np.pi / 2)
    assert np.allclose(out.matrix, VACUUM2, atol=1e-15)


def test_printed_squeeze_root_maximizes_for_filled_modes():
    # r0 = -arctan(0)/2 = 0 leaves |11> untouched at the top of the spectrum
    a, b, e1, e2 = -1, -1, 0, 0
    assert ga.squeeze_stationarity(a, b, e1, e2, 0.0) == 0
    scan = [energy_cm(ga.apply(ga.squeeze_matrix(r, (0, 1), 2), FILLED2), [1, 1]) for r in np.linspace(0, np.pi, 101)]
    assert max(scan) == pytest.approx(2) and energy_cm(FILLED2, [1, 1]) == 2
    assert min(scan) == pytest.approx(0, abs=1e-12)


def test_optimal_squeeze_rejects_non_standard():
    g = random_cm(np.random.default_rng(5), 2)
    with pytest.raises(PatternError):
        ga.optimal_squeeze(g, [1, 1])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_squeeze_stage_properties(seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.2, 3, 2)
    _, sf = ga.standard_form_two_mode(random_cm(rng, 2))
    a, b, e1, e2 = two_mode_parameters(sf.matrix)
    r, out = ga.optimal_squeeze(sf, w)
    assert 0 <= r < np.pi
    assert abs(ga.squeeze_stationarity(a, b, e1, e2, r)) < 1e-10
    a2, b2, f1, f2 = two_mode_parameters(out.matrix)
    e = (e1 - e2) / 2
    assert f1 == pytest.approx(e, abs=1e-10) and f2 == pytest.approx(-e, abs=1e-10)
    # no other squeeze angle does better
    grid = np.linspace(0, np.pi, 400)
    best = min(energy_cm(ga.apply(ga.squeeze_matrix(t, (0, 1), 2), sf), w) for t in grid)
    assert energy_cm(out, w) <= best + 1e-12
    if a + b > 0:
        lam = (e1 + e2) / (a + b)
        assert a2 == pytest.approx((a + b) / 2 * np.sqrt(1 + lam**2) + (a - b) / 2, abs=1e-10)
        assert b2 == pytest.approx((a + b) / 2 * np.sqrt(1 + lam**2) - (a - b) / 2, abs=1e-10)


def test_optimal_beamsplit_examples():
    g = block_matrix([0.8, 0.2])
    theta, out = ga.optimal_beamsplit(g, [1, 2])
    assert theta == pytest.approx(np.pi / 2)
    assert np.allclose(out.matrix, block_matrix([0.2, 0.8]), atol=1e-15)
    theta, out = ga.optimal_beamsplit(g, [2, 1])
    assert theta == 0 and np.allclose(out.matrix, g)

    g = from_two_mode_parameters(0.3, 0.6, 0.2, -0.2)
    theta, out = ga.optimal_beamsplit(g, [1, 2])
    _, _, d1, d2 = two_mode_parameters(out.matrix)
    assert abs(d1) < 1e-10 and abs(d2) < 1e-10
    grid = np.linspace(0, np.pi, 20001)
    scan = min(energy_cm(ga.apply(ga.beamsplit_matrix(t, (0, 1), 2), g), [1, 2]) for t in grid)
    assert energy_cm(out, [1, 2]) == pytest.approx(scan, abs=1e-8)
    assert energy_cm(out, [1, 2]) <= scan + 1e-12
    assert abs(ga.beamsplit_stationarity(0.3, 0.6, 0.2, theta)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.booleans())
def test_beamsplit_stage_properties(seed, equal):
    rng = np.random.default_rng(seed)
    w = np.full(2, 1.4) if equal else rng.uniform(0.2, 3, 2)
    _, sf = ga.standard_form_two_mode(random_cm(rng, 2))
    _, sq = ga.optimal_squeeze(sf, w)
    a, b, e1, _ = two_mode_parameters(sq.matrix)
    theta, out = ga.optimal_beamsplit(sq, w)
    assert abs(ga.beamsplit_stationarity(a, b, e1, theta)) < 1e-10
    _, _, d1, d2 = two_mode_parameters(out.matrix)
    assert max(abs(d1), abs(d2)) < 1e-10
    if equal:
        assert energy_cm(out, w) == pytest.approx(energy_cm(sq, w), abs=1e-12)


def test_optimal_beamsplit_rejects_wrong_pattern():
    with pytest.raises(PatternError):
        ga.optimal_beamsplit(from_two_mode_parameters(0.1, 0.2, 0.3, 0.3), [1, 2])


def test_minimize_thermal_products():
    # the higher-frequency mode already holds the larger value: nothing to gain
    passive = thermal_cm([1.0, 1.0], [1, 2])
    trace = ga.gaussian_minimize(passive, [1, 2])
    assert np.allclose(trace.energies(), trace.initial_energy, atol=1e-12)
    # T_a / T_b = 1/4 < omega_a / omega_b = 1/2: swapping the modes lowers the energy
    active = thermal_cm([4.0, 1.0], [1, 2])
    trace = ga.gaussian_minimize(active, [1, 2])
    drop = trace.initial_energy - trace.final_energy
    lam_a, lam_b = np.tanh(2.0), np.tanh(1.0)
    assert drop == pytest.approx((2 - 1) * (lam_a - lam_b) / 2, abs=1e-12)
    assert trace.stages[-1].param == pytest.approx(np.pi / 2)


def test_minimize_filled_modes():
    trace = ga.gaussian_minimize(FILLED2, [1, 1])
    assert trace.final_energy == pytest.approx(0, abs=1e-12)
    squeeze = [s for s in trace.stages if s.name == "squeeze"][0]
    assert squeeze.param == pytest.approx(np.pi / 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.booleans())
def test_two_mode_pipeline(seed, pure):
    rng = np.random.default_rng(seed)
    cm = random_cm(rng, 2, pure=pure)
    w = rng.uniform(0.2, 3, 2)
    trace = ga.gaussian_minimize(cm, w)
    assert [s.name for s in trace.stages] == ["input", "standard_form", "squeeze", "beamsplit"]
    e = trace.energies()
    assert np.all(np.diff(e) <= 1e-12)
    o = trace.total_transform().matrix
    assert np.max(np.abs(o @ cm @ o.T - trace.final_cm.matrix)) < 1e-10
    _, _, d1, d2 = two_mode_parameters(trace.final_cm.matrix)
    assert max(abs(d1), abs(d2)) < 1e-10
    assert trace.final_energy == pytest.approx(ga.minimal_energy(cm, w), abs=1e-9)
    assert trace.final_energy == pytest.approx(scan_minimum(cm, w), abs=1e-9)


def test_operations_replay_the_pipeline(rng):
    cm = random_cm(rng, 2)
    w = [0.7, 1.9]
    trace = ga.gaussian_minimize(cm, w)
    builders = {
        "rotation": lambda t, m: ga.rotation_matrix(t, m[0], 2),
        "squeeze": lambda t, m: ga.squeeze_matrix(t, m, 2),
        "beamsplit": lambda t, m: ga.beamsplit_matrix(t, m, 2),
    }
    g = cm
    for kind, angle, modes in trace.operations:
        g = ga.apply(builders[kind](angle, modes), g)
    assert np.allclose(g.matrix, trace.final_cm.matrix, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31))
def test_fallback_pipeline(n, seed):
    if n == 2:
        n = 3
    rng = np.random.default_rng(seed)
    cm = random_cm(rng, n)
    w = rng.uniform(0.2, 3, n)
    trace = ga.gaussian_minimize(cm, w)
    final = trace.final_cm.matrix
    assert np.allclose(final, block_matrix(np.diag(final, 1)[::2]), atol=1e-10)
    assert trace.final_energy == pytest.approx(ga.minimal_energy(cm, w), abs=1e-9)
    assert trace.total_transform().det_sign == 1
    assert {op[0] for op in trace.operations} <= {"canonical", "beamsplit"}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31), st.booleans())
def test_minimal_energy_matches_signed_assignment(n, seed, pure):
    rng = np.random.default_rng(seed)
    cm = random_cm(rng, n, pure=pure)
    w = rng.uniform(0.2, 3, n)
    assert ga.minimal_energy(cm, w) == pytest.approx(brute_min_energy(cm, w), abs=1e-10)


def test_gaussian_ergotropy_examples():
    assert ga.gaussian_ergotropy(VACUUM2, [1, 1]) == 0
    assert ga.gaussian_ergotropy(FILLED2, [1, 1]) == pytest.approx(2, abs=1e-12)
    # equal temperatures: the Gibbs state of the pair, passive under any unitary
    assert ga.gaussian_ergotropy(thermal_cm([1, 1], [1, 2]), [1, 2]) == pytest.approx(0, abs=1e-12)
    # one filled mode: emptying it needs an improper map, so nothing is extractable
    assert ga.gaussian_ergotropy(block_matrix([1, -1]), [1, 1]) == pytest.approx(0, abs=1e-12)


def test_single_filled_mode_pfaffian_constraint():
    # |10>: Pf = -1; the best proper conjugation leaves one sign flipped on the cheaper mode
    g = block_matrix([-1, 1])
    assert ga.minimal_energy(g, [2, 1]) == pytest.approx(1, abs=1e-12)
    assert ga.gaussian_ergotropy(g, [2, 1]) == pytest.approx(1, abs=1e-12)
    assert ga.gaussian_ergotropy(block_matrix([1, -1]), [2, 1]) == pytest.approx(0, abs=1e-12)


def test_gaussian_ergotropy_capacity():
    with pytest.raises(CapacityError):
        ga.gaussian_ergotropy(block_matrix(np.ones(9)), np.ones(9))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**31))
def test_gaussian_bounded_by_full_ergotropy(n, seed):
    rng = np.random.default_rng(seed)
    cm = random_cm(rng, n)
    w = rng.uniform(0.2, 3, n)
    assert ga.gaussian_ergotropy(cm, w) <= fock.ergotropy(fock.cm_to_density(cm), w) + 1e-9


def test_structural_passivity_examples():
    assert ga.is_gaussian_passive(VACUUM2, [1, 2])
    assert ga.structural_gaussian_passive(VACUUM2, [1, 2])
    assert ga.is_gaussian_passive(thermal_cm([1.0, 1.0], [1, 2]), [1, 2])
    assert ga.structural_gaussian_passive(thermal_cm([1.0, 1.0], [1, 2]), [1, 2])
    assert not ga.is_gaussian_passive(thermal_cm([4.0, 1.0], [1, 2]), [1, 2])
    assert not ga.structural_gaussian_passive(thermal_cm([4.0, 1.0], [1, 2]), [1, 2])
    # inter-mode block present, unequal frequencies
    g = from_two_mode_parameters(0.5, 0.5, 0.3, 0.3)
    assert not ga.structural_gaussian_passive(g, [1, 2]) and not ga.is_gaussian_passive(g, [1, 2])


@pytest.mark.parametrize("w_b", [1.0, 2.5])
def test_thermal_passivity_boundary(w_b):
    w = [1.0, w_b]
    # passive iff omega_a / omega_b <= T_a / T_b, i.e. beta_b omega_b >= beta_a omega_a
    for ratio in np.linspace(0.2, 1.8, 33):
        betas = [1.0, ratio * w[0] / w[1]]
        g = thermal_cm(betas, w)
        # equal frequencies: a beam splitter only relabels the modes
        expected = w_b == 1.0 or betas[1] * w[1] >= betas[0] * w[0] - 1e-12
        assert ga.is_gaussian_passive(g, w) == expected
        assert ga.structural_gaussian_passive(g, w) == expected


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.booleans(), st.booleans())
def test_structural_passivity_agrees_with_minimization(seed, equal, from_final):
    rng = np.random.default_rng(seed)
    w = np.full(2, 0.9) if equal else rng.uniform(0.2, 3, 2)
    cm = random_cm(rng, 2)
    if from_final:
        # a minimized state dressed with local rotations stays passive
        cm = ga.gaussian_minimize(cm, w).final_cm
        loc = ga.rotation_matrix(rng.uniform(0, 6), 0, 2) @ ga.rotation_matrix(rng.uniform(0, 6), 1, 2)
        cm = ga.apply(loc, cm)
    assert ga.structural_gaussian_passive(cm, w) == ga.is_gaussian_passive(cm, w)


def test_sampler_examples():
    assert ga.random_orthogonal_search(VACUUM2, [1, 2], trials=50) == pytest.approx(0, abs=1e-12)
    assert ga.random_orthogonal_search(FILLED2, [1, 1], trials=10_000) <= 1e-6
    with pytest.raises(ValidationError):
        ga.random_orthogonal_search(VACUUM2, [1, 1], trials=0)


def test_sampler_is_reproducible(rng):
    cm = random_cm(rng, 3)
    w = [0.5, 1, 2]
    a = ga.random_orthogonal_search(cm, w, trials=2000, seed=7)
    assert a == ga.random_orthogonal_search(cm, w, trials=2000, seed=7)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31))
def test_sampler_never_beats_minimum(n, seed):
    rng = np.random.default_rng(seed)
    cm = random_cm(rng, n)
    w = rng.uniform(0.2, 3, n)
    found = ga.random_orthogonal_search(cm, w, trials=3000, seed=seed)
    low = ga.minimal_energy(cm, w)
    assert found >= low - 1e-9
    assert found <= low + 1e-6


def test_mode_count_mismatch():
    with pytest.raises(ValidationError):
        ga.gaussian_minimize(VACUUM2, [1, 2, 3])


def test_pure_input_stays_pure():
    cm = random_cm(np.random.default_rng(9), 2, pure=True)
    assert is_pure(ga.gaussian_minimize(cm, [1, 3]).final_cm)
