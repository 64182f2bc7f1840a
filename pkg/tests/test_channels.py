import numpy as np
import pytest

from ensemble_metrics.channels import (
    WorstCaseOptions,
    apply_measurement,
    compose_measurements,
    dist_iso,
    dist_max,
    fid_iso,
    fid_min,
    is_unital,
    jamiolkowski_ensemble,
    make_measurement,
    make_povm,
    povm_distance,
    povm_fidelity,
    povm_to_ensemble,
    projective_measurement,
)
from ensemble_metrics.ensembles import average_state, make_ensemble, pure_state, unify_support
from ensemble_metrics.errors import (
    DimMismatch,
    InvalidMeasurement,
    InvalidParams,
    InvalidPovm,
)
from ensemble_metrics.kantorovich import kantorovich_distance, kantorovich_fidelity
from ensemble_metrics.linalg import partial_trace, tensor, trace_distance
from ensemble_metrics.oracle import random_density, random_measurement, random_unitary

E0 = np.array([1.0, 0.0])
E1 = np.array([0.0, 1.0])
PLUS_V = np.array([1.0, 1.0]) / np.sqrt(2)
MINUS_V = np.array([1.0, -1.0]) / np.sqrt(2)


def _z_meas():
    return projective_measurement([E0, E1])


def _x_meas():
    return projective_measurement([PLUS_V, MINUS_V])


def _apply_to_ensemble(measurement, ens):
    pairs = []
    for p, state in ens:
        out = apply_measurement(measurement, state)
        pairs.extend((p * w, s) for w, s in out)
    return make_ensemble(pairs)


def test_projective_measurement_shape():
    z = _z_meas()
    assert z.dim == 2 and len(z) == 2
    assert np.allclose(z.weights, [0.5, 0.5])
    for w, kraus in z.outcomes:
        norm = sum(np.trace(k.conj().T @ k).real for k in kraus)
        assert abs(norm - 2.0) <= 1e-12


def test_make_measurement_rejects_bad_normalization():
    with pytest.raises(InvalidMeasurement):
        make_measurement([(1.0, [np.eye(2) * 0.5])])  # Tr M†M = 0.5, expected 2


def test_make_measurement_rejects_bad_weight_sum():
    proj0 = np.sqrt(2.0) * np.outer(E0, E0)
    proj1 = np.sqrt(2.0) * np.outer(E1, E1)
    with pytest.raises(InvalidMeasurement) as err:
        make_measurement([(0.3, [proj0]), (0.3, [proj1])])
    assert "0.4" in str(err.value) or "residual" in str(err.value)


def test_make_measurement_rejects_incomplete():
    # both outcomes hit the same ray: sums to 2|0><0|, not the identity
    proj0 = np.sqrt(2.0) * np.outer(E0, E0)
    with pytest.raises(InvalidMeasurement) as err:
        make_measurement([(0.5, [proj0]), (0.5, [proj0.copy()])])
    assert "completeness" in str(err.value)


def test_make_measurement_merges_equivalent_outcomes():
    proj0 = np.sqrt(2.0) * np.outer(E0, E0)
    proj1 = np.sqrt(2.0) * np.outer(E1, E1)
    m = make_measurement([(0.25, [proj0]), (0.25, [proj0 * np.exp(0.7j)]), (0.5, [proj1])])
    assert len(m) == 2
    assert abs(sorted(m.weights)[1] - 0.5) <= 1e-12


def test_make_measurement_drops_zero_weight():
    proj0 = np.sqrt(2.0) * np.outer(E0, E0)
    proj1 = np.sqrt(2.0) * np.outer(E1, E1)
    unitary = np.eye(2, dtype=complex)
    m = make_measurement([(0.5, [proj0]), (0.5, [proj1]), (0.0, [unitary])])
    assert len(m) == 2


def test_apply_measurement_probabilities():
    z = _z_meas()
    plus = pure_state(PLUS_V)
    out = apply_measurement(z, plus)
    assert out.size == 2
    assert np.allclose(sorted(out.probs), [0.5, 0.5])
    # post-measurement states are the basis projectors
    sp = unify_support(out, make_ensemble([(0.5, pure_state(E0)), (0.5, pure_state(E1))]))
    assert len(sp.omega) == 2


def test_apply_measurement_dim_mismatch():
    with pytest.raises(DimMismatch):
        apply_measurement(_z_meas(), np.eye(3) / 3)


def test_is_unital():
    assert is_unital(_z_meas())
    assert is_unital(_x_meas())
    # reset channel: every input collapses onto |0>
    reset = make_measurement([(1.0, [np.outer(E0, E0), np.outer(E0, E1)])])
    assert not is_unital(reset)


def test_compose_measurements_matches_sequential_application():
    for seed in range(4):
        first = random_measurement(2, 2, seed=seed)
        second = random_measurement(2, 2, seed=50 + seed)
        both = compose_measurements(second, first)
        rho = random_density(2, seed=90 + seed)
        via_composite = apply_measurement(both, rho)
        via_sequence = _apply_to_ensemble(second, apply_measurement(first, rho))
        sp = unify_support(via_composite, via_sequence)
        assert np.abs(sp.p - sp.q).max() <= 1e-9, f"seed={seed}"


def test_compose_projective_idempotent():
    z = _z_meas()
    zz = compose_measurements(z, z)
    assert len(zz) == 2
    assert np.allclose(sorted(zz.weights), [0.5, 0.5])


def test_jamiolkowski_ensemble_projective():
    z = _z_meas()
    ce = jamiolkowski_ensemble(z)
    assert ce.dim == 2
    ens = ce.ensemble
    assert np.allclose(sorted(ens.probs), [0.5, 0.5])
    # measuring half of the entangled pair leaves |i>|i> products
    want = [tensor(pure_state(E0), pure_state(E0)), tensor(pure_state(E1), pure_state(E1))]
    for state in want:
        assert min(trace_distance(state, s) for s in ens.states) <= 1e-9
    marg = partial_trace(average_state(ens), (2, 2), "A")
    assert np.abs(marg - np.eye(2) / 2).max() <= 1e-9


def test_jamiolkowski_probs_equal_weights():
    for seed in range(3):
        m = random_measurement(2, 3, seed=seed)
        ens = jamiolkowski_ensemble(m).ensemble
        assert np.allclose(sorted(m.weights), sorted(ens.probs), atol=1e-9)


def test_dist_iso_z_vs_x_matches_hand_built():
    z, x = _z_meas(), _x_meas()
    # the two Choi ensembles, written out state by state
    hand_z = make_ensemble(
        [
            (0.5, tensor(pure_state(E0), pure_state(E0))),
            (0.5, tensor(pure_state(E1), pure_state(E1))),
        ]
    )
    hand_x = make_ensemble(
        [
            (0.5, tensor(pure_state(PLUS_V), pure_state(PLUS_V))),
            (0.5, tensor(pure_state(MINUS_V), pure_state(MINUS_V))),
        ]
    )
    want_d = kantorovich_distance(hand_z, hand_x)[0]
    want_f = kantorovich_fidelity(hand_z, hand_x)[0]
    assert abs(dist_iso(z, x) - want_d) <= 1e-6
    assert abs(fid_iso(z, x) - want_f) <= 1e-6
    assert abs(dist_iso(z, x) - np.sqrt(3.0) / 2.0) <= 1e-9


def test_iso_identical_measurements():
    z = _z_meas()
    assert dist_iso(z, z) <= 1e-9
    assert fid_iso(z, z) >= 1.0 - 1e-9


def test_iso_dim_mismatch():
    z = _z_meas()
    q3 = projective_measurement(np.eye(3))
    with pytest.raises(DimMismatch):
        dist_iso(z, q3)
    with pytest.raises(InvalidParams):
        dist_iso(z, _x_meas(), method="diamond")


def test_dist_max_dominates_entangled_input():
    z, x = _z_meas(), _x_meas()
    floor = dist_iso(z, x)
    wopts = WorstCaseOptions(restarts=2, max_steps=20)
    value, psi = dist_max(z, x, wopts=wopts)
    assert value >= floor - 1e-6
    assert abs(np.linalg.norm(psi) - 1.0) <= 1e-9
    assert psi.shape == (4,)


def test_fid_min_below_entangled_input():
    z, x = _z_meas(), _x_meas()
    ceil = fid_iso(z, x)
    value, psi = fid_min(z, x, wopts=WorstCaseOptions(restarts=2, max_steps=20))
    assert value <= ceil + 1e-6
    assert abs(np.linalg.norm(psi) - 1.0) <= 1e-9


def test_dist_max_system_only_ancilla():
    z, x = _z_meas(), _x_meas()
    value, psi = dist_max(z, x, wopts=WorstCaseOptions(restarts=2, max_steps=20), ancilla_dim=1)
    assert psi.shape == (2,)
    # without side information the bases are harder to tell apart
    assert value <= dist_max(z, x, wopts=WorstCaseOptions(restarts=2, max_steps=20))[0] + 1e-6
    with pytest.raises(InvalidParams):
        dist_max(z, x, ancilla_dim=0)


def test_make_povm_validation():
    with pytest.raises(InvalidPovm):
        make_povm([])
    with pytest.raises(InvalidPovm):
        make_povm([np.array([[0.5, 0.1], [0.2, 0.5]]), np.eye(2) * 0.5])
    with pytest.raises(InvalidPovm):
        make_povm([np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])])
    with pytest.raises(InvalidPovm):
        make_povm([np.eye(2) * 0.4, np.eye(2) * 0.4])  # sums to 0.8 I
    with pytest.raises(DimMismatch):
        make_povm([np.eye(2) * 0.5, np.eye(3) * 0.5])


def test_povm_to_ensemble_average():
    p = make_povm([np.diag([0.8, 0.2]), np.diag([0.2, 0.8])])
    ens = povm_to_ensemble(p)
    assert np.abs(average_state(ens) - np.eye(2) / 2).max() <= 1e-12
    assert np.allclose(sorted(ens.probs), [0.5, 0.5])


def test_povm_distance_z_vs_x():
    pz = make_povm([np.outer(E0, E0), np.outer(E1, E1)])
    px = make_povm([np.outer(PLUS_V, PLUS_V), np.outer(MINUS_V, MINUS_V)])
    assert abs(povm_distance(pz, px) - 1.0 / np.sqrt(2)) <= 1e-9
    assert povm_distance(pz, pz) <= 1e-12
    assert povm_fidelity(pz, pz) >= 1.0 - 1e-12
    f = povm_fidelity(pz, px)
    assert 0.0 < f < 1.0
    with pytest.raises(DimMismatch):
        povm_distance(pz, make_povm([np.eye(3)]))


def test_povm_measures_accept_ehs_method():
    pz = make_povm([np.outer(E0, E0), np.outer(E1, E1)])
    px = make_povm([np.outer(PLUS_V, PLUS_V), np.outer(MINUS_V, MINUS_V)])
    d_ehs = povm_distance(pz, px, method="ehs")
    d_lp = povm_distance(pz, px)
    assert d_ehs <= d_lp + 1e-4


def test_random_measurement_is_valid():
    for seed in range(3):
        m = random_measurement(3, 2, seed=seed, kraus_per_outcome=2)
        assert m.dim == 3
        assert abs(m.weights.sum() - 1.0) <= 1e-9
        comp = sum(
            w * (k.conj().T @ k) for w, kraus in m.outcomes for k in kraus
        )
        assert np.abs(comp - np.eye(3)).max() <= 1e-9


def test_unitary_conjugation_preserves_iso_distance():
    z, x = _z_meas(), _x_meas()
    u = random_unitary(2, seed=5)
    zu = make_measurement([(w, [u @ k for k in kraus]) for w, kraus in z.outcomes])
    xu = make_measurement([(w, [u @ k for k in kraus]) for w, kraus in x.outcomes])
    assert abs(dist_iso(zu, xu) - dist_iso(z, x)) <= 1e-9
