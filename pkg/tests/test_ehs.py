import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ensemble_metrics.ehs import (
    JointPair,
    SolverOptions,
    distance_objective,
    ehs_bures,
    ehs_distance,
    ehs_fidelity,
    fidelity_objective,
    project_rows_to_simplex,
    pure_ensemble_fidelity,
    uhlmann_pure_ensembles,
)
from ensemble_metrics.ensembles import (
    average_state,
    make_ensemble,
    pure_state,
    unify_support,
)
from ensemble_metrics.errors import NotPure
from ensemble_metrics.kantorovich import kantorovich_distance, kantorovich_fidelity
from ensemble_metrics.linalg import fidelity, trace_distance
from ensemble_metrics.oracle import random_density, random_ensemble

KET0 = pure_state(np.array([1.0, 0.0]))
KET1 = pure_state(np.array([0.0, 1.0]))

# values frozen against an independent semidefinite-programming solve
# (distance) and a 200-restart long-run ascent (fidelity)
PINNED = [
    ((2, 2, 61), (2, 2, 62), 0.468207559489, 0.837460552957),
    ((2, 3, 5), (2, 3, 6), 0.608869224246, 0.774626541840),
    ((3, 2, 17), (3, 2, 18), 0.528852322507, 0.766299035271),
]


def _basis_density(d, k):
    return pure_state(np.eye(d)[k])


def test_project_rows_to_simplex_basics():
    x = np.array([[0.2, 0.9, -0.4], [2.0, 2.0, 2.0]])
    masses = np.array([1.0, 0.3])
    out = project_rows_to_simplex(x, masses)
    assert out.min() >= 0.0
    assert np.abs(out.sum(axis=1) - masses).max() <= 1e-12
    # feasible input is a fixed point
    again = project_rows_to_simplex(out, masses)
    assert np.abs(again - out).max() <= 1e-12


def test_project_rows_to_simplex_zero_mass():
    out = project_rows_to_simplex(np.array([[1.0, 2.0]]), np.array([0.0]))
    assert np.all(out == 0.0)


@settings(max_examples=40, deadline=None)
@given(
    hnp.arrays(np.float64, (3, 4), elements=st.floats(-5, 5)),
    st.floats(0.01, 2.0),
)
def test_project_rows_to_simplex_is_projection(x, mass):
    masses = np.full(3, mass)
    out = project_rows_to_simplex(x, masses)
    assert out.min() >= -1e-12
    assert np.abs(out.sum(axis=1) - mass).max() <= 1e-9
    # projection never moves farther than an arbitrary feasible point
    feas = np.full((3, 4), mass / 4.0)
    assert np.linalg.norm(out - x) <= np.linalg.norm(feas - x) + 1e-9


def test_singleton_reduction():
    for seed in range(6):
        d = 2 + seed % 2
        rho = random_density(d, seed=seed)
        sigma = random_density(d, seed=100 + seed)
        a = make_ensemble([(1.0, rho)])
        b = make_ensemble([(1.0, sigma)])
        rep = ehs_distance(a, b)
        assert abs(rep.value - trace_distance(rho, sigma)) <= 1e-4
        rep = ehs_fidelity(a, b)
        assert abs(rep.value - fidelity(rho, sigma)) <= 1e-4


def test_classical_limits():
    d = 3
    basis = [_basis_density(d, k) for k in range(d)]
    rng = np.random.default_rng(13)
    for _ in range(4):
        p = rng.dirichlet(np.ones(d))
        q = rng.dirichlet(np.ones(d))
        a = make_ensemble(list(zip(p, basis)))
        b = make_ensemble(list(zip(q, basis)))
        assert abs(ehs_distance(a, b).value - 0.5 * np.abs(p - q).sum()) <= 1e-4
        assert abs(ehs_fidelity(a, b).value - np.sqrt(p * q).sum()) <= 1e-4


def test_pinned_instances():
    for spec_a, spec_b, want_d, want_f in PINNED:
        a = random_ensemble(*spec_a[:2], seed=spec_a[2])
        b = random_ensemble(*spec_b[:2], seed=spec_b[2])
        assert abs(ehs_distance(a, b).value - want_d) <= 2e-4
        assert abs(ehs_fidelity(a, b).value - want_f) <= 2e-4


def test_distance_report_contract():
    a = random_ensemble(2, 2, seed=61)
    b = random_ensemble(2, 2, seed=62)
    rep = ehs_distance(a, b)
    lower, upper = rep.bracket
    assert abs(lower - trace_distance(average_state(a), average_state(b))) <= 1e-12
    assert abs(upper - kantorovich_distance(a, b)[0]) <= 1e-12
    assert lower - 1e-12 <= rep.value <= upper + 1e-12
    assert rep.converged
    assert rep.iterations >= 1
    sp = unify_support(a, b)
    tp, tq = rep.joint_pair.p_table, rep.joint_pair.q_table
    assert tp.min() >= -1e-12 and tq.min() >= -1e-12
    assert np.abs(tp.sum(axis=1) - sp.p).max() <= 1e-9
    assert np.abs(tq.sum(axis=0) - sp.q).max() <= 1e-9


def test_fidelity_report_contract():
    a = random_ensemble(2, 2, seed=61)
    b = random_ensemble(2, 2, seed=62)
    rep = ehs_fidelity(a, b)
    lower, upper = rep.bracket
    assert abs(lower - kantorovich_fidelity(a, b)[0]) <= 1e-12
    assert abs(upper - fidelity(average_state(a), average_state(b))) <= 1e-12
    assert lower - 1e-12 <= rep.value <= upper + 1e-12
    assert rep.converged


def test_identical_ensembles():
    ens = random_ensemble(2, 3, seed=9)
    assert ehs_distance(ens, ens).value <= 1e-8
    assert ehs_fidelity(ens, ens).value >= 1.0 - 1e-8


def test_budget_exhaustion_is_reported():
    a = random_ensemble(2, 3, seed=5)
    b = random_ensemble(2, 3, seed=6)
    rep = ehs_distance(a, b, SolverOptions(tol=1e-9, max_iter=10))
    assert not rep.converged
    assert rep.iterations == 10
    # the value is still a feasible upper bound inside the bracket
    assert rep.bracket[0] - 1e-12 <= rep.value <= rep.bracket[1] + 1e-12


def test_solver_options_defaults():
    opts = SolverOptions()
    assert opts.tol == 1e-4
    assert opts.max_iter == 5000
    assert opts.restarts == 8
    assert opts.seed == 0


def test_seed_determinism():
    a = random_ensemble(2, 3, seed=31)
    b = random_ensemble(2, 3, seed=32)
    v1 = ehs_fidelity(a, b, SolverOptions(seed=3)).value
    v2 = ehs_fidelity(a, b, SolverOptions(seed=3)).value
    assert v1 == v2


def test_distance_objective_at_product_tables():
    a = random_ensemble(2, 2, seed=41)
    b = random_ensemble(2, 2, seed=42)
    sp = unify_support(a, b)
    tables = (np.outer(sp.p, sp.q), np.outer(sp.p, sp.q))
    value, gp, gq = distance_objective(a, b)(*tables)
    expect = sum(
        sp.p[i] * sp.q[j] * trace_distance(sp.omega[i], sp.omega[j])
        for i in range(len(sp.omega))
        for j in range(len(sp.omega))
    )
    assert abs(value - expect) <= 1e-10
    assert gp.shape == tables[0].shape and gq.shape == tables[1].shape


def test_fidelity_objective_at_product_tables():
    a = random_ensemble(2, 2, seed=43)
    b = random_ensemble(2, 2, seed=44)
    sp = unify_support(a, b)
    t = np.outer(sp.p, sp.q)
    value, _, _ = fidelity_objective(a, b)(t, t)
    expect = sum(
        t[i, j] * fidelity(sp.omega[i], sp.omega[j])
        for i in range(len(sp.omega))
        for j in range(len(sp.omega))
    )
    assert abs(value - expect) <= 1e-10


def test_uhlmann_pure_ensembles_overlap():
    for seed in range(6):
        d = 2 + seed % 3
        rho = random_density(d, seed=seed)
        sigma = random_density(d, seed=60 + seed)
        ens_p, ens_q, overlap = uhlmann_pure_ensembles(rho, sigma)
        assert abs(overlap - fidelity(rho, sigma)) <= 1e-9
        assert np.abs(average_state(ens_p) - rho).max() <= 1e-9
        assert np.abs(average_state(ens_q) - sigma).max() <= 1e-9


def test_pure_ensemble_fidelity_achieves_state_fidelity():
    rho = random_density(2, seed=71)
    sigma = random_density(2, seed=72)
    ens_p, ens_q, _ = uhlmann_pure_ensembles(rho, sigma)
    got = pure_ensemble_fidelity(ens_p, ens_q)
    assert abs(got - fidelity(rho, sigma)) <= 1e-6


def test_pure_ensemble_fidelity_rejects_mixed():
    mixed = make_ensemble([(1.0, np.eye(2) / 2)])
    with pytest.raises(NotPure):
        pure_ensemble_fidelity(mixed, mixed)


def test_ehs_bures_relations():
    a = random_ensemble(2, 2, seed=81)
    b = random_ensemble(2, 2, seed=82)
    f = ehs_fidelity(a, b).value
    length, angle = ehs_bures(a, b)
    assert abs(length - np.sqrt(1.0 - f)) <= 1e-9
    assert abs(angle - np.arccos(f)) <= 1e-9
    same = ehs_bures(a, a)
    assert same[0] <= 1e-4 and same[1] <= 1e-2


def test_orthogonal_singletons_extremes():
    a = make_ensemble([(1.0, KET0)])
    b = make_ensemble([(1.0, KET1)])
    assert abs(ehs_distance(a, b).value - 1.0) <= 1e-8
    assert ehs_fidelity(a, b).value <= 1e-8
