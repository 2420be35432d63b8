import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stot import (
    DensityOperator,
    ProjectiveMeasurement,
    Status,
    TPSMScenario,
    bayesian_inverse,
    discard_and_prepare,
    erasure_bayesian_inverse,
    erasure_channel,
    identity_channel,
    mh_distribution,
    random_channel,
    random_pvm,
    random_state,
    reversed_mh,
    solve_anticommutator,
    spatiotemporal_bayes_check,
    unitary_channel,
    verify_bayes_rule,
)
from stot.bayes import time_reversal_residual
from stot.channels import apply, apply_state, depolarizing_channel, haar_unitary, same_map
from stot.errors import DimensionMismatch, NoSolution
from stot.operators import anticommutator, matrix_unit

from conftest import plus_minus_pvm, random_hermitian

GRID = [0.25, 0.5, 0.75]


def exact_pairs():
    """(channel, prior) pairs whose Bayesian inverse is a genuine channel."""
    pairs = [(erasure_channel(lam), DensityOperator.diagonal([p, 1 - p])) for lam in GRID for p in GRID]
    for seed in range(4):
        d = 2 + seed % 3
        rho = random_state(d, seed=seed)
        pairs.append((unitary_channel(haar_unitary(d, seed)), rho))
        pairs.append((discard_and_prepare(random_state(2, seed=seed + 10), d), rho))
        pairs.append((identity_channel(d), rho))
    pairs.append((depolarizing_channel(2, 0.3), DensityOperator.maximally_mixed(2)))
    return pairs


def test_solver_round_trips():
    rng = np.random.default_rng(0)
    for _ in range(100):
        db, da = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        sigma = random_state(db, seed=rng).matrix
        c = random_hermitian(rng, db * da)
        sol = solve_anticommutator(sigma, c)
        assert sol.residual <= 1e-8
        lhs = 0.5 * anticommutator(np.kron(sigma, np.eye(da)), sol.solution)
        assert np.abs(lhs - c).max() <= 1e-8
        assert len(sol.kernel) == 0


def test_solver_on_maximally_mixed_is_identity():
    rng = np.random.default_rng(1)
    c = random_hermitian(rng, 6)
    sol = solve_anticommutator(np.eye(3) / 3, c)
    assert np.abs(sol.solution - 3 * c).max() < 1e-12


def test_solver_kernel_obstruction():
    sigma = np.diag([0.6, 0.4, 0.0])
    c = np.zeros((6, 6), dtype=complex)
    c[4, 4] = c[5, 5] = 0.5       # supported entirely on the kernel block (2, 2)
    c[0, 0] = 1.0
    with pytest.raises(NoSolution) as info:
        solve_anticommutator(sigma, c)
    # blocks are indexed in the ascending eigenbasis of sigma, so |2> is index 0
    assert sorted(map(tuple, info.value.blocks)) == [(0, 0)]
    assert info.value.residual == pytest.approx(np.sqrt(0.5))


def test_solver_kernel_without_obstruction():
    sigma = np.diag([0.6, 0.4, 0.0])
    rng = np.random.default_rng(2)
    c = random_hermitian(rng, 6)
    c[4:, 4:] = 0
    sol = solve_anticommutator(sigma, c)
    assert list(sol.kernel) == [0]
    assert abs(abs(sol.eigenvectors[2, 0]) - 1) < 1e-12
    assert sol.residual < 1e-12


def test_random_full_rank_inversions():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        rho = random_state(da, seed=rng)
        e = random_channel(da, db, int(rng.integers(max(1, -(-da // db)), 4)), rng)
        res = bayesian_inverse(e, rho)
        assert res.status in (Status.EXACT, Status.APPROXIMATE_CP)
        assert res.residual <= 1e-8
        assert res.tp_residual <= 1e-8


@pytest.mark.parametrize("lam", GRID)
@pytest.mark.parametrize("p", GRID)
def test_erasure_inverse_matches_closed_form(lam, p):
    e = erasure_channel(lam)
    rho = DensityOperator.diagonal([p, 1 - p])
    res = bayesian_inverse(e, rho)
    assert res.status is Status.EXACT
    assert res.residual < 1e-10
    assert same_map(res.channel, erasure_bayesian_inverse(lam, p)) <= 1e-8
    assert verify_bayes_rule(e, rho, erasure_bayesian_inverse(lam, p)) <= 1e-10


def test_unitary_inverse_is_adjoint():
    u = haar_unitary(3, 5)
    res = bayesian_inverse(unitary_channel(u), random_state(3, seed=5))
    assert res.status is Status.EXACT
    assert same_map(res.channel, unitary_channel(u.conj().T)) < 1e-8


def test_discard_and_prepare_inverse_prepares_prior():
    rho = random_state(3, seed=6)
    res = bayesian_inverse(discard_and_prepare(random_state(2, seed=7), 3), rho)
    assert res.status is Status.EXACT
    assert same_map(res.channel, discard_and_prepare(rho, 2)) < 1e-8


def test_wrong_candidate_is_rejected():
    e, rho = erasure_channel(0.5), DensityOperator.diagonal([0.25, 0.75])
    assert verify_bayes_rule(e, rho, erasure_bayesian_inverse(0.5, 0.5)) > 1e-3
    with pytest.raises(DimensionMismatch):
        verify_bayes_rule(e, rho, e)


def test_non_cp_solution_is_reported_not_raised():
    e = random_channel(2, 2, 1, seed=3)
    rho = random_state(2, seed=9)
    from stot.channels import amplitude_damping

    res = bayesian_inverse(amplitude_damping(0.4), DensityOperator.pure([np.cos(0.4), np.sin(0.4)]))
    assert res.status is Status.APPROXIMATE_CP
    assert res.channel is None
    assert res.min_choi_eigenvalue < -1e-8
    assert res.to_dict()["kraus"] is None
    assert bayesian_inverse(e, rho).residual < 1e-10


def test_self_consistency():
    for e, rho in exact_pairs():
        f = bayesian_inverse(e, rho)
        assert f.status is Status.EXACT
        back = bayesian_inverse(f.channel, apply_state(e, rho))
        assert back.status is Status.EXACT
        # compare on the support of rho only
        w, v = np.linalg.eigh(rho.matrix)
        support = v[:, w > 1e-12]
        for a in range(support.shape[1]):
            for b in range(support.shape[1]):
                x = np.outer(support[:, a], support[:, b].conj())
                assert np.abs(apply(back.channel, x) - apply(e, x)).max() <= 1e-6


def test_time_reversal_on_exact_pairs():
    for n, (e, rho) in enumerate(exact_pairs()):
        f = bayesian_inverse(e, rho).channel
        for k in range(50):
            seed = 1000 * n + k
            s = TPSMScenario(rho, random_pvm(e.dim_in, 2 + seed % (e.dim_in - 1), seed), e,
                             random_pvm(e.dim_out, 2, seed + 1))
            assert time_reversal_residual(s, f) <= 1e-10


@pytest.mark.parametrize("lam", GRID)
@pytest.mark.parametrize("p", GRID)
def test_erasure_example_reversal_and_bayes_cells(lam, p):
    rho = DensityOperator.diagonal([p, 1 - p])
    s = TPSMScenario(rho, plus_minus_pvm(), erasure_channel(lam), ProjectiveMeasurement.computational(3))
    f = erasure_bayesian_inverse(lam, p)
    qbar = reversed_mh(s, f)
    assert np.abs(qbar.values.T - mh_distribution(s).values).max() <= 1e-10
    rep = spatiotemporal_bayes_check(s, f)
    assert rep.passed and rep.max_residual <= 1e-8
    assert not rep.undefined


def test_undefined_cells_fall_back_to_joint_identity():
    rho = DensityOperator.diagonal([0.5, 0.5, 0.0])
    e = discard_and_prepare(random_state(2, seed=1), 3)
    f = bayesian_inverse(e, rho)
    assert f.status is Status.EXACT
    s = TPSMScenario(rho, ProjectiveMeasurement.computational(3), e, ProjectiveMeasurement.computational(2))
    rep = spatiotemporal_bayes_check(s, f.channel)
    assert rep.undefined == [("2", "0"), ("2", "1")]
    assert rep.passed


def test_negative_conditional_keeps_sign():
    psi = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    rho = DensityOperator(0.9 * np.outer(psi, psi) + 0.05 * np.eye(2))
    s = TPSMScenario(rho, plus_minus_pvm(), identity_channel(2), ProjectiveMeasurement.computational(2))
    f = bayesian_inverse(s.channel, rho)
    assert f.status is Status.EXACT
    rep = spatiotemporal_bayes_check(s, f.channel)
    cell = next(c for c in rep.cells if (c.i, c.j) == ("-", "1"))
    assert cell.defined and cell.forward_conditional < -0.3
    assert cell.residual <= 1e-10
    assert rep.to_dict()["passed"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_bayes_identity_never_fails_on_exact_pairs(seed):
    pairs = exact_pairs()
    e, rho = pairs[seed % len(pairs)]
    f = bayesian_inverse(e, rho).channel
    s = TPSMScenario(rho, random_pvm(e.dim_in, 2, seed), e, random_pvm(e.dim_out, 2, seed + 7))
    assert spatiotemporal_bayes_check(s, f).max_residual <= 1e-8


def test_result_serialization():
    res = bayesian_inverse(erasure_channel(0.5), DensityOperator.diagonal([0.25, 0.75]))
    doc = res.to_dict()
    assert doc["status"] == "Exact"
    assert len(doc["kraus"]) == len(res.channel.kraus)
    assert doc["diagnostics"]["kernel_dim"] == 0


def test_dimension_errors():
    with pytest.raises(DimensionMismatch):
        bayesian_inverse(erasure_channel(0.5), DensityOperator.maximally_mixed(3))
    with pytest.raises(DimensionMismatch):
        solve_anticommutator(np.eye(2) / 2, np.eye(5))
    assert matrix_unit(0, 1, 2)[0, 1] == 1


def test_solver_recovers_planted_solution():
    rng = np.random.default_rng(11)
    sigma = random_state(3, seed=rng).matrix
    x0 = random_hermitian(rng, 6)
    c = 0.5 * anticommutator(np.kron(sigma, np.eye(2)), x0)
    assert np.abs(solve_anticommutator(sigma, c).solution - x0).max() <= 1e-10


def test_solver_reproduces_erasure_inverse():
    from stot import jamiolkowski, state_over_time
    from stot.operators import swap_conjugate

    e, rho = erasure_channel(0.5), DensityOperator.diagonal([0.25, 0.75])
    v = state_over_time(rho, e)
    sol = solve_anticommutator(apply(e, rho.matrix), swap_conjugate(v.matrix, v.idx))
    assert np.abs(sol.solution - jamiolkowski(erasure_bayesian_inverse(0.5, 0.25)).matrix).max() <= 1e-10
