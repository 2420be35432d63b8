import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stot import (
    DensityOperator,
    Kind,
    ProjectiveMeasurement,
    TPSMScenario,
    born_evaluate,
    coarse_grain,
    compare_coarse_graining,
    discard_and_prepare,
    disturbance_term,
    erasure_channel,
    identity_channel,
    lvn_distribution,
    mh_distribution,
    random_channel,
    random_pvm,
    random_state,
    state_over_time,
    two_time_expectation,
    unitary_channel,
)
from stot.channels import adjoint_apply, apply, haar_unitary
from stot.distributions import disturbance_measurable, lueders_update
from stot.errors import DimensionMismatch, ImaginaryResidueExceeded, InvalidMeasurement, InvalidPartition
from stot.operators import PAULI_Z, projector

from conftest import KET0, PLUS, plus_minus_pvm, random_scenario


def pure_qubit_scenario():
    return TPSMScenario(DensityOperator.pure(KET0), plus_minus_pvm(), identity_channel(2),
                        ProjectiveMeasurement.computational(2))


def qutrit_witness():
    """Coherent qutrit state, computational P, identity channel, Q along the coherence."""
    psi = np.array([1, 1, 0]) / np.sqrt(2)
    q = projector(psi)
    return TPSMScenario(DensityOperator.pure(psi), ProjectiveMeasurement.computational(3),
                        identity_channel(3), ProjectiveMeasurement([q, np.eye(3) - q], ["psi", "rest"]))


def test_pure_qubit_tables():
    s = pure_qubit_scenario()
    assert np.abs(lvn_distribution(s).values - 0.25).max() < 1e-15
    assert np.abs(mh_distribution(s).values - [[0.5, 0], [0.5, 0]]).max() < 1e-15
    assert np.abs(disturbance_term(s).values - [[0.25, -0.25], [0.25, -0.25]]).max() < 1e-15
    assert mh_distribution(s)["+", "0"] == pytest.approx(0.5)
    assert mh_distribution(s)[1, 1] == pytest.approx(0.0)


def test_lvn_is_a_probability(random_scenarios):
    for s in random_scenarios[:50]:
        p = lvn_distribution(s).values
        assert p.min() >= -1e-12
        assert abs(p.sum() - 1) < 1e-10


def test_mh_decomposes_into_lvn_plus_disturbance(random_scenarios):
    for s in random_scenarios:
        gap = mh_distribution(s).values - lvn_distribution(s).values - disturbance_term(s).values
        assert np.abs(gap).max() <= 1e-10


def test_lueders_anticommutator_identity(random_scenarios):
    # {rho, P} / 2 = P rho P + (rho - rho_P) / 2
    for s in random_scenarios[:40]:
        rho = s.rho.matrix
        for p in s.pvm_a.projectors:
            lhs = (rho @ p + p @ rho) / 2
            rhs = p @ rho @ p + (rho - lueders_update(rho, p)) / 2
            assert np.abs(lhs - rhs).max() < 1e-12


def test_disturbance_measurable_form(random_scenarios):
    for s in random_scenarios[:40]:
        assert np.abs(disturbance_measurable(s) - disturbance_term(s).values).max() < 1e-12


def test_born_rule(random_scenarios):
    for s in random_scenarios:
        assert np.abs(mh_distribution(s).values - born_evaluate(s).values).max() <= 1e-10


def test_no_disturbance_for_maximally_mixed_state():
    for seed in range(10):
        s = random_scenario(seed)
        s = TPSMScenario(DensityOperator.maximally_mixed(s.rho.dim), s.pvm_a, s.channel, s.pvm_b)
        assert np.abs(disturbance_term(s).values).max() <= 1e-10


def test_no_disturbance_for_discard_and_prepare():
    for seed in range(10):
        s = random_scenario(seed)
        e = discard_and_prepare(random_state(s.pvm_b.dim, seed=seed), s.rho.dim)
        s = TPSMScenario(s.rho, s.pvm_a, e, s.pvm_b)
        assert np.abs(disturbance_term(s).values).max() <= 1e-10


def test_no_disturbance_when_state_commutes_with_pvm():
    for seed in range(10):
        d = 2 + seed % 3
        u = haar_unitary(d, seed)
        pvm = ProjectiveMeasurement([u[:, [k]] @ u[:, [k]].conj().T for k in range(d)])
        w = np.random.default_rng(seed).dirichlet(np.ones(d))
        rho = DensityOperator(u @ np.diag(w) @ u.conj().T)
        s = TPSMScenario(rho, pvm, random_channel(d, 3, 2, seed), random_pvm(3, 2, seed))
        assert np.abs(disturbance_term(s).values).max() <= 1e-10


def test_no_disturbance_when_pvm_commutes_with_heisenberg_effects():
    for seed in range(10):
        d = 2 + seed % 3
        u = haar_unitary(d, seed + 50)
        pvm_a = random_pvm(d, 2, seed)
        pvm_b = ProjectiveMeasurement([u @ p @ u.conj().T for p in pvm_a.projectors])
        s = TPSMScenario(random_state(d, seed=seed), pvm_a, unitary_channel(u), pvm_b)
        for p in pvm_a.projectors:
            for q in pvm_b.projectors:
                eq = adjoint_apply(s.channel, q)
                assert np.abs(p @ eq - eq @ p).max() < 1e-10
        assert np.abs(disturbance_term(s).values).max() <= 1e-10


def test_marginal_laws(random_scenarios):
    for s in random_scenarios:
        q = mh_distribution(s)
        born_a = [np.trace(s.rho.matrix @ p).real for p in s.pvm_a.projectors]
        e_rho = apply(s.channel, s.rho.matrix)
        born_b = [np.trace(e_rho @ p).real for p in s.pvm_b.projectors]
        assert np.abs(q.row_marginal() - born_a).max() <= 1e-10
        assert np.abs(q.col_marginal() - born_b).max() <= 1e-10
        assert np.abs(lvn_distribution(s).row_marginal() - born_a).max() <= 1e-10


def test_mh_coarse_graining_commutes(random_scenarios):
    checked = 0
    for s in random_scenarios:
        labels = list(s.pvm_a.labels)
        if len(labels) < 3:
            continue
        merge = [labels[:2], labels[2:]]
        assert compare_coarse_graining(s, merge, Kind.MH).violation <= 1e-10
        checked += 1
    assert checked > 20


def test_lvn_non_additivity_witness():
    s = qutrit_witness()
    cmp = compare_coarse_graining(s, [["0", "1"], ["2"]], Kind.LVN)
    assert cmp.violation >= 0.1
    assert cmp.violation == pytest.approx(0.5, abs=1e-12)
    assert cmp.merged_table.row_labels == ("0+1", "2")
    assert compare_coarse_graining(s, [["0", "1"], ["2"]], Kind.MH).violation < 1e-12


def test_negative_quasiprobability_implies_disturbance(random_scenarios):
    hits = 0
    for s in list(random_scenarios) + [pure_qubit_scenario()]:
        if mh_distribution(s).values.min() < -1e-10:
            hits += 1
            assert np.abs(disturbance_term(s).values).max() > 1e-10
    assert hits > 0


def test_two_time_expectation_examples():
    s = TPSMScenario(DensityOperator.maximally_mixed(2), ProjectiveMeasurement.computational(2),
                     identity_channel(2), ProjectiveMeasurement.computational(2))
    assert two_time_expectation(s, PAULI_Z) == pytest.approx(1.0, abs=1e-15)
    v = state_over_time(s.rho, s.channel)
    assert np.trace(v.matrix @ np.kron(PAULI_Z, PAULI_Z)).real == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_two_time_expectation_matches_state_over_time(seed):
    rng = np.random.default_rng(seed)
    da, db = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    s = TPSMScenario(random_state(da, seed=rng), random_pvm(da, 2, rng),
                     random_channel(da, db, 2, rng), random_pvm(db, 2, rng))
    oa = s.pvm_a.projectors[0] - s.pvm_a.projectors[1]
    ob = s.pvm_b.projectors[0] - s.pvm_b.projectors[1]
    v = state_over_time(s.rho, s.channel)
    expected = np.trace(v.matrix @ np.kron(oa, ob)).real
    assert abs(two_time_expectation(s, ob) - expected) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_mh_sums_to_one_and_decomposes(seed):
    s = random_scenario(seed + 1000)
    q = mh_distribution(s)
    assert abs(q.total - 1) < 1e-10
    assert np.abs(q.values - lvn_distribution(s).values - disturbance_term(s).values).max() < 1e-10


def test_zero_probability_rows_are_kept():
    s = TPSMScenario(DensityOperator.pure(KET0), ProjectiveMeasurement.computational(2),
                     erasure_channel(0.5), ProjectiveMeasurement.computational(3))
    q = mh_distribution(s)
    assert q.values.shape == (2, 3)
    assert np.abs(q.values[1]).max() == 0


def test_serialization():
    q = mh_distribution(pure_qubit_scenario())
    doc = q.to_dict()
    assert {k: doc[k] for k in ("kind", "rows", "cols")} == {"kind": "MH", "rows": ["+", "-"], "cols": ["0", "1"]}
    assert np.abs(np.array(doc["values"]) - [[0.5, 0.0], [0.5, 0.0]]).max() < 1e-15
    rows = list(csv.reader(io.StringIO(q.to_csv())))
    assert rows[0] == ["MH", "0", "1"]
    assert rows[1][0] == "+" and float(rows[1][1]) == q.values[0, 0]


def test_errors():
    with pytest.raises(DimensionMismatch):
        TPSMScenario(DensityOperator.maximally_mixed(2), ProjectiveMeasurement.computational(3),
                     identity_channel(2), ProjectiveMeasurement.computational(2))
    s = qutrit_witness()
    with pytest.raises(InvalidPartition):
        coarse_grain(mh_distribution(s), [["0"], ["1"]])
    with pytest.raises(InvalidPartition):
        coarse_grain(mh_distribution(s), [["0", "0"], ["1", "2"]])
    with pytest.raises(InvalidMeasurement):
        two_time_expectation(s, np.eye(3))
    with pytest.raises(ImaginaryResidueExceeded):
        mh_distribution(pure_qubit_scenario(), imag_tol=-1.0)
    with pytest.raises(DimensionMismatch):
        born_evaluate(s, state_over_time(DensityOperator.maximally_mixed(2), identity_channel(2)))
