import numpy as np
import pytest

from seqfab.gates import X, gate
from seqfab.linalg import embed, expm_hermitian, kron
from seqfab.sampling import haar_unitary
from seqfab.vmpo import (
    OptimizerConfig,
    SequentialCircuit,
    coupling_gradient,
    couplings_from_unitary,
    cost,
    environment,
    fidelity_gap,
    lift_target,
    local_update_pauli_gradient,
    local_update_procrustes,
    optimize,
    seq_to_global,
    site_order,
    unitary_from_couplings,
)


def manual_product(unitaries, order, n, d):
    """U_seq built directly from embeddings, no circuit object involved."""
    dims = [2] * n + [d]
    out = np.eye(2**n * d, dtype=complex)
    for u, k in zip(unitaries, order):
        out = embed(u, [k, n], dims) @ out
    return out


# -- circuit structure ---------------------------------------------------------


def test_site_order():
    assert site_order(3) == [0, 1, 2]
    assert site_order(3, rounds=2) == [0, 1, 2, 2, 1, 0]
    assert site_order(2, rounds=3, alternate=False) == [0, 1, 0, 1, 0, 1]


def test_circuit_validation(rng):
    with pytest.raises(ValueError):
        SequentialCircuit(2, 2, [np.eye(4)])
    with pytest.raises(ValueError):
        SequentialCircuit(2, 2, [np.eye(4), np.ones((4, 4))])
    with pytest.raises(ValueError):
        SequentialCircuit(2, 3, [np.eye(4), np.eye(4)])
    c = SequentialCircuit.haar(3, 2, rng, rounds=2)
    assert len(c) == 6 and c.size == 16


def test_identity_circuit_is_identity():
    c = SequentialCircuit.identity(3, 4)
    np.testing.assert_array_equal(seq_to_global(c), np.eye(32))


def test_cnot_on_first_qubit_and_ancilla():
    c = SequentialCircuit(2, 2, [gate("CNOT"), np.eye(4)])
    ref = np.zeros((8, 8))
    for q1, q2, a in np.ndindex(2, 2, 2):
        ref[q1 * 4 + q2 * 2 + (a ^ q1), q1 * 4 + q2 * 2 + a] = 1
    np.testing.assert_array_equal(seq_to_global(c), ref)


def test_composition_order_matters():
    u1 = kron(X, np.eye(2))  # flips qubit
    u2 = gate("CNOT")  # qubit controls ancilla
    # on the same qubit the two do not commute
    fwd = SequentialCircuit(2, 2, [u1, u2], rounds=1)
    rev = SequentialCircuit(2, 2, [u2, u1], rounds=1)
    assert np.linalg.norm(seq_to_global(fwd) - seq_to_global(rev)) > 1e-6
    c = SequentialCircuit(2, 2, [u1, u2, u2, u1], rounds=2, alternate=False)
    np.testing.assert_allclose(seq_to_global(c), manual_product(c.unitaries, [0, 1, 0, 1], 2, 2), atol=1e-14)


def test_global_is_unitary(rng):
    c = SequentialCircuit.haar(3, 3, rng, rounds=2)
    u = seq_to_global(c)
    assert np.linalg.norm(u.conj().T @ u - np.eye(c.size)) <= 1e-9


# -- cost ----------------------------------------------------------------------


def test_cost_of_exact_circuit(rng):
    c = SequentialCircuit.haar(2, 2, rng)
    res = cost(c, seq_to_global(c))
    assert abs(res.cost) < 1e-12 and abs(res.fidelity - 1) < 1e-14


def test_cost_identity_circuit_vs_cnot():
    res = cost(SequentialCircuit.identity(2, 2), lift_target(gate("CNOT"), 2))
    assert res.fidelity == pytest.approx(0.5, abs=1e-15)
    assert res.cost == pytest.approx(8.0, abs=1e-12)
    assert res.fidelity == pytest.approx(1 - res.normalized_cost, abs=1e-15)


def test_cost_is_frobenius_distance(rng):
    c = SequentialCircuit.haar(2, 3, rng)
    t = lift_target(haar_unitary(4, rng), 3)
    assert cost(c, t).cost == pytest.approx(np.linalg.norm(t - seq_to_global(c)) ** 2, abs=1e-10)


def test_cost_dimension_mismatch():
    with pytest.raises(ValueError):
        cost(SequentialCircuit.identity(2, 2), np.eye(4))


# -- environment ---------------------------------------------------------------


def test_environment_at_identity():
    c = SequentialCircuit.identity(2, 2)
    e = environment(c, np.eye(8), 0)
    assert np.trace(e.conj().T @ np.eye(4)) == pytest.approx(8)


def test_environment_is_linear_in_target(rng):
    c = SequentialCircuit.haar(3, 2, rng)
    t1, t2 = haar_unitary(16, rng), haar_unitary(16, rng)
    a, b = 0.7 - 0.2j, -1.3
    for s in range(3):
        lhs = environment(c, a * t1 + b * t2, s)
        rhs = a * environment(c, t1, s) + b * environment(c, t2, s)
        assert np.linalg.norm(lhs - rhs) < 1e-12


@pytest.mark.parametrize("n,d,rounds", [(2, 2, 1), (3, 2, 1), (2, 3, 2), (3, 4, 1)])
def test_environment_defining_identity(rng, n, d, rounds):
    c = SequentialCircuit.haar(n, d, rng, rounds=rounds)
    t = haar_unitary(c.size, rng)
    full = np.vdot(t, seq_to_global(c))
    for s in range(len(c)):
        e = environment(c, t, s)
        assert abs(np.vdot(e, c.unitaries[s]) - full) <= 1e-10


def test_environment_matches_finite_differences(rng):
    n, d, site = 2, 2, 1
    c = SequentialCircuit.haar(n, d, rng)
    t = haar_unitary(c.size, rng)
    e = environment(c, t, site)
    h = 1e-6

    def overlap(u_site):
        us = list(c.unitaries)
        us[site] = u_site
        return np.vdot(t, manual_product(us, c.order, n, d)).real

    u0 = c.unitaries[site]
    grad = np.zeros(u0.shape, dtype=complex)
    for idx in np.ndindex(u0.shape):
        for unit, part in ((1.0, 1.0), (1j, 1j)):
            up, um = u0.copy(), u0.copy()
            up[idx] += h * unit
            um[idx] -= h * unit
            grad[idx] += part * (overlap(up) - overlap(um)) / (2 * h)
    # d Re Tr[E^dag U] / d Re U_ij = Re E_ij and / d Im U_ij = Im E_ij
    assert np.max(np.abs(grad - e)) < 1e-7


def test_environment_site_out_of_range():
    with pytest.raises(IndexError):
        environment(SequentialCircuit.identity(2, 2), np.eye(8), 2)


# -- Procrustes update ---------------------------------------------------------


def test_procrustes_of_unitary_is_itself(rng):
    w = haar_unitary(4, rng)
    np.testing.assert_allclose(local_update_procrustes(w), w, atol=1e-12)


def test_procrustes_positive_diagonal():
    np.testing.assert_allclose(local_update_procrustes(np.diag([2.0, 1.0])), np.eye(2), atol=1e-15)


def test_procrustes_dominates_haar_samples(rng):
    env = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    u = local_update_procrustes(env)
    assert np.linalg.norm(u.conj().T @ u - np.eye(4)) <= 1e-10
    best = np.vdot(env, u).real
    assert best == pytest.approx(np.sum(np.linalg.svd(env, compute_uv=False)), abs=1e-12)
    samples = [np.vdot(env, haar_unitary(4, rng)).real for _ in range(10_000)]
    assert best >= max(samples)


def test_procrustes_zero_environment():
    with pytest.raises(ValueError):
        local_update_procrustes(np.zeros((4, 4)))


# -- Pauli-coupling update -----------------------------------------------------


def test_zero_couplings_give_identity():
    np.testing.assert_allclose(unitary_from_couplings(np.zeros((4, 4)), 2), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(unitary_from_couplings(np.zeros((4, 16)), 4), np.eye(8), atol=1e-15)


@pytest.mark.parametrize("d", [2, 4])
def test_couplings_round_trip(rng, d):
    u = haar_unitary(2 * d, rng)
    h = couplings_from_unitary(u, d)
    assert h.shape == (4, d * d)
    np.testing.assert_allclose(unitary_from_couplings(h, d), u, atol=1e-10)


def test_pauli_gradient_unsupported_dimension():
    with pytest.raises(ValueError):
        unitary_from_couplings(np.zeros((4, 9)), 3)


def test_gradient_vanishes_at_procrustes_optimum(rng):
    target = lift_target(gate("CNOT"), 2)
    c = SequentialCircuit.haar(2, 2, rng)
    for _ in range(5):
        for s in range(2):
            c = c.with_site(s, local_update_procrustes(environment(c, target, s)))
    for s in range(2):
        h = couplings_from_unitary(c.unitaries[s], 2)
        assert np.max(np.abs(coupling_gradient(c, target, s, h))) <= 1e-5


def test_single_coupling_inverse_problem():
    generator = np.kron(X, X)
    target = embed(expm_hermitian(0.3 * generator), [0, 2], [2, 2, 2])
    c = SequentialCircuit.identity(2, 2)
    u, h = local_update_pauli_gradient(c, target, 0, np.zeros((4, 4)), steps=300, rate=0.5)
    res = cost(c.with_site(0, u), target)
    assert res.fidelity > 1 - 1e-8
    assert h[1, 1] == pytest.approx(0.3, abs=1e-4)
    others = np.delete(h.ravel(), 5)
    assert np.max(np.abs(others)) < 1e-4


def test_pauli_update_never_lowers_fidelity(rng):
    target = lift_target(gate("SWAP"), 2)
    c = SequentialCircuit.haar(2, 2, rng)
    for s in (0, 1, 0):
        before = cost(c, target).fidelity
        u, _ = local_update_pauli_gradient(c, target, s, steps=5)
        c = c.with_site(s, u)
        assert cost(c, target).fidelity >= before - 1e-12


# -- optimize ------------------------------------------------------------------


def test_optimize_product_target(rng):
    g = kron(haar_unitary(2, rng), haar_unitary(2, rng), haar_unitary(2, rng))
    for d in (2, 3):
        report = optimize(g, 3, d, 1, OptimizerConfig(restarts=2))
        assert report.fidelity >= 1 - 1e-9
        assert fidelity_gap(report) == pytest.approx(0, abs=1e-9)


def test_optimize_cnot():
    report = optimize(gate("CNOT"), 2, 2, 1, OptimizerConfig(restarts=4))
    assert report.fidelity == pytest.approx(0.7071, abs=1e-3)
    assert fidelity_gap(report) == pytest.approx(0.2929, abs=1e-3)
    assert report.converged
    assert cost(report.best_circuit, lift_target(gate("CNOT"), 2)).fidelity == pytest.approx(report.fidelity, abs=1e-12)
    assert report.fidelity == pytest.approx(1 - report.normalized_cost, abs=1e-12)
    assert report.restarts_run == 4 and len(report.restart_fidelities) == 4


def test_optimize_swap_gap():
    report = optimize(gate("SWAP"), 2, 2, 1, OptimizerConfig(restarts=4))
    assert fidelity_gap(report) == pytest.approx(0.5, abs=1e-3)


def test_two_rounds_implement_cnot_exactly():
    report = optimize(gate("CNOT"), 2, 2, 2, OptimizerConfig(restarts=4))
    assert report.fidelity >= 1 - 1e-6


def test_cost_trace_is_monotone():
    for name, n in (("CNOT", 2), ("SWAP", 2), ("FREDKIN", 3)):
        report = optimize(gate(name), n, 2, 1, OptimizerConfig(restarts=2, seed=5))
        assert np.all(np.diff(report.cost_trace) <= 1e-12)


def test_locally_equivalent_gates_share_fidelity(rng):
    cfg = OptimizerConfig(restarts=4)
    f_cnot = optimize(gate("CNOT"), 2, 2, 1, cfg).fidelity
    assert optimize(gate("CZ"), 2, 2, 1, cfg).fidelity == pytest.approx(f_cnot, abs=1e-6)
    left = kron(haar_unitary(2, rng), haar_unitary(2, rng))
    right = kron(haar_unitary(2, rng), haar_unitary(2, rng))
    dressed = left @ gate("CNOT") @ right
    assert optimize(dressed, 2, 2, 1, cfg).fidelity == pytest.approx(f_cnot, abs=1e-3)


def test_update_rules_agree_on_cnot():
    f_proc = optimize(gate("CNOT"), 2, 2, 1, OptimizerConfig(restarts=2)).fidelity
    report = optimize(gate("CNOT"), 2, 2, 1, OptimizerConfig(restarts=2, update_rule="pauli_gradient"))
    assert report.fidelity == pytest.approx(f_proc, abs=1e-4)
    assert np.all(np.diff(report.cost_trace) <= 1e-12)


def test_optimize_is_deterministic():
    cfg = OptimizerConfig(restarts=2, seed=11)
    a = optimize(gate("CPHASE"), 2, 2, 1, cfg)
    b = optimize(gate("CPHASE"), 2, 2, 1, cfg)
    assert a.cost_trace == b.cost_trace
    assert a.best_restart == b.best_restart


def test_identity_init_is_supported():
    report = optimize(gate("CNOT"), 2, 2, 2, OptimizerConfig(restarts=1, init="identity"))
    assert 0.5 <= report.fidelity <= 1 + 1e-12


def test_optimize_input_errors():
    with pytest.raises(ValueError):
        optimize(gate("CNOT"), 3, 2)
    with pytest.raises(ValueError):
        optimize(np.ones((4, 4)), 2, 2)
    with pytest.raises(ValueError):
        optimize(gate("CNOT"), 2, 1)
    with pytest.raises(ValueError):
        OptimizerConfig(update_rule="newton")
