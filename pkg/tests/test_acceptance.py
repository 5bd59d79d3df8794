"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import time

import numpy as np
import scipy.linalg

from paulient.entpower import (
    haar_typical_value,
    local_pauli_magic_bound,
    pauli_entangling_power,
    pauli_power_via_q,
    q_permutation_traces,
    q_projector_basis,
    q_projector_build,
)
from paulient.factorization import (
    check_pauli_product_preserving,
    factorize,
    make_product_preserving,
    verify_factorization,
)
from paulient.magic import (
    SearchConfig,
    local_min_operator_magic,
    nonlocal_stabilizer_entropy,
    operator_coherence_2,
    operator_stabilizer_entropy,
    stabilizer_renyi_entropy,
)
from paulient.mpu import (
    lambda_closure,
    mpu_cz_chain,
    mpu_shift,
    mpu_single_gate,
    mpu_to_dense,
    mpu_zz_chain,
    pauli_power_mpu,
)
from paulient.operators import Bipartition, haar_random_unitary, random_local_unitary
from paulient.paulis import clifford_to_dense, random_clifford

from conftest import CNOT, SWAP, T_GATE, dense_pauli


def report(num: int, label: str, ok: bool, started: float, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    extra = f" - {detail}" if detail else ""
    print(f"[acceptance] criterion {num} ({label}): {status} "
          f"[{time.perf_counter() - started:.1f}s]{extra}")


def u_xx():
    return scipy.linalg.expm(-1j * np.pi / 8 * dense_pauli("XX"))


def test_criterion_1_factorization_round_trip():
    started = time.perf_counter()
    rng = np.random.default_rng(101)
    failures = []
    for trial in range(100):
        n = 2 + trial % 4  # N in {2..5}
        na = 1 + int(rng.integers(0, max(1, n // 2)))  # N_A in {1..floor(N/2)}
        bp = Bipartition(na, n - na)
        u, _, _, _ = make_product_preserving(bp, rng)
        ok, _ = check_pauli_product_preserving(u, bp)
        residual = verify_factorization(u, factorize(u, bp))
        pe = pauli_entangling_power(u, bp).value
        if not ok or residual > 1e-8 or pe > 1e-12:
            failures.append((trial, n, na, ok, residual, pe))
    elapsed = time.perf_counter() - started
    passed = not failures and elapsed <= 120.0
    report(1, "factorization round trip", passed, started,
           f"100 instances, worst residual ok, wall {elapsed:.1f}s <= 120s")
    assert not failures, failures[:3]
    assert elapsed <= 120.0


def test_criterion_2_converse_at_desk_scale():
    started = time.perf_counter()
    rng = np.random.default_rng(102)
    failures = []
    for trial in range(100):
        n = 2 + trial % 3  # N in {2..4}
        na = 1 + trial % (n - 1) if n > 2 else 1
        bp = Bipartition(na, n - na)
        u = haar_random_unitary(bp.d, rng)
        ok, witness = check_pauli_product_preserving(u, bp)
        pe = pauli_entangling_power(u, bp).value
        if ok or witness is None or pe <= 1e-6:
            failures.append((trial, n, na, ok, pe))
    report(2, "Haar converse", not failures, started, "100 instances")
    assert not failures, failures[:3]


def test_criterion_3_projector_consistency():
    started = time.perf_counter()
    rng = np.random.default_rng(103)
    bp = Bipartition(1, 1)
    worst = 0.0
    for _ in range(20):
        u = haar_random_unitary(4, rng)
        worst = max(worst, abs(pauli_entangling_power(u, bp).value
                               - pauli_power_via_q(u, bp)))
    closed = abs(pauli_entangling_power(u_xx(), bp).value - 0.25)
    ok = worst <= 1e-10 and closed <= 1e-10
    report(3, "projector-form consistency", ok, started,
           f"max |exact - Q-form| = {worst:.2e}, closed-form dev = {closed:.2e}")
    assert ok


def test_criterion_4_haar_monte_carlo():
    started = time.perf_counter()
    rng = np.random.default_rng(104)
    results = []
    for d, da, n_samples in ((16, 4, 200), (4, 2, 200)):
        na = int(np.log2(da))
        bp = Bipartition(na, int(np.log2(d)) - na)
        vals = np.array([pauli_entangling_power(haar_random_unitary(d, rng), bp).value
                         for _ in range(n_samples)])
        sem = vals.std(ddof=1) / np.sqrt(n_samples)
        closed = haar_typical_value(d, da)
        results.append((d, da, vals.mean(), sem, closed))
    elapsed = time.perf_counter() - started
    ok = all(abs(m - c) <= 3 * s for _, _, m, s, c in results) and elapsed <= 300.0
    detail = "; ".join(f"d={d}: mean={m:.6f} vs {c:.6f} (3sem={3*s:.1e})"
                       for d, da, m, s, c in results)
    report(4, "Haar typical value Monte Carlo", ok, started, detail)
    for d, da, m, s, c in results:
        assert abs(m - c) <= 3 * s, (d, da, m, c, s)
    assert abs(haar_typical_value(16, 4) - 885600.0 / 1011712.0) < 1e-14
    assert elapsed <= 300.0


def test_criterion_5_subsystem_bound():
    started = time.perf_counter()
    rng = np.random.default_rng(105)
    failures = []
    for trial in range(50):
        n = 3 + trial % 2  # N in {3, 4}
        na = 1 + trial % (n - 1)
        bp = Bipartition(na, n - na)
        u = haar_random_unitary(bp.d, rng)
        pe = pauli_entangling_power(u, bp).value
        ba, bb = local_pauli_magic_bound(u, bp)
        if min(ba, bb) < pe - 1e-10:
            failures.append((trial, n, na, pe, ba, bb))
    ba, bb = local_pauli_magic_bound(u_xx(), Bipartition(1, 1))
    pe = pauli_entangling_power(u_xx(), Bipartition(1, 1)).value
    tight = abs(ba - 0.25) <= 1e-10 and abs(bb - 0.25) <= 1e-10 and abs(pe - 0.25) <= 1e-10
    report(5, "subsystem magic bound", not failures and tight, started,
           f"50 instances; equality case bounds = ({ba:.12f}, {bb:.12f})")
    assert not failures and tight


def test_criterion_6_invariance():
    started = time.perf_counter()
    rng = np.random.default_rng(106)
    bp = Bipartition(1, 2)
    u = haar_random_unitary(8, rng)
    ref = pauli_entangling_power(u, bp).value
    worst = 0.0
    for _ in range(20):
        c = clifford_to_dense(random_clifford(3, rng))
        loc = random_local_unitary(bp, rng)
        worst = max(worst, abs(pauli_entangling_power(c @ u @ loc, bp).value - ref))
    report(6, "Clifford/local invariance", worst <= 1e-10, started,
           f"max deviation {worst:.2e}")
    assert worst <= 1e-10


def test_criterion_7_coherence_and_recovery():
    started = time.perf_counter()
    rng = np.random.default_rng(107)
    worst = 0.0
    for _ in range(50):
        dim = int(2 ** rng.integers(1, 4))
        u = haar_random_unitary(dim, rng)
        worst = max(worst, abs(operator_coherence_2(u)
                               - operator_stabilizer_entropy(u, "linear")))
    bp = Bipartition(1, 1)
    cnot_val, _ = local_min_operator_magic(CNOT, bp, SearchConfig(restarts=8, seed=7))
    swap_val, _ = local_min_operator_magic(SWAP, bp, SearchConfig(restarts=8, seed=7))
    ok = worst <= 1e-14 and abs(cnot_val - 0.5) <= 1e-3 and abs(swap_val - 0.75) <= 1e-3
    report(7, "2-coherence identity and operator-entanglement recovery", ok, started,
           f"identity dev {worst:.1e}; CNOT -> {cnot_val:.6f}, SWAP -> {swap_val:.6f}")
    assert ok


def test_criterion_8_q_projector_suite():
    started = time.perf_counter()
    issues = []
    for n in (1, 2):
        d = float(2**n)
        q = q_projector_build(n)
        if np.linalg.norm(q @ q - q) > 1e-12:
            issues.append(f"Q^2 != Q at N={n}")
        if abs(np.trace(q).real - d * d) > 1e-10:
            issues.append(f"Tr Q != d^2 at N={n}")
        basis = q_projector_basis(n)
        if not np.allclose(basis.conj() @ basis.T, np.eye(int(d * d)), atol=1e-12):
            issues.append(f"basis not orthonormal at N={n}")
        if not np.allclose(q @ basis.T, basis.T, atol=1e-12):
            issues.append(f"basis not Q-fixed at N={n}")
        traces = q_permutation_traces(n)
        expected = {"e": d * d, "(ab)": d, "(ab)(cd)": d * d, "(abc)": 1.0, "(abcd)": d}
        for key, val in expected.items():
            if abs(traces[key] - val) > 1e-10:
                issues.append(f"trace {key} at N={n}: {traces[key]} != {val}")
    report(8, "Q projector suite", not issues, started, "; ".join(issues) or "N=1,2")
    assert not issues, issues


def test_criterion_9_mpu_agreement():
    started = time.perf_counter()
    tensors = [("chi1-T", mpu_single_gate(T_GATE)), ("cz-chain", mpu_cz_chain()),
               ("shift", mpu_shift()), ("zz-pi8", mpu_zz_chain(np.pi / 8))]
    worst = 0.0
    for name, tensor in tensors:
        for n in (4, 5, 6):
            dense = mpu_to_dense(tensor, n)
            bp = Bipartition(n // 2, n - n // 2)
            dev = abs(pauli_entangling_power(dense, bp).value
                      - pauli_power_mpu(tensor, n // 2, n - n // 2))
            worst = max(worst, dev)
    lam_ok = all(
        np.allclose(lambda_closure(n), (4.0**n) * q_projector_build(n), atol=1e-12)
        for n in (1, 2)
    )
    ok = worst <= 1e-8 and lam_ok
    report(9, "MPU transfer-matrix agreement", ok, started,
           f"max |finite - dense| = {worst:.2e}; closure identity: {lam_ok}")
    assert ok


def test_criterion_10_spin_chain_reproduction():
    from paulient.spinchain import run_sweep_experiment

    started = time.perf_counter()
    xyz = run_sweep_experiment("xyz", [0.0, 1.0], 8, mode="exact", seed=42)
    tfim = run_sweep_experiment("tfim", [0.0, 0.5], 8, mode="exact", seed=42)
    elapsed = time.perf_counter() - started
    ok = (
        all(r.converged for r in xyz + tfim)
        and xyz[1].mean_pe > xyz[0].mean_pe
        and xyz[1].mean_e > xyz[0].mean_e
        and tfim[1].mean_pe > tfim[0].mean_pe
        and tfim[1].mean_e > tfim[0].mean_e
        and elapsed <= 1800.0
    )
    report(
        10, "spin-chain long-time ordering", ok, started,
        f"XYZ PE {xyz[0].mean_pe:.4f}->{xyz[1].mean_pe:.4f}, "
        f"E {xyz[0].mean_e:.4f}->{xyz[1].mean_e:.4f}; "
        f"TFIM PE {tfim[0].mean_pe:.4f}->{tfim[1].mean_pe:.4f}, "
        f"E {tfim[0].mean_e:.4f}->{tfim[1].mean_e:.4f}; wall {elapsed:.0f}s",
    )
    assert ok


def test_criterion_11_magic_spot_values():
    started = time.perf_counter()
    rng = np.random.default_rng(111)
    t_state = T_GATE @ np.array([1.0, 1.0]) / np.sqrt(2)
    t_dev = abs(stabilizer_renyi_entropy(t_state, 2.0) - np.log2(4.0 / 3.0))
    stab_worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        s = clifford_to_dense(random_clifford(n, rng))[:, 0]
        stab_worst = max(stab_worst, abs(stabilizer_renyi_entropy(s, 2.0)))
    nl_worst = 0.0
    for _ in range(3):
        n = 3
        bp = Bipartition(1, 2)
        s = clifford_to_dense(random_clifford(n, rng))[:, 0]
        v = haar_random_unitary(bp.d_a, rng)
        w = haar_random_unitary(bp.d_b, rng)
        c = clifford_to_dense(random_clifford(n, rng))
        psi = np.kron(v, w) @ c @ s
        val, _ = nonlocal_stabilizer_entropy(
            psi, bp, 2.0,
            SearchConfig(restarts=3, seed=11,
                         unitary_seeds=((v.conj().T, w.conj().T),)),
        )
        nl_worst = max(nl_worst, val)
    ok = t_dev <= 1e-10 and stab_worst <= 1e-10 and nl_worst <= 1e-6
    report(11, "magic spot values", ok, started,
           f"m2(T) dev {t_dev:.1e}; stabilizer worst {stab_worst:.1e}; "
           f"seeded nonlocal worst {nl_worst:.1e}")
    assert ok
