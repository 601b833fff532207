import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from sculpt.core.exception import (
    CapacityError,
    CertainFailureError,
    IllConditionedError,
    StateConsumedError,
)
from sculpt.core.noise import MultiplicativeNoise
from sculpt.core.rebit import (
    HALF_PI,
    CheckOutcome,
    RebitState,
    SolutionSubspace,
    TargetSpec,
    fidelity_subspace,
    measure_all,
    target_state,
)
from sculpt.core.sat import (
    Assignment,
    Clause,
    checks_commute,
    evaluate,
    generate_instance,
    solutions,
)


def random_state(n, seed):
    amps = np.random.default_rng(seed).normal(size=1 << n)
    return RebitState(amps / np.linalg.norm(amps))


def pass_probability(state, clause, theta):
    try:
        return state.copy().clause_check(clause, theta)
    except CertainFailureError:
        return 0.0


def test_plus_is_normalized():
    state = RebitState.plus(6)
    assert state.norm() == pytest.approx(1.0, abs=1e-14)
    assert state.amps.shape == (64,)


def test_capacity():
    with pytest.raises(CapacityError):
        RebitState.plus(27)
    with pytest.raises(CapacityError):
        RebitState.plus(11, max_qubits=10)


def test_y_rotation_of_zero():
    state = RebitState.basis(Assignment((0,)))
    state.apply_y(0, HALF_PI)
    assert np.allclose(state.amps, [1 / math.sqrt(2), -1 / math.sqrt(2)])


def test_orthogonal_check_on_plus():
    state = RebitState.plus(4)
    p = state.clause_check(Clause.of(1, -3, 4), HALF_PI)
    assert p == pytest.approx(7 / 8, abs=1e-14)
    assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_zero_angle_is_identity():
    state = random_state(5, 1)
    before = state.amps.copy()
    assert state.clause_check(Clause.of(1, 2, 3), 0.0) == 1.0
    assert np.array_equal(state.amps, before)
    assert state.clause_check(Clause.of(-2, 5), 0.0, method="frame") == 1.0
    assert np.array_equal(state.amps, before)


def test_zero_angle_sample_draws_nothing():
    state = random_state(4, 2)
    rng = np.random.default_rng(3)
    noise = MultiplicativeNoise(0.1, rng=4)
    outcome, p = state.clause_check_sample(Clause.of(1, -2, 4), 0.0, rng, noise)
    assert (outcome, p) == (CheckOutcome.PASS, 1.0)
    assert rng.random() == np.random.default_rng(3).random()
    assert state.alive


def test_small_angle_removes_minus_pattern():
    # Just above zero the check still projects out |--->
    state = random_state(3, 5)
    minus = np.array([1.0, -1.0]) / math.sqrt(2)
    weight = float(np.einsum("cba,a,b,c->", state.amps.reshape(2, 2, 2), minus, minus, minus))
    p = state.clause_check(Clause.of(1, 2, 3), 1e-7)
    assert p == pytest.approx(1 - weight**2, abs=1e-6)


@pytest.mark.parametrize("theta", [0.3, 0.7, 1.2, HALF_PI])
@pytest.mark.parametrize("codes", [(1, 2, 3), (-1, 4, -5), (-2,), (5, -3)])
def test_projector_matches_frame(theta, codes):
    clause = Clause.of(*codes)
    a = random_state(5, 7)
    b = a.copy()
    pa = a.clause_check(clause, theta, method="projector")
    pb = b.clause_check(clause, theta, method="frame")
    assert pa == pytest.approx(pb, abs=1e-12)
    assert np.allclose(a.amps, b.amps, atol=1e-12)


def test_zero_noise_is_exact():
    clause = Clause.of(1, -2, 3)
    a = random_state(4, 3)
    b = a.copy()
    a.clause_check(clause, 0.8)
    b.clause_check(clause, 0.8, noise=MultiplicativeNoise(0.0, rng=1))
    assert np.array_equal(a.amps, b.amps)


def test_noise_changes_check():
    clause = Clause.of(1, -2, 3)
    a = random_state(4, 3)
    b = a.copy()
    a.clause_check(clause, 0.8)
    b.clause_check(clause, 0.8, noise=MultiplicativeNoise(0.05, rng=1))
    assert not np.allclose(a.amps, b.amps)
    assert b.norm() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("theta", [0.3, 0.6, 0.9, HALF_PI])
def test_target_state_passes_every_check(hand_instance, hand_solution, theta):
    state = target_state(TargetSpec(hand_solution, theta))
    for clause in hand_instance.clauses:
        assert state.clause_check(clause, theta) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("theta", [0.3, 0.6, 0.9, HALF_PI])
def test_wrong_product_forms_fail(usa8, theta):
    solution = solutions(usa8)[0]
    for index in range(2**8):
        a = Assignment.from_index(index, 8)
        if a == solution:
            continue
        state = target_state(TargetSpec(a, theta))
        assert min(pass_probability(state, c, theta) for c in usa8.clauses) < 1 - 1e-9


def test_target_states_pass_generated_instances(usa_corpus):
    for instance in usa_corpus:
        solution = solutions(instance)[0]
        for theta in (0.3, 0.6, 0.9, HALF_PI):
            state = target_state(TargetSpec(solution, theta))
            for clause in instance.clauses:
                assert state.clause_check(clause, theta) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 5, 12, 16])
def test_overlap_law(n):
    a = Assignment.from_index(0b1011001110110101 & ((1 << n) - 1), n)
    theta, eps = 0.6, 0.05
    state = target_state(TargetSpec(a, theta + eps))
    assert state.fidelity(TargetSpec(a, theta)) == pytest.approx(
        math.cos(eps / 2) ** (2 * n), abs=1e-12
    )


def test_overlap_small_angle():
    n, eps = 10, 1e-2
    a = Assignment.from_index(0b1100101011, n)
    state = target_state(TargetSpec(a, 0.5 + eps))
    fidelity = state.fidelity(TargetSpec(a, 0.5))
    assert fidelity == pytest.approx(1 - n / 4 * eps**2, abs=n**2 * eps**4)


def test_overlap_matches_materialized_target():
    spec = TargetSpec(Assignment.from_string("0110100"), 0.7)
    state = random_state(7, 11)
    assert state.overlap(spec) == pytest.approx(
        float(np.dot(state.amps, target_state(spec).amps)), abs=1e-13
    )


def test_plus_overlap_with_target():
    n, theta = 9, 0.8
    spec = TargetSpec(Assignment.from_index(300, n), theta)
    assert RebitState.plus(n).fidelity(spec) == pytest.approx(math.cos(theta / 2) ** (2 * n))


def test_certain_failure_leaves_state():
    state = RebitState.basis(Assignment.from_string("000"))
    before = state.amps.copy()
    with pytest.raises(CertainFailureError):
        state.clause_check(Clause.of(1, 2, 3), HALF_PI)
    assert np.array_equal(state.amps, before)
    with pytest.raises(CertainFailureError):
        state.clause_check(Clause.of(1, 2, 3), HALF_PI, method="frame")
    assert np.allclose(state.amps, before, atol=1e-15)


def test_failed_sample_consumes_register():
    state = RebitState.basis(Assignment.from_string("000"))
    outcome, p = state.clause_check_sample(Clause.of(1, 2, 3), HALF_PI, np.random.default_rng(0))
    assert outcome is CheckOutcome.FAIL
    assert p == 0.0
    assert not state.alive
    with pytest.raises(StateConsumedError):
        state.probabilities()


def test_measure_consumes_register():
    state = RebitState.basis(Assignment.from_string("0110"))
    assert state.measure(np.random.default_rng(0)) == Assignment.from_string("0110")
    with pytest.raises(StateConsumedError):
        state.clause_check(Clause.of(1), 0.5)


def test_sample_statistics():
    spec = TargetSpec(Assignment.from_string("10"), 0.9)
    state = target_state(spec)
    shots = state.sample(np.random.default_rng(5), 20000)
    freq = np.bincount(shots, minlength=4) / shots.shape[0]
    assert np.allclose(freq, state.probabilities(), atol=0.015)
    assert state.alive


def projection_oracle(state, specs):
    """Squared norm of the orthogonal projection onto the span of the targets."""
    basis = np.column_stack([target_state(s).amps for s in specs])
    q, _ = np.linalg.qr(basis)
    return float(np.sum((q.T @ state.amps) ** 2))


@pytest.mark.parametrize("theta", [0.4, 0.9, HALF_PI])
def test_subspace_fidelity_oracle(multi8, theta):
    found = solutions(multi8)
    assert len(found) == 2
    subspace = SolutionSubspace(found, theta)
    for seed in range(5):
        state = random_state(8, seed)
        assert subspace.fidelity(state) == pytest.approx(
            projection_oracle(state, subspace.specs), abs=1e-10
        )


def test_subspace_of_one_is_plain_fidelity(hand_solution):
    state = random_state(3, 2)
    subspace = SolutionSubspace([hand_solution], 0.5)
    assert subspace.fidelity(state) == pytest.approx(state.fidelity(TargetSpec(hand_solution, 0.5)))


def test_subspace_ill_conditioned():
    found = [Assignment.from_string("101"), Assignment.from_string("100")]
    with pytest.raises(IllConditionedError):
        SolutionSubspace(found, 0.0)


def test_snapshot(tmp_path):
    state = random_state(5, 4)
    path = tmp_path / "state.bin"
    state.dump_snapshot(path, theta=0.25, step=17)
    loaded, theta, step = RebitState.load_snapshot(path)
    assert np.array_equal(loaded.amps, state.amps)
    assert (theta, step) == (0.25, 17)


def test_noisy_projector_matches_frame():
    clause = Clause.of(-4, 2, 6)
    a = random_state(6, 8)
    b = a.copy()
    pa = a.clause_check(clause, 0.9, noise=MultiplicativeNoise(0.05, rng=12))
    pb = b.clause_check(clause, 0.9, noise=MultiplicativeNoise(0.05, rng=12), method="frame")
    assert pa == pytest.approx(pb, abs=1e-12)
    assert np.allclose(a.amps, b.amps, atol=1e-12)


def test_worker_thread_kernels_match_main_thread():
    instance = generate_instance(14, 2)

    def run():
        state = RebitState.plus(14)
        probs = [state.clause_check(c, 0.6) for c in instance.clauses]
        return probs, state.amps.copy()

    probs, amps = run()
    with ThreadPoolExecutor(max_workers=1) as pool:
        worker_probs, worker_amps = pool.submit(run).result()
    assert probs == worker_probs
    assert np.array_equal(amps, worker_amps)


def test_sampled_orthogonal_check_on_plus():
    rng = np.random.default_rng(21)
    trials = 4000
    passes = sum(
        RebitState.plus(3).clause_check_sample(Clause.of(1, -2, 3), HALF_PI, rng)[0]
        is CheckOutcome.PASS
        for _ in range(trials)
    )
    sigma = math.sqrt(trials * 7 / 8 * 1 / 8)
    assert abs(passes - trials * 7 / 8) < 4 * sigma


@pytest.mark.parametrize("theta", [0.4, 1.0])
def test_measured_marginals(theta):
    a = Assignment.from_string("1001")
    spec = TargetSpec(a, theta)
    rng = np.random.default_rng(9)
    trials = 3000
    agree = np.zeros(4)
    for _ in range(trials):
        agree += np.array(measure_all(target_state(spec), rng).bits) == np.array(a.bits)
    assert np.allclose(agree / trials, (1 + math.sin(theta)) / 2, atol=0.04)


def test_disjoint_checks_commute():
    first, second = Clause.of(1, -2, 3), Clause.of(-4, 5, 6)
    assert checks_commute(first, second)
    a = random_state(6, 13)
    b = a.copy()
    pa = a.clause_check(first, 0.5) * a.clause_check(second, 1.1)
    pb = b.clause_check(second, 1.1) * b.clause_check(first, 0.5)
    assert pa == pytest.approx(pb, abs=1e-14)
    assert np.allclose(a.amps, b.amps, atol=1e-14)


def test_conflicting_polarity_checks_do_not_commute():
    first, second = Clause.of(1, 2, 3), Clause.of(-1, 4, 5)
    assert not checks_commute(first, second)
    a = random_state(5, 14)
    b = a.copy()
    a.clause_check(first, 0.7)
    a.clause_check(second, 0.7)
    b.clause_check(second, 0.7)
    b.clause_check(first, 0.7)
    assert not np.allclose(a.amps, b.amps, atol=1e-6)


def test_orthogonal_checks_evaluate_assignments(usa8):
    for index in range(2**8):
        a = Assignment.from_index(index, 8)
        probs = [pass_probability(RebitState.basis(a), c, HALF_PI) for c in usa8.clauses]
        assert all(p == pytest.approx(round(p), abs=1e-12) for p in probs)
        assert evaluate(usa8, a) == all(p > 0.5 for p in probs)


def test_norm_drift_over_many_checks(usa8):
    state = RebitState.plus(8)
    clauses = usa8.clauses
    for i in range(10**4):
        state.clause_check(clauses[i % len(clauses)], 0.6)
    assert state.norm() == pytest.approx(1.0, abs=1e-10)


def test_repeated_check_passes():
    clause = Clause.of(2, -3, 5)
    state = random_state(6, 15)
    assert state.clause_check(clause, 0.7) < 1.0
    assert state.clause_check(clause, 0.7) == pytest.approx(1.0, abs=1e-12)
    state.clause_check(Clause.of(1, -4, 6), 0.3)
    assert state.clause_check(clause, 0.7) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("count", [3, 4])
@pytest.mark.parametrize("theta", [0.9, HALF_PI])
def test_subspace_fidelity_many_solutions(count, theta):
    instance = generate_instance(8, 40 + count, target_ns=count)
    found = solutions(instance)
    assert len(found) == count
    specs = [TargetSpec(s, theta) for s in found]
    for seed in range(3):
        state = random_state(8, seed)
        assert fidelity_subspace(state, found, theta) == pytest.approx(
            projection_oracle(state, specs), abs=1e-10
        )


@pytest.mark.slow
def test_cycle_speed_at_twenty_qubits():
    instance = generate_instance(20, 3)
    state = RebitState.plus(20)
    state.copy().clause_check(instance.clauses[0], 0.5)
    start = time.perf_counter()
    for _ in range(100):
        for clause in instance.clauses:
            state.clause_check(clause, 0.5 * HALF_PI)
    assert time.perf_counter() - start < 60.0
    assert state.norm() == pytest.approx(1.0, abs=1e-9)
