import io
import logging
import math

import numpy as np
import pytest
from scipy import stats

from sculpt.core.exception import ContractViolationError, NotAProbabilityError
from sculpt.core.inference import (
    MeasurementTally,
    detect_ambiguous,
    gaussian_exponent,
    infer_assignment,
    p_wrong_exact,
    p_wrong_gaussian,
    readout_bias,
    required_repetitions,
)
from sculpt.core.rebit import HALF_PI, RebitState, TargetSpec, target_state
from sculpt.core.sat import Assignment, solutions


def test_p_wrong_exact():
    assert p_wrong_exact(3, 0.8) == pytest.approx(0.104, abs=1e-12)
    assert p_wrong_exact(1, 0.7) == pytest.approx(0.3)
    assert p_wrong_exact(9, 1.0) == 0.0


def test_p_wrong_needs_odd_runs():
    with pytest.raises(ContractViolationError):
        p_wrong_exact(4, 0.8)
    with pytest.raises(ContractViolationError):
        p_wrong_exact(3, 0.5)
    with pytest.raises(NotAProbabilityError):
        p_wrong_exact(3, 1.2)


def test_p_wrong_decreases():
    values = [p_wrong_exact(R, 0.6) for R in range(1, 202, 2)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_gaussian_close_to_exact():
    exact = p_wrong_exact(201, 0.6)
    assert p_wrong_gaussian(201, 0.6) == pytest.approx(exact, rel=0.1)


def test_gaussian_exponent_in_angle():
    theta, R = 0.5, 99
    p = readout_bias(theta)
    assert gaussian_exponent(R, p) == pytest.approx(math.sqrt(R / 2) * math.tan(theta))


def test_gaussian_warns_outside_range(caplog):
    with caplog.at_level(logging.WARNING, logger="sculpt.core.inference"):
        p_wrong_gaussian(5, 0.8)
    assert "validity" in caplog.text


def test_required_repetitions_right_angle():
    assert required_repetitions(100, HALF_PI) == 1


def test_required_repetitions_is_smallest():
    n, theta = 50, 0.4
    R = required_repetitions(n, theta)
    p = readout_bias(theta)
    assert R % 2 == 1
    assert p_wrong_exact(R, p) < 1 / n
    assert R == 1 or p_wrong_exact(R - 2, p) >= 1 / n


def test_required_repetitions_grows_with_log_n():
    ns = [2**k for k in range(3, 15)]
    Rs = [required_repetitions(n, 0.4) for n in ns]
    fit = stats.linregress(np.log(ns), Rs)
    assert fit.rvalue**2 > 0.98


def test_required_repetitions_scales_with_cot_squared():
    n = 1000
    r_small = required_repetitions(n, 0.3)
    r_large = required_repetitions(n, 0.6)
    expected = (1 / math.tan(0.3) ** 2) / (1 / math.tan(0.6) ** 2)
    assert r_small / r_large == pytest.approx(expected, rel=0.15)


def test_required_repetitions_gaussian():
    assert abs(required_repetitions(200, 0.5, "gaussian") - required_repetitions(200, 0.5)) <= 6
    with pytest.raises(ContractViolationError):
        required_repetitions(200, 0.5, "poisson")


def test_infer_assignment():
    tally = MeasurementTally(3, 0.6, runs=5, ones=[5, 1, 3])
    assignment, confidence = infer_assignment(tally)
    assert assignment == Assignment.from_string("101")
    assert confidence[0] > confidence[2]
    assert np.all((confidence >= 0) & (confidence <= 1))


def test_unanimous_right_angle_confidence():
    tally = MeasurementTally(4, HALF_PI, runs=3, ones=[3, 3, 3, 3])
    assignment, confidence = infer_assignment(tally)
    assert str(assignment) == "1111"
    assert np.allclose(confidence, 1.0)


def test_infer_needs_odd_runs_and_angle():
    with pytest.raises(ContractViolationError):
        infer_assignment(MeasurementTally(2, 0.5, runs=4, ones=[1, 2]))
    with pytest.raises(ContractViolationError):
        infer_assignment(MeasurementTally(2, runs=3, ones=[1, 2]))


def test_infer_is_permutation_equivariant():
    ones = np.array([7, 2, 9, 4, 5, 0])
    perm = np.array([3, 0, 5, 1, 4, 2])
    a, ca = infer_assignment(MeasurementTally(6, 0.4, runs=9, ones=ones))
    b, cb = infer_assignment(MeasurementTally(6, 0.4, runs=9, ones=ones[perm]))
    assert b.bits == tuple(a.bits[i] for i in perm)
    assert np.allclose(cb, ca[perm])


def test_majority_vote_on_target_measurements():
    n, theta = 12, 0.5
    solution = Assignment.from_index(2741, n)
    state = target_state(TargetSpec(solution, theta))
    rng = np.random.default_rng(17)
    R = required_repetitions(n, theta)
    expected = (1 - p_wrong_exact(R, readout_bias(theta))) ** n
    trials = 200
    hits = 0
    for _ in range(trials):
        tally = MeasurementTally(n, theta)
        for index in state.sample(rng, R):
            tally.add(Assignment.from_index(int(index), n))
        hits += infer_assignment(tally)[0] == solution
    assert expected > (1 - 1 / n) ** n
    assert abs(hits / trials - expected) < 3 * math.sqrt(expected * (1 - expected) / trials) + 0.01


def test_detect_ambiguous():
    tally = MeasurementTally(3, 0.9, runs=101, ones=[90, 50, 10])
    assert detect_ambiguous(tally) == {1}
    assert detect_ambiguous(tally, ignore=[1]) == set()
    with pytest.raises(ContractViolationError):
        detect_ambiguous(MeasurementTally(3, 0.9, runs=1, ones=[1, 0, 1]))


def test_unique_solution_tally_not_ambiguous():
    n, theta = 8, 0.7
    state = target_state(TargetSpec(Assignment.from_index(77, n), theta))
    tally = MeasurementTally(n, theta)
    for index in state.sample(np.random.default_rng(2), 301):
        tally.add(Assignment.from_index(int(index), n))
    assert detect_ambiguous(tally) == set()


def test_tally_csv_round_trip():
    tally = MeasurementTally(3, 0.5, runs=7, ones=[7, 0, 4])
    out = io.StringIO()
    tally.to_csv(out, ["seed 3"])
    again = MeasurementTally.from_csv(out.getvalue(), theta=0.5)
    assert again.runs == 7
    assert list(again.ones) == [7, 0, 4]


@pytest.mark.parametrize(
    "text",
    [
        "qubit,ones,runs\n0,1,3\n",
        "qubit_index,ones,runs\n0,1,3\n1,2,5\n",
        "qubit_index,ones,runs\n0,1,3\n2,2,3\n",
        "qubit_index,ones,runs\n0,4,3\n",
    ],
)
def test_tally_csv_errors(text):
    with pytest.raises(ContractViolationError):
        MeasurementTally.from_csv(text)


def test_tally_add_checks_width():
    tally = MeasurementTally(3)
    with pytest.raises(ContractViolationError):
        tally.add([1, 0])


def test_confidence_is_two_sided():
    theta = 0.6
    q = 1 - readout_bias(theta)
    tally = MeasurementTally(2, theta, runs=5, ones=[3, 0])
    _, confidence = infer_assignment(tally)
    pmf = [math.comb(5, k) * q**k * (1 - q) ** (5 - k) for k in range(6)]
    for i, majority in enumerate((3, 5)):
        upper = sum(pmf[majority:])
        lower = sum(pmf[: majority + 1])
        assert confidence[i] == pytest.approx(1 - min(1.0, 2 * min(upper, lower)), abs=1e-12)


def test_ambiguous_qubits_of_two_solution_register(multi8):
    theta = 1.0
    first, second = solutions(multi8)
    amps = target_state(TargetSpec(first, theta)).amps + target_state(TargetSpec(second, theta)).amps
    state = RebitState(amps / np.linalg.norm(amps))
    tally = MeasurementTally(8, theta)
    for index in state.sample(np.random.default_rng(17), 401):
        tally.add(Assignment.from_index(int(index), 8))
    differing = {i for i in range(8) if first[i] != second[i]}
    assert detect_ambiguous(tally) == differing
