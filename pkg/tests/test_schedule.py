import math

import pytest

from sculpt.core.exception import ContractViolationError, NotPositiveError
from sculpt.core.schedule import (
    HALF_PI,
    ConstantSchedule,
    LinearSchedule,
    SqrtSchedule,
    SteppedSchedule,
    parse_schedule,
    schedule_theta,
)


def test_sqrt_ends_at_half_pi():
    assert schedule_theta(SqrtSchedule(60), 60) == HALF_PI
    assert SqrtSchedule(60).theta(15) == pytest.approx(HALF_PI / 2)


def test_linear_midpoint():
    assert schedule_theta(LinearSchedule(92), 46) == pytest.approx(math.pi / 4)
    assert LinearSchedule(92).final_theta == HALF_PI


def test_stepped():
    s = SteppedSchedule(0.56 * HALF_PI, 37, 38)
    assert s.theta(1) == pytest.approx(0.56 * HALF_PI)
    assert s.theta(37) == pytest.approx(0.56 * HALF_PI)
    assert s.theta(75) == HALF_PI
    assert s.theta(37) < s.theta(38) < s.theta(74) < HALF_PI
    assert s.cycles(102) == 75


def test_constant_counts_checks():
    s = ConstantSchedule(0.5, 250)
    assert s.max_checks(102) == 250
    assert s.cycles(102) == 3
    assert s.theta(250) == 0.5
    with pytest.raises(ContractViolationError):
        s.theta(251)
    with pytest.raises(ContractViolationError):
        s.theta(0)


@pytest.mark.parametrize("cycle", [0, 93])
def test_cycle_out_of_range(cycle):
    with pytest.raises(ContractViolationError):
        LinearSchedule(92).theta(cycle)


def test_invalid_parameters():
    with pytest.raises(NotPositiveError):
        LinearSchedule(0)
    with pytest.raises(ContractViolationError):
        ConstantSchedule(2.0, 10)


@pytest.mark.parametrize(
    "text, kind",
    [
        ("linear:92", LinearSchedule),
        ("sqrt:60", SqrtSchedule),
        ("constant:0.5:800", ConstantSchedule),
        ("stepped:0.56:37:38", SteppedSchedule),
    ],
)
def test_parse_schedule(text, kind):
    s = parse_schedule(text)
    assert isinstance(s, kind)
    assert s.describe() == text


def test_parse_schedule_angles_are_fractions():
    assert parse_schedule("constant:0.5:800").theta0 == pytest.approx(HALF_PI / 2)


@pytest.mark.parametrize("text", ["linear", "ramp:10", "linear:x", "stepped:0.5:3"])
def test_parse_schedule_rejects(text):
    with pytest.raises(ContractViolationError):
        parse_schedule(text)
