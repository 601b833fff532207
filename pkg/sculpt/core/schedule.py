"""Contains classes describing how the check angle evolves over cycles"""

import logging
import math
from abc import ABC, abstractmethod

from sculpt.core.exception import ContractViolationError, NotPositiveError

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2


class BaseSchedule(ABC):
    """Abstract schedule mapping a cycle number to a check angle

    Cycles are numbered from 1. A cycle is one pass of checks over every
    clause in the instance's order.

    Methods
    -------
    theta(cycle)
        Returns the check angle used throughout ``cycle``
    cycles(n_clauses)
        Returns the number of cycles the schedule spans
    max_checks(n_clauses)
        Returns the number of passed checks that make a successful run
    """

    __name__ = "BaseSchedule"

    def __repr__(self):
        return f"{self.__name__}({self.describe()})"

    @abstractmethod
    def _theta(self, cycle: int) -> float:
        pass

    @abstractmethod
    def cycles(self, n_clauses: int) -> int:
        pass

    @abstractmethod
    def describe(self) -> str:
        """Compact text form, as accepted by :func:`parse_schedule`."""
        pass

    def max_checks(self, n_clauses: int) -> int:
        return self.cycles(n_clauses) * n_clauses

    @property
    def final_theta(self) -> float:
        """Angle of the last cycle."""
        return self._theta(self._last_cycle())

    def _last_cycle(self):
        return self.cycles(1)

    def theta(self, cycle: int) -> float:
        """The check angle for ``cycle``

        Raises
        ------
        ContractViolationError
            If ``cycle`` is below 1 or beyond the schedule.
        """
        if not 1 <= cycle <= self._last_cycle():
            raise ContractViolationError(
                f"Cycle {cycle} outside 1..{self._last_cycle()} of {self!r}"
            )
        return self._theta(cycle)


def _positive_int(value, name):
    value = int(value)
    if value <= 0:
        raise NotPositiveError(f"{name} must be positive")
    return value


def _check_angle(theta, name="theta0"):
    if not 0.0 <= theta <= HALF_PI:
        raise ContractViolationError(f"{name}={theta} outside [0, pi/2]")
    return float(theta)


class ConstantSchedule(BaseSchedule):
    """Fixed angle for a given number of passed checks

    This is the sculpting schedule: a successful run is ``n_full`` passed
    checks, which may end partway through a cycle. Every cycle holds at
    least one check, so cycles run from 1 to ``n_full``.
    """

    __name__ = "Constant"

    def __init__(self, theta0: float, n_full: int) -> None:
        """
        Parameters
        ----------
        theta0 : float
            The check angle, in radians
        n_full : int
            Passed checks making up a successful run
        """
        self._theta0 = _check_angle(theta0)
        self._n_full = _positive_int(n_full, "n_full")

    @property
    def theta0(self) -> float:
        return self._theta0

    @property
    def n_full(self) -> int:
        return self._n_full

    def _theta(self, cycle):
        return self._theta0

    def cycles(self, n_clauses):
        return -(-self._n_full // n_clauses)

    def max_checks(self, n_clauses):
        return self._n_full

    @property
    def final_theta(self):
        return self._theta0

    def describe(self):
        return f"constant:{self._theta0 / HALF_PI:g}:{self._n_full}"


class LinearSchedule(BaseSchedule):
    """Linear ramp ``theta_c = (pi/2) * c / c_tot``, ending at pi/2."""

    __name__ = "Linear"

    def __init__(self, c_tot: int) -> None:
        self._c_tot = _positive_int(c_tot, "c_tot")

    @property
    def c_tot(self) -> int:
        return self._c_tot

    def _theta(self, cycle):
        return HALF_PI * (cycle / self._c_tot)

    def cycles(self, n_clauses):
        return self._c_tot

    def _last_cycle(self):
        return self._c_tot

    def describe(self):
        return f"linear:{self._c_tot}"


class SqrtSchedule(BaseSchedule):
    """Square-root ramp ``theta_c = (pi/2) * sqrt(c / c_tot)``

    Front loads the failure probability compared with the linear ramp, so
    failing runs are abandoned sooner.
    """

    __name__ = "Sqrt"

    def __init__(self, c_tot: int) -> None:
        self._c_tot = _positive_int(c_tot, "c_tot")

    @property
    def c_tot(self) -> int:
        return self._c_tot

    def _theta(self, cycle):
        return HALF_PI * math.sqrt(cycle / self._c_tot)

    def cycles(self, n_clauses):
        return self._c_tot

    def _last_cycle(self):
        return self._c_tot

    def describe(self):
        return f"sqrt:{self._c_tot}"


class SteppedSchedule(BaseSchedule):
    """Hold ``theta0`` for ``c_hold`` cycles, then ramp linearly to pi/2 over ``c_ramp``."""

    __name__ = "Stepped"

    def __init__(self, theta0: float, c_hold: int, c_ramp: int) -> None:
        self._theta0 = _check_angle(theta0)
        self._c_hold = int(c_hold)
        if self._c_hold < 0:
            raise NotPositiveError("c_hold must be non-negative")
        self._c_ramp = _positive_int(c_ramp, "c_ramp")

    @property
    def theta0(self) -> float:
        return self._theta0

    @property
    def c_hold(self) -> int:
        return self._c_hold

    @property
    def c_ramp(self) -> int:
        return self._c_ramp

    def _theta(self, cycle):
        if cycle <= self._c_hold:
            return self._theta0
        if cycle == self._c_hold + self._c_ramp:
            return HALF_PI
        return self._theta0 + (HALF_PI - self._theta0) * (cycle - self._c_hold) / self._c_ramp

    def cycles(self, n_clauses):
        return self._c_hold + self._c_ramp

    def _last_cycle(self):
        return self._c_hold + self._c_ramp

    def describe(self):
        return f"stepped:{self._theta0 / HALF_PI:g}:{self._c_hold}:{self._c_ramp}"


def schedule_theta(schedule: BaseSchedule, cycle: int) -> float:
    return schedule.theta(cycle)


def parse_schedule(text: str) -> BaseSchedule:
    """Build a schedule from its compact text form.

    Angles are fractions of pi/2: ``linear:92``, ``sqrt:60``,
    ``constant:0.5:800``, ``stepped:0.56:37:38``.
    """
    parts = [p.strip() for p in text.strip().split(":")]
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "linear" and len(args) == 1:
            return LinearSchedule(int(args[0]))
        if kind == "sqrt" and len(args) == 1:
            return SqrtSchedule(int(args[0]))
        if kind == "constant" and len(args) == 2:
            return ConstantSchedule(float(args[0]) * HALF_PI, int(args[1]))
        if kind == "stepped" and len(args) == 3:
            return SteppedSchedule(float(args[0]) * HALF_PI, int(args[1]), int(args[2]))
    except ValueError as e:
        raise ContractViolationError(f"Bad schedule {text!r}: {e}") from e
    raise ContractViolationError(f"Unknown schedule {text!r}")
