"""Contains the per-check trajectory ledger and expected-cost accounting"""

import csv
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from sculpt.core.exception import ContractViolationError, NotPositiveError

logger = logging.getLogger(__name__)

LEDGER_COLUMNS = ("check_index", "cycle", "clause_id", "theta", "p_pass", "cum_success", "fidelity")


class TrajectoryLedger:
    """Record of a trajectory conditioned on passing every check

    One row per clause check. ``p_fail(i)`` is the probability that a run
    aborts at check ``i`` specifically; together with the success
    probability these sum to one.

    Attributes
    ----------
    n : int
        Qubit count of the trajectory
    schedule : BaseSchedule
        The schedule the trajectory followed
    truncated : bool
        Whether a check annihilated the state (certain failure)
    final_state : RebitState or None
        The register after the last check, when kept
    """

    def __init__(self, n: int, schedule=None) -> None:
        self.n = n
        self.schedule = schedule
        self.truncated = False
        self.final_state = None
        self._cycle = []
        self._clause_id = []
        self._theta = []
        self._p_pass = []
        self._fidelity = []
        self._cum = 1.0
        self._cum_success = []

    def __repr__(self):
        return f"TrajectoryLedger(checks={len(self)}, p_success={self.p_success:.3e})"

    def __len__(self):
        return len(self._p_pass)

    def append(self, cycle, clause_id, theta, p_pass, fidelity=None) -> None:
        if not 0.0 <= p_pass <= 1.0 + 1e-12:
            raise ContractViolationError(f"Pass probability {p_pass} outside [0, 1]")
        self._cum *= min(p_pass, 1.0)
        self._cycle.append(cycle)
        self._clause_id.append(clause_id)
        self._theta.append(theta)
        self._p_pass.append(p_pass)
        self._cum_success.append(self._cum)
        self._fidelity.append(np.nan if fidelity is None else fidelity)

    def truncate(self, cycle, clause_id, theta) -> None:
        """Close the ledger with a certain-failure check."""
        self.append(cycle, clause_id, theta, 0.0)
        self.truncated = True
        logger.info(f"Trajectory truncated by certain failure at check {len(self)}")

    @property
    def check_index(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def cycle(self) -> np.ndarray:
        return np.asarray(self._cycle, dtype=np.int64)

    @property
    def clause_id(self) -> np.ndarray:
        return np.asarray(self._clause_id, dtype=np.int64)

    @property
    def theta(self) -> np.ndarray:
        return np.asarray(self._theta, dtype=np.float64)

    @property
    def p_pass(self) -> np.ndarray:
        return np.asarray(self._p_pass, dtype=np.float64)

    @property
    def cum_success(self) -> np.ndarray:
        return np.asarray(self._cum_success, dtype=np.float64)

    @property
    def fidelity(self) -> np.ndarray:
        return np.asarray(self._fidelity, dtype=np.float64)

    @property
    def p_success(self) -> float:
        return self._cum

    @property
    def p_fail(self) -> np.ndarray:
        """Abort mass per check, ``(prod_{j<i} p_pass(j)) * (1 - p_pass(i))``."""
        cum = self.cum_success
        before = np.concatenate(([1.0], cum[:-1]))
        return before * (1.0 - np.minimum(self.p_pass, 1.0))

    def conservation_error(self) -> float:
        return abs(float(np.sum(self.p_fail)) + self.p_success - 1.0)

    def fidelity_per_cycle(self) -> np.ndarray:
        """Fidelity at the end of each complete cycle."""
        cycles = self.cycle
        if len(cycles) == 0:
            return np.array([])
        last = np.flatnonzero(np.diff(cycles))
        ends = np.concatenate((last, [len(cycles) - 1]))
        if self.schedule is not None and len(self._clause_id):
            # Drop a trailing partial cycle
            n_clauses = max(self._clause_id) + 1
            if (ends[-1] + 1) % n_clauses:
                ends = ends[:-1]
        return self.fidelity[ends]

    def cumulative_failure_cost(self) -> np.ndarray:
        """Running contribution of failed runs to the expected total checks.

        Entry ``i`` is ``sum_{j<=i} j * p_fail(j) / P_success``: the checks
        spent on runs that abort by check ``i``, per eventual success.
        """
        if self.p_success <= 0.0:
            raise NotPositiveError("Success probability is zero")
        return np.cumsum(self.check_index * self.p_fail) / self.p_success

    def rows(self):
        for row in zip(
            self.check_index, self._cycle, self._clause_id, self._theta,
            self._p_pass, self._cum_success, self._fidelity,
        ):
            yield row

    def to_csv(self, outfile, header_lines=()) -> None:
        """Write the ledger as CSV to an open text stream.

        Lines of ``header_lines`` are written first, each prefixed ``#``.
        """
        for line in header_lines:
            outfile.write(f"# {line}\n")
        writer = csv.writer(outfile, lineterminator="\n")
        writer.writerow(LEDGER_COLUMNS)
        for i, cycle, clause_id, theta, p, cum, fid in self.rows():
            writer.writerow(
                [int(i), cycle, clause_id, repr(float(theta)), repr(float(p)),
                 repr(float(cum)), "" if math.isnan(fid) else repr(float(fid))]
            )


@dataclass(frozen=True)
class CostSummary:
    """Expected clause checks to the first successful run

    ``c_total = n_checks_success + F / p_success`` with
    ``F = sum_i i * p_fail(i)``. For a constant angle, ``approx_c_total``
    uses the overlap bound ``(sec^2(theta/2))^n`` in place of the exact
    success probability.
    """

    n_checks_success: int
    p_success: float
    F: float
    expected_tries: float
    c_total: float
    approx_c_total: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def expected_cost(ledger: TrajectoryLedger) -> CostSummary:
    """Exact expected cost of a ledger.

    Raises
    ------
    ContractViolationError
        If the ledger was truncated.
    NotPositiveError
        If the success probability is zero.
    """
    if ledger.truncated:
        raise ContractViolationError("Cannot cost a truncated ledger")
    p = ledger.p_success
    if p <= 0.0:
        raise NotPositiveError("Success probability is zero")
    F = float(np.sum(ledger.check_index * ledger.p_fail))
    n_checks = len(ledger)
    approx = None
    theta0 = getattr(ledger.schedule, "theta0", None)
    if theta0 is not None and getattr(ledger.schedule, "n_full", None) is not None:
        approx = n_checks + F * (1.0 / math.cos(theta0 / 2) ** 2) ** ledger.n
    return CostSummary(
        n_checks_success=n_checks,
        p_success=p,
        F=F,
        expected_tries=1.0 / p,
        c_total=n_checks + F / p,
        approx_c_total=approx,
    )
