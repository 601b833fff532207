"""Conditioned and sampled walks of clause checks over a schedule"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from sculpt.core import config
from sculpt.core.exception import (
    CertainFailureError,
    ContractViolationError,
    DivergenceError,
    StateConsumedError,
)
from sculpt.core.ledger import TrajectoryLedger
from sculpt.core.noise import BaseNoise, NoNoise
from sculpt.core.rebit import CheckOutcome, RebitState, SolutionSubspace, TargetSpec
from sculpt.core.sat import (
    Assignment,
    SatInstance,
    generate_instance,
    shuffled,
    solutions as all_solutions,
)
from sculpt.core.schedule import BaseSchedule, ConstantSchedule

logger = logging.getLogger(__name__)

# Smallest variable count the instance generator accepts
_MIN_PILOT_N = 4


class FidelityProbe:
    """Fidelity of a register with the target of a set of solutions

    One solution uses the direct overlap; several use the span of their
    target states, with the Gram factorization cached per angle.
    """

    def __init__(self, solutions: Sequence[Assignment], condition_limit=config.CONDITION_LIMIT):
        self._solutions = list(solutions)
        if not self._solutions:
            raise ContractViolationError("Fidelity needs at least one known solution")
        self._condition_limit = condition_limit
        self._subspaces = {}

    @property
    def solutions(self) -> list:
        return list(self._solutions)

    def __call__(self, state: RebitState, theta: float) -> float:
        if len(self._solutions) == 1:
            return state.fidelity(TargetSpec(self._solutions[0], theta))
        if theta not in self._subspaces:
            self._subspaces[theta] = SolutionSubspace(
                self._solutions, theta, self._condition_limit
            )
        return self._subspaces[theta].fidelity(state)


def _walk(instance: SatInstance, schedule: BaseSchedule):
    """Yield ``(cycle, clause_id, clause, theta)`` for every check of a run."""
    m = len(instance)
    if m == 0:
        return
    total = schedule.max_checks(m)
    done = 0
    for cycle in range(1, schedule.cycles(m) + 1):
        theta = schedule.theta(cycle)
        for clause_id, clause in enumerate(instance.clauses):
            if done == total:
                return
            done += 1
            yield cycle, clause_id, clause, theta


def run_trajectory_deterministic(
    instance: SatInstance,
    schedule: BaseSchedule,
    record_fidelity: bool = False,
    solutions: Optional[Sequence[Assignment]] = None,
    noise: Optional[BaseNoise] = None,
    method: str = "projector",
    max_qubits: int = config.MAX_QUBITS,
    keep_state: bool = False,
) -> TrajectoryLedger:
    """Walk the schedule always taking the pass branch.

    Parameters
    ----------
    instance : SatInstance
        The instance; its clause order is used in every cycle
    schedule : BaseSchedule
        The angle schedule
    record_fidelity : bool, optional
        Record fidelity with the target of the current cycle's angle after
        every check, by default False
    solutions : sequence of Assignment, optional
        Known solutions; enumerated when fidelity is recorded and none are
        given
    noise : BaseNoise, optional
        Rotation noise, by default none
    keep_state : bool, optional
        Attach the final register to the ledger as ``final_state``

    Returns
    -------
    TrajectoryLedger
        Truncated with a certain-failure marker if a check cannot pass.
    """
    noise = noise or NoNoise()
    probe = None
    if record_fidelity:
        if solutions is None:
            solutions = all_solutions(instance)
        probe = FidelityProbe(solutions)

    state = RebitState.plus(instance.n, max_qubits)
    ledger = TrajectoryLedger(instance.n, schedule)
    for cycle, clause_id, clause, theta in _walk(instance, schedule):
        try:
            p_pass = state.clause_check(clause, theta, noise, method=method)
        except CertainFailureError:
            ledger.truncate(cycle, clause_id, theta)
            return ledger
        fidelity = probe(state, theta) if probe is not None else None
        ledger.append(cycle, clause_id, theta, p_pass, fidelity)
    if keep_state:
        ledger.final_state = state
    logger.debug(f"Deterministic run on {instance!r} with {schedule!r}: {ledger!r}")
    return ledger


@dataclass
class TrajectoryOutcome:
    """Result of one sampled run: a live register on success, else the abort check."""

    success: bool
    checks: int
    state: Optional[RebitState] = None
    abort_index: Optional[int] = None


def run_trajectory_sampled(
    instance: SatInstance,
    schedule: BaseSchedule,
    noise: Optional[BaseNoise],
    rng: np.random.Generator,
    method: str = "projector",
    max_qubits: int = config.MAX_QUBITS,
) -> TrajectoryOutcome:
    """Walk the schedule sampling every check; stop at the first failure.

    The failing check is counted in ``checks``.
    """
    noise = noise or NoNoise()
    state = RebitState.plus(instance.n, max_qubits)
    checks = 0
    for cycle, clause_id, clause, theta in _walk(instance, schedule):
        checks += 1
        outcome, _ = state.clause_check_sample(clause, theta, rng, noise, method=method)
        if outcome is CheckOutcome.FAIL:
            return TrajectoryOutcome(False, checks, abort_index=checks)
    return TrajectoryOutcome(True, checks, state=state)


class TrajectoryCache:
    """Sampler of noiseless runs from one conditioned ledger

    Without noise every run follows the same conditioned state sequence, so
    the abort check is drawn by inverting the cumulative success curve and a
    successful run ends in the cached final register. The cached register is
    sampled without being consumed.
    """

    def __init__(
        self,
        instance: SatInstance,
        schedule: BaseSchedule,
        method: str = "projector",
        max_qubits: int = config.MAX_QUBITS,
    ) -> None:
        self.instance = instance
        self.schedule = schedule
        self.ledger = run_trajectory_deterministic(
            instance, schedule, method=method, max_qubits=max_qubits, keep_state=True
        )
        self._neg_cum = -self.ledger.cum_success

    @property
    def p_success(self) -> float:
        return self.ledger.p_success

    def draw(self, rng: np.random.Generator) -> TrajectoryOutcome:
        """One run: a single uniform draw picks success or the abort check."""
        u = rng.random()
        if self.ledger.truncated or u >= self.ledger.p_success:
            # First check whose cumulative success falls to u or below
            i = int(np.searchsorted(self._neg_cum, -u, side="left"))
            i = min(i, len(self.ledger) - 1)
            return TrajectoryOutcome(False, i + 1, abort_index=i + 1)
        return TrajectoryOutcome(True, len(self.ledger), state=self.ledger.final_state)

    def measure(self, rng: np.random.Generator) -> Assignment:
        state = self.ledger.final_state
        if state is None:
            raise StateConsumedError("No register survives a truncated run")
        return Assignment.from_index(int(state.sample(rng, 1)[0]), state.n)


def fidelity_trace(
    instance: SatInstance,
    theta: float,
    checks: int,
    solutions: Optional[Sequence[Assignment]] = None,
    noise: Optional[BaseNoise] = None,
    method: str = "projector",
) -> np.ndarray:
    """Fidelity with the target before and after each of ``checks`` conditioned checks."""
    ledger = run_trajectory_deterministic(
        instance,
        ConstantSchedule(theta, checks),
        record_fidelity=True,
        solutions=solutions,
        noise=noise,
        method=method,
    )
    probe = FidelityProbe(solutions if solutions is not None else all_solutions(instance))
    start = probe(RebitState.plus(instance.n), theta)
    return np.concatenate(([start], ledger.fidelity))


def n_hifid(
    instance: SatInstance,
    theta: float,
    threshold: float = config.HIFID_THRESHOLD,
    solutions: Optional[Sequence[Assignment]] = None,
    noise: Optional[BaseNoise] = None,
    cap: int = config.HIFID_CAP,
    method: str = "projector",
) -> int:
    """Conditioned checks at a constant angle until the fidelity reaches ``threshold``.

    Raises
    ------
    DivergenceError
        If ``cap`` checks pass without reaching the threshold.
    """
    if not 0.0 < theta <= math.pi / 2:
        raise ContractViolationError(f"theta={theta} outside (0, pi/2]")
    if solutions is None:
        solutions = all_solutions(instance)
    probe = FidelityProbe(solutions)
    noise = noise or NoNoise()
    state = RebitState.plus(instance.n)
    fidelity = probe(state, theta)
    if fidelity >= threshold:
        return 0
    clauses = instance.clauses
    m = len(clauses)
    for count in range(1, cap + 1):
        state.clause_check(clauses[(count - 1) % m], theta, noise, method=method)
        fidelity = probe(state, theta)
        if fidelity >= threshold:
            return count
    raise DivergenceError(cap, fidelity)


def default_n_full(
    n: int,
    theta: float,
    pilot: int = 50,
    seed: int = 0,
    percentile: float = 99.9,
    threshold: float = config.HIFID_THRESHOLD,
    target_ns: Optional[int] = 1,
    cap: int = config.HIFID_CAP,
) -> int:
    """Sculpting run length covering the bulk of the N_hiFid distribution.

    A pilot batch of fresh instances at the same ``(n, theta)`` gives the
    N_hiFid values; the result is their ``percentile`` rounded up.
    """
    seeds = np.random.SeedSequence(seed).generate_state(pilot)
    counts = []
    for s in seeds:
        instance = generate_instance(n, int(s), target_ns=target_ns)
        counts.append(n_hifid(instance, theta, threshold, cap=cap))
    value = int(math.ceil(np.percentile(counts, percentile)))
    logger.info(f"Default N_full for n={n}, theta={theta:.4f}: {value} (pilot of {pilot})")
    return max(value, 1)


def instance_n_full(
    instance: SatInstance,
    theta: float,
    pilot: int = 20,
    seed: int = 0,
    percentile: float = 99.9,
    threshold: float = config.HIFID_THRESHOLD,
    cap: int = config.HIFID_CAP,
) -> int:
    """Sculpting run length for one instance from re-ordered copies of it.

    Each pilot shuffles the clause order of ``instance`` and counts the
    checks until the fidelity with its solutions reaches ``threshold``.
    Instances without solutions fall back to :func:`default_n_full` over
    generated instances of at least 4 variables.
    """
    found = all_solutions(instance)
    if not found:
        n = max(instance.n, _MIN_PILOT_N)
        return default_n_full(n, theta, pilot, seed, percentile, threshold, cap=cap)
    rng = np.random.default_rng(seed)
    counts = [
        n_hifid(shuffled(instance, rng), theta, threshold, solutions=found, cap=cap)
        for _ in range(pilot)
    ]
    value = int(math.ceil(np.percentile(counts, percentile)))
    logger.info(f"N_full for {instance!r}, theta={theta:.4f}: {value} (pilot of {pilot})")
    return max(value, 1)
