"""Solver agents for the adiabatic-like, sculpting and hybrid strategies"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from sculpt.core import config
from sculpt.core.base import Agent
from sculpt.core.exception import ConflictError, ContractViolationError
from sculpt.core.inference import (
    MeasurementTally,
    detect_ambiguous,
    infer_assignment,
    required_repetitions,
)
from sculpt.core.model import Model
from sculpt.core.noise import BaseNoise, NoNoise
from sculpt.core.sat import (
    Assignment,
    SatInstance,
    assign_and_simplify,
    evaluate,
    shuffled,
)
from sculpt.core.schedule import HALF_PI, BaseSchedule, ConstantSchedule, SteppedSchedule
from sculpt.core.trajectory import TrajectoryCache, instance_n_full, run_trajectory_sampled

logger = logging.getLogger(__name__)


@dataclass
class SolveResult:
    """Outcome of a solve

    ``total_checks`` counts every clause check of every try, aborted ones
    included. ``assignment`` is set only when it satisfies the instance.
    """

    strategy: str
    solved: bool
    assignment: Optional[Assignment]
    tries: int
    total_checks: int
    abort_indices: list = field(default_factory=list)
    wall_time: float = 0.0
    successful_runs: int = 0
    fixed: dict = field(default_factory=dict)
    tally: Optional[MeasurementTally] = None

    def as_dict(self) -> dict:
        out = {
            "strategy": self.strategy,
            "solved": self.solved,
            "assignment": str(self.assignment) if self.assignment is not None else None,
            "tries": self.tries,
            "total_checks": self.total_checks,
            "successful_runs": self.successful_runs,
            "abort_indices": list(self.abort_indices),
            "fixed": {str(k): int(v) for k, v in sorted(self.fixed.items())},
            "wall_time": self.wall_time,
        }
        if self.tally is not None:
            out["tally"] = {"runs": self.tally.runs, "ones": [int(v) for v in self.tally.ones]}
        return out


class BaseSolver(Agent):
    """Solver agent repeating sampled runs of one schedule

    Without noise and without per-try reshuffling every run follows the
    same conditioned trajectory, so runs are drawn from a cached ledger.

    Attributes
    ----------
    schedule : BaseSchedule
        The angle schedule of one run
    noise : BaseNoise
        Rotation noise of the gates
    shuffle_each_try : bool
        Re-randomize the clause order before every try
    """

    __name__ = "BaseSolver"

    def __init__(
        self, model, uid, instance, schedule, rng, noise=None, try_cap=10**6,
        shuffle_each_try=False, method="projector",
    ) -> None:
        super().__init__(model, uid, instance, rng, try_cap)
        self.schedule = schedule
        self.noise = noise or NoNoise()
        self.shuffle_each_try = shuffle_each_try
        self.method = method
        self.tries = 0
        self.abort_indices = []
        self._cache = None
        self._started = None

    def __repr__(self):
        return f"{self.__name__} {self.uid}"

    def _working_instance(self):
        return self.instance

    def _run_once(self):
        """One try; returns ``(checks, assignment or None)``."""
        instance = self._working_instance()
        if not self.noise.enabled and not self.shuffle_each_try:
            if self._cache is None or self._cache.instance is not instance:
                self._cache = TrajectoryCache(instance, self.schedule, self.method)
            outcome = self._cache.draw(self.rng)
            if not outcome.success:
                return outcome.checks, None
            return outcome.checks, self._cache.measure(self.rng)
        if self.shuffle_each_try:
            instance = shuffled(instance, self.rng)
        outcome = run_trajectory_sampled(
            instance, self.schedule, self.noise, self.rng, method=self.method
        )
        if not outcome.success:
            return outcome.checks, None
        return outcome.checks, outcome.state.measure(self.rng)

    def _finish(self, solved, assignment, **kwargs):
        self.result = SolveResult(
            strategy=self.__name__,
            solved=solved,
            assignment=assignment if solved else None,
            tries=self.tries,
            total_checks=int(self.model.now),
            abort_indices=self.abort_indices,
            wall_time=time.perf_counter() - self._started,
            **kwargs,
        )
        if solved:
            self.simLog.info(f"Solved with {assignment} after {self.tries} tries")
        else:
            self.simLog.info(f"Unsolved after {self.tries} tries")

    def run(self):
        """Repeat runs until a measured assignment satisfies the instance."""
        self._started = time.perf_counter()
        while self.tries < self.try_cap:
            checks, measured = self._run_once()
            self.tries += 1
            yield self.model.timeout(checks)
            if measured is None:
                self.abort_indices.append(checks)
                self.simLog.debug(f"Try {self.tries} aborted at check {checks}")
                continue
            if evaluate(self.instance, measured):
                self._finish(True, measured, successful_runs=1)
                return
            self.simLog.debug(f"Try {self.tries} measured non-solution {measured}")
        self._finish(False, None)


class AdiabaticSolver(BaseSolver):
    """Ramp to pi/2, measure once per successful run."""

    __name__ = "AdiabaticSolver"

    def __init__(self, model, uid, instance, schedule, rng, **kwargs) -> None:
        if not math.isclose(schedule.final_theta, HALF_PI, abs_tol=1e-12):
            raise ContractViolationError(f"{schedule!r} does not end at pi/2")
        super().__init__(model, uid, instance, schedule, rng, **kwargs)


class HybridSolver(AdiabaticSolver):
    """Sculpt at a constant angle, then ramp to pi/2 and measure once."""

    __name__ = "HybridSolver"


class SculptSolver(BaseSolver):
    """Prepare the target state at a fixed angle and infer the answer by majority vote

    After each successful run the register is measured and tallied. At
    every odd tally size the majority assignment is proposed and checked.
    With ``reduce`` set, variables whose tallies stay close to even once
    enough runs are in are fixed to their majority value and the instance
    simplified; the opposite value is used if that empties a clause.

    Attributes
    ----------
    runs_max : int
        Successful runs allowed before giving up
    """

    __name__ = "SculptSolver"

    def __init__(
        self, model, uid, instance, schedule, rng, runs_max=101, reduce=False,
        z_threshold=config.AMBIGUITY_Z, **kwargs,
    ) -> None:
        if not isinstance(schedule, ConstantSchedule):
            raise ContractViolationError("Sculpting needs a constant schedule")
        super().__init__(model, uid, instance, schedule, rng, **kwargs)
        self.runs_max = runs_max
        self.reduce = reduce
        self.z_threshold = z_threshold
        self.theta = schedule.theta0
        self.tally = MeasurementTally(instance.n, self.theta)
        self.successful_runs = 0
        self.fixed = {}
        self._working = instance
        self._enough = required_repetitions(max(instance.n, 2), self.theta)

    def _working_instance(self):
        return self._working

    def _propose(self):
        bits = list(infer_assignment(self.tally)[0].bits)
        for var, value in self.fixed.items():
            bits[var] = value
        return Assignment(tuple(bits))

    def _try_reduce(self):
        """Fix one ambiguous variable; returns True if the instance changed."""
        ambiguous = detect_ambiguous(self.tally, self.theta, self.z_threshold, ignore=self.fixed)
        if not ambiguous:
            return False
        var = min(ambiguous)
        majority = bool(self.tally.ones[var] * 2 > self.tally.runs)
        for value in (majority, not majority):
            try:
                self._working = assign_and_simplify(self._working, var, value)
            except ConflictError:
                self.simLog.debug(f"Fixing x{var}={int(value)} empties a clause")
                continue
            self.fixed[var] = value
            self.tally.reset()
            self.simLog.info(f"Fixed ambiguous x{var}={int(value)}")
            return True
        return False

    def run(self):
        self._started = time.perf_counter()
        while self.tries < self.try_cap and self.successful_runs < self.runs_max:
            checks, measured = self._run_once()
            self.tries += 1
            yield self.model.timeout(checks)
            if measured is None:
                self.abort_indices.append(checks)
                self.simLog.debug(f"Try {self.tries} aborted at check {checks}")
                continue
            self.successful_runs += 1
            self.tally.add(measured)
            if self.tally.runs % 2 == 0:
                continue
            proposal = self._propose()
            if evaluate(self.instance, proposal):
                self._finish(True, proposal, successful_runs=self.successful_runs,
                             fixed=dict(self.fixed), tally=self.tally)
                return
            self.simLog.debug(f"Proposal {proposal} after {self.tally.runs} runs fails")
            if self.reduce and self.tally.runs >= max(self._enough, 3):
                self._try_reduce()
        self._finish(False, None, successful_runs=self.successful_runs,
                     fixed=dict(self.fixed), tally=self.tally)


def _run_solver(solver_type, instance, schedule, rng, debug=False, **kwargs) -> SolveResult:
    model = Model(debug=debug)
    model.add_solver(solver_type, "solver", instance, schedule, rng, **kwargs)
    model.start()
    model.run()
    result = model.solvers["solver"].result
    logger.info(
        f"{solver_type.__name__} on {instance!r}: solved={result.solved} "
        f"tries={result.tries} checks={result.total_checks}"
    )
    return result


def solve_adiabatic(
    instance: SatInstance,
    schedule: BaseSchedule,
    noise: Optional[BaseNoise] = None,
    rng=None,
    try_cap: int = 10**6,
    **kwargs,
) -> SolveResult:
    """Repeat ramped runs ending at pi/2 until a measurement satisfies the instance."""
    return _run_solver(AdiabaticSolver, instance, schedule, rng, noise=noise, try_cap=try_cap, **kwargs)


def solve_sculpt(
    instance: SatInstance,
    theta0: float,
    n_full: Optional[int] = None,
    runs_max: int = 101,
    noise: Optional[BaseNoise] = None,
    rng=None,
    try_cap: int = 10**6,
    reduce: bool = False,
    pilot: int = 20,
    **kwargs,
) -> SolveResult:
    """Sculpt at ``theta0`` for ``n_full`` passed checks per run and vote.

    ``n_full`` defaults to :func:`instance_n_full` from a pilot batch of
    clause-order shuffles seeded by ``instance.seed``.
    """
    if not 0.0 < theta0 <= HALF_PI:
        raise ContractViolationError(f"theta0={theta0} outside (0, pi/2]")
    if n_full is None and theta0 == HALF_PI:
        n_full = max(len(instance), 1)
    elif n_full is None:
        n_full = instance_n_full(instance, theta0, pilot=pilot, seed=instance.seed or 0)
    schedule = ConstantSchedule(theta0, n_full)
    return _run_solver(
        SculptSolver, instance, schedule, rng, runs_max=runs_max, reduce=reduce,
        noise=noise, try_cap=try_cap, **kwargs,
    )


def solve_hybrid(
    instance: SatInstance,
    theta0: float,
    c_hold: int,
    c_ramp: Optional[int] = None,
    noise: Optional[BaseNoise] = None,
    rng=None,
    try_cap: int = 10**6,
    **kwargs,
) -> SolveResult:
    """Hold ``theta0`` for ``c_hold`` cycles, ramp to pi/2 over ``c_ramp`` (default ``c_hold``)."""
    if not 0.0 < theta0 <= HALF_PI:
        raise ContractViolationError(f"theta0={theta0} outside (0, pi/2]")
    schedule = SteppedSchedule(theta0, c_hold, c_hold if c_ramp is None else c_ramp)
    return _run_solver(HybridSolver, instance, schedule, rng, noise=noise, try_cap=try_cap, **kwargs)
