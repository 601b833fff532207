"""Grid sweeps producing the data behind fidelity, cost and noise studies

Every point of the grid is an independent unit of work. Random streams are
derived from the master seed and the point's coordinates only, and rows are
written in sorted key order, so the output does not depend on the number
of workers or on the order in which points finish.
"""

import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from sculpt import __version__
from sculpt.core.baselines import compare_table
from sculpt.core.dimacs import instance_digest
from sculpt.core.exception import DivergenceError, SculptError
from sculpt.core.ledger import expected_cost
from sculpt.core.noise import make_noise
from sculpt.core.sat import count_solutions, generate_instance, instance_statistics
from sculpt.core.schedule import HALF_PI, ConstantSchedule, parse_schedule
from sculpt.core.trajectory import n_hifid, run_trajectory_deterministic

logger = logging.getLogger(__name__)

COLUMNS = {
    "trace": (
        "n", "instance", "instance_digest", "schedule", "check_index", "cycle",
        "clause_id", "theta", "p_pass", "cum_success", "fidelity", "cumulative_failure_cost",
    ),
    "cost": (
        "n", "instance", "instance_digest", "schedule", "cycles", "n_checks_success",
        "p_success", "F", "expected_tries", "c_total", "approx_c_total",
    ),
    "hifid": (
        "n", "instance", "instance_digest", "theta_frac", "n_hifid", "solutions",
        "near_solutions",
    ),
    "prefactor": (
        "n", "instance", "instance_digest", "theta_frac", "n_full", "p_success",
        "overlap_bound", "bound_ratio", "F", "c_total", "approx_c_total",
    ),
    "compare": (
        "n", "instance", "instance_digest", "approach", "kind", "cycles", "tries",
        "expected_total_checks",
    ),
    "noise": (
        "n", "instance", "instance_digest", "theta_frac", "noise", "noise_mode", "trial",
        "n_hifid_noiseless", "n_hifid", "reached",
    ),
}


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def sweep_instance(master_seed, n, index, target_ns=1, rejection_cap=10**6):
    """The ``index``-th instance of size ``n`` in a sweep.

    Without a target solution count, unsatisfiable draws are skipped so the
    fidelity experiments always have a target.
    """
    attempt = 0
    while True:
        seq = np.random.SeedSequence(master_seed, spawn_key=(n, index, attempt))
        seed = int(seq.generate_state(1)[0])
        instance = generate_instance(n, seed, target_ns=target_ns, rejection_cap=rejection_cap)
        if target_ns is not None:
            return instance
        count, _ = count_solutions(instance)
        if count > 0:
            return instance.with_solution_count(count)
        attempt += 1


class Sweep:
    """A configured sweep

    Attributes
    ----------
    config : ExperimentConfig
        The resolved configuration
    jobs : int
        Worker threads
    out_dir : str
        Where CSV and JSON files are written
    """

    def __init__(self, config, jobs=None, out_dir=None) -> None:
        self.config = config
        self.jobs = jobs or config.jobs
        self.out_dir = out_dir or config.out_dir
        self.params = config.section("sweep")
        self.limits = config.section("limits")
        self.seed = config.seed
        self._instances = {}

    def header_lines(self):
        return [
            f"sculpt {__version__}",
            f"config {self.config.digest()}",
            f"seed {self.seed}",
        ] + [line for line in self.config.to_text().splitlines() if line]

    def instances(self):
        """All sweep instances keyed by ``(n, index)``, generated on first use."""
        if not self._instances:
            for n in self.params["n"]:
                for index in range(self.params["instances"]):
                    self._instances[(n, index)] = sweep_instance(
                        self.seed, n, index, self.params["target_ns"],
                        self.limits["rejection_cap"],
                    )
        return self._instances

    # -- points ----------------------------------------------------------------

    def _trace(self, n, index, instance, schedule_text):
        schedule = parse_schedule(schedule_text)
        ledger = run_trajectory_deterministic(instance, schedule, record_fidelity=True)
        if ledger.p_success > 0:
            cumulative = ledger.cumulative_failure_cost()
        else:
            cumulative = np.full(len(ledger), np.nan)
        digest = instance_digest(instance)
        rows = []
        for (i, cycle, clause_id, theta, p, cum, fid), cost in zip(ledger.rows(), cumulative):
            rows.append([n, index, digest, schedule_text, i, cycle, clause_id, theta, p, cum, fid, cost])
        return rows

    def _cost_row(self, instance, schedule):
        ledger = run_trajectory_deterministic(instance, schedule)
        try:
            summary = expected_cost(ledger)
        except SculptError:
            return [schedule.cycles(len(instance)), len(ledger), 0.0, None, math.inf, math.inf, None]
        return [
            schedule.cycles(len(instance)), summary.n_checks_success, summary.p_success,
            summary.F, summary.expected_tries, summary.c_total, summary.approx_c_total,
        ]

    def _cost(self, n, index, instance, schedule_text):
        row = self._cost_row(instance, parse_schedule(schedule_text))
        return [[n, index, instance_digest(instance), schedule_text] + row]

    def _hifid(self, n, index, instance, frac):
        try:
            count = n_hifid(instance, frac * HALF_PI, self.params["threshold"], cap=self.limits["hifid_cap"])
        except DivergenceError as e:
            logger.warning(f"n={n} instance {index} theta_frac={frac}: {e}")
            count = None
        stats = instance_statistics(instance)
        return [[n, index, instance_digest(instance), frac, count, stats["solutions"], stats["near_solutions"]]]

    def _prefactor(self, n, index, instance, frac):
        theta = frac * HALF_PI
        try:
            count = n_hifid(instance, theta, self.params["threshold"], cap=self.limits["hifid_cap"])
        except DivergenceError as e:
            logger.warning(f"n={n} instance {index} theta_frac={frac}: {e}")
            return []
        summary = expected_cost(run_trajectory_deterministic(instance, ConstantSchedule(theta, max(count, 1))))
        bound = math.cos(theta / 2) ** (2 * n)
        return [[
            n, index, instance_digest(instance), frac, max(count, 1), summary.p_success,
            bound, summary.p_success / bound, summary.F, summary.c_total, summary.approx_c_total,
        ]]

    def _compare(self, n, index, instance):
        measured = {}
        for text in self.params["schedules"]:
            schedule = parse_schedule(text)
            cycles, _, p, _, tries, c_total, _ = self._cost_row(instance, schedule)
            measured[text] = {"cycles": cycles, "tries": tries, "c_total": c_total}
        digest = instance_digest(instance)
        return [
            [n, index, digest, r["approach"], r["kind"], r["cycles"], r["tries"], r["expected_total_checks"]]
            for r in compare_table(n, len(instance), measured)
        ]

    def _noise(self, n, index, instance, frac_i, noise_i):
        frac = self.params["theta_frac"][frac_i]
        cap_value = self.params["noise"][noise_i]
        mode = self.params["noise_mode"]
        theta = frac * HALF_PI
        threshold = self.params["threshold"]
        try:
            baseline = n_hifid(instance, theta, threshold, cap=self.limits["hifid_cap"])
        except DivergenceError as e:
            logger.warning(f"n={n} instance {index} theta_frac={frac}: {e}")
            return []
        budget = max(3 * baseline, 1)
        digest = instance_digest(instance)
        rows = []
        for trial in range(self.params["trials"]):
            seq = np.random.SeedSequence(self.seed, spawn_key=(n, index, frac_i, noise_i, trial))
            noise = make_noise(cap_value, mode, np.random.default_rng(seq))
            try:
                count = n_hifid(instance, theta, threshold, noise=noise, cap=budget)
            except SculptError:
                count = None
            rows.append([n, index, digest, frac, cap_value, mode, trial, baseline, count, count is not None])
        return rows

    def points(self):
        """Yield ``(experiment, key, callable)`` for every grid point."""
        instances = self.instances()
        experiments = self.params["experiments"]
        for (n, index), instance in sorted(instances.items()):
            for s_i, text in enumerate(self.params["schedules"]):
                if "trace" in experiments:
                    yield "trace", (n, index, s_i), (self._trace, n, index, instance, text)
                if "cost" in experiments:
                    yield "cost", (n, index, s_i), (self._cost, n, index, instance, text)
            for f_i, frac in enumerate(self.params["theta_frac"]):
                if "hifid" in experiments:
                    yield "hifid", (n, index, f_i), (self._hifid, n, index, instance, frac)
                if "prefactor" in experiments:
                    yield "prefactor", (n, index, f_i), (self._prefactor, n, index, instance, frac)
                if "noise" in experiments:
                    for x_i in range(len(self.params["noise"])):
                        yield "noise", (n, index, f_i, x_i), (self._noise, n, index, instance, f_i, x_i)
            if "compare" in experiments:
                yield "compare", (n, index), (self._compare, n, index, instance)

    def run(self) -> dict:
        """Run every point and write one CSV per experiment plus ``summary.json``."""
        points = list(self.points())
        logger.info(f"Sweep of {len(points)} points on {self.jobs} worker(s)")
        results = {}
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            futures = {(exp, key): pool.submit(fn, *args) for exp, key, (fn, *args) in points}
            for (exp, key), future in futures.items():
                results[(exp, key)] = future.result()

        os.makedirs(self.out_dir, exist_ok=True)
        files = {}
        for experiment in self.params["experiments"]:
            path = os.path.join(self.out_dir, f"{experiment}.csv")
            keys = sorted(k for e, k in results if e == experiment)
            count = 0
            with open(path, "w", newline="") as outfile:
                for line in self.header_lines():
                    outfile.write(f"# {line}\n")
                writer = csv.writer(outfile, lineterminator="\n")
                writer.writerow(COLUMNS[experiment])
                for key in keys:
                    for row in results[(experiment, key)]:
                        writer.writerow([_cell(v) for v in row])
                        count += 1
            files[experiment] = {"file": os.path.basename(path), "rows": count}
            logger.info(f"Wrote {count} rows to {path}")

        summary = {
            "version": __version__,
            "config_digest": self.config.digest(),
            "seed": self.seed,
            "experiments": files,
            "instances": [
                {
                    "n": n,
                    "index": index,
                    "seed": inst.seed,
                    "solutions": inst.solution_count,
                    "digest": instance_digest(inst),
                }
                for (n, index), inst in sorted(self.instances().items())
            ],
        }
        with open(os.path.join(self.out_dir, "summary.json"), "w") as outfile:
            json.dump(summary, outfile, indent=2, sort_keys=True)
            outfile.write("\n")
        return summary


def run_sweep(config, jobs=None, out_dir=None) -> dict:
    return Sweep(config, jobs, out_dir).run()
