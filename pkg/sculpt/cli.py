"""Command-line entry point: ``sculpt gen|solve|sweep|grover|infer``.

Exit codes are 0 when the command completed (or the instance was solved),
2 when a solve ran out of tries or runs, and 1 on usage or input errors.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from sculpt import __version__
from sculpt.core import config as defaults
from sculpt.core.baselines import classical_reference, grover_expected_total
from sculpt.core.config import ExperimentConfig
from sculpt.core.dimacs import instance_digest, read_dimacs, write_dimacs
from sculpt.core.exception import SculptError
from sculpt.core.inference import MeasurementTally, detect_ambiguous, infer_assignment
from sculpt.core.noise import make_noise
from sculpt.core.sat import generate_instance, shuffled
from sculpt.core.schedule import HALF_PI, LinearSchedule, SqrtSchedule
from sculpt.core.solver import solve_adiabatic, solve_hybrid, solve_sculpt
from sculpt.core.sweep import run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSOLVED = 2


def _dump(obj, out):
    json.dump(obj, out, indent=2, sort_keys=True)
    out.write("\n")


def _provenance(cfg=None, seed=None):
    """Version, configuration digest and master seed stamped on every report."""
    if cfg is None:
        cfg = ExperimentConfig()
    return {
        "version": __version__,
        "config_digest": cfg.digest(),
        "seed": cfg.seed if seed is None else seed,
    }


def cmd_gen(args, out=sys.stdout):
    """Write ``count`` instances with consecutive seeds as DIMACS files."""
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for k in range(args.count):
        seed = args.seed + k
        instance = generate_instance(
            args.n, seed, target_ns=args.target_ns, rejection_cap=args.rejection_cap
        )
        path = os.path.join(args.out_dir, f"n{args.n}_s{seed}.cnf")
        write_dimacs(instance, path)
        written.append({"path": path, "seed": seed, "digest": instance_digest(instance)})
    _dump({**_provenance(seed=args.seed), "instances": written}, out)
    return EXIT_OK


def _solve_options(args):
    """Merge the optional config file's [solve] section with command-line flags."""
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    options = cfg.section("solve")
    for key in options:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    seed = args.seed if args.seed is not None else cfg.seed
    return cfg, options, seed


def cmd_solve(args, out=sys.stdout):
    """Solve one DIMACS instance and print the result as JSON."""
    cfg, opt, seed = _solve_options(args)
    instance = read_dimacs(args.instance)
    streams = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(streams[0])
    noise = make_noise(opt["noise"], opt["noise_mode"], np.random.default_rng(streams[1]))
    if args.shuffle and not opt["shuffle_each_try"]:
        instance = shuffled(instance, np.random.default_rng(streams[2]))
    theta0 = opt["theta_frac"] * HALF_PI
    common = dict(noise=noise, rng=rng, try_cap=opt["try_cap"], shuffle_each_try=opt["shuffle_each_try"])

    strategy = opt["strategy"]
    if strategy == "adiabatic-linear":
        result = solve_adiabatic(instance, LinearSchedule(opt["cycles"]), **common)
    elif strategy == "adiabatic-sqrt":
        result = solve_adiabatic(instance, SqrtSchedule(opt["cycles"]), **common)
    elif strategy == "hybrid":
        hold = opt["hold"] if opt["hold"] is not None else opt["cycles"] // 2
        result = solve_hybrid(instance, theta0, hold, opt["ramp"], **common)
    else:
        result = solve_sculpt(
            instance, theta0, opt["n_full"], runs_max=opt["runs_max"], reduce=opt["reduce"], **common
        )

    report = result.as_dict()
    logger.info(f"Solve took {report.pop('wall_time'):.3f} s")
    report.update(
        {
            **_provenance(cfg, seed),
            "instance": str(args.instance),
            "instance_digest": instance_digest(instance),
        }
    )
    _dump(report, out)
    return EXIT_OK if result.solved else EXIT_UNSOLVED


def cmd_sweep(args, out=sys.stdout):
    cfg = ExperimentConfig.from_file(args.config)
    summary = run_sweep(cfg, jobs=args.jobs, out_dir=args.out_dir)
    _dump(summary, out)
    return EXIT_OK


def cmd_grover(args, out=sys.stdout):
    """Print the early-stopped Grover plan with the classical reference scalings."""
    plan = grover_expected_total(args.n, args.clauses)
    report = plan.as_dict()
    report.update(_provenance())
    report["references"] = {
        model: classical_reference(args.n, model, plan.n_c)
        for model in ("brute", "paturi", "grover_base")
    }
    _dump(report, out)
    return EXIT_OK


def cmd_infer(args, out=sys.stdout):
    """Majority-vote a tally CSV and report confidences and ambiguous qubits."""
    with open(args.tally, "r") as infile:
        tally = MeasurementTally.from_csv(infile.read(), n=args.n, theta=args.theta_frac * HALF_PI)
    assignment, confidence = infer_assignment(tally)
    report = {
        **_provenance(),
        "runs": tally.runs,
        "assignment": str(assignment),
        "confidence": [float(c) for c in confidence],
    }
    if tally.runs >= 3:
        report["ambiguous"] = sorted(detect_ambiguous(tally, z_threshold=args.z))
    _dump(report, out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sculpt",
        description="Simulate measurement-driven quantum 3-SAT solvers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate random 3-SAT instances as DIMACS")
    p.add_argument("--n", type=int, required=True, help="number of variables")
    p.add_argument("--seed", type=int, default=0, help="seed of the first instance")
    p.add_argument("--target-ns", type=int, default=None, help="required number of solutions")
    p.add_argument("--count", type=int, default=1, help="number of instances")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--rejection-cap", type=int, default=defaults.REJECTION_CAP)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve a DIMACS instance")
    p.add_argument("instance", help="path to a DIMACS file")
    p.add_argument("--config", help="experiment file whose [solve] section gives defaults")
    p.add_argument("--strategy", choices=defaults.STRATEGIES)
    p.add_argument("--theta-frac", dest="theta_frac", type=float, help="theta0 as a fraction of pi/2")
    p.add_argument("--cycles", type=int, help="ramp length for the adiabatic strategies")
    p.add_argument("--hold", type=int, help="hybrid: cycles held at theta0")
    p.add_argument("--ramp", type=int, help="hybrid: ramp cycles (default: hold)")
    p.add_argument("--n-full", dest="n_full", type=int, help="sculpt: passed checks per run")
    p.add_argument("--runs-max", dest="runs_max", type=int, help="sculpt: successful runs allowed")
    p.add_argument("--try-cap", dest="try_cap", type=int, help="tries allowed")
    p.add_argument("--noise", type=float, help="rotation noise cap, e.g. 0.02")
    p.add_argument("--noise-mode", dest="noise_mode", choices=defaults.NOISE_MODES)
    p.add_argument("--reduce", action="store_true", default=None, help="sculpt: fix ambiguous variables")
    p.add_argument("--shuffle", action="store_true", help="shuffle the clause order once")
    p.add_argument("--shuffle-each-try", dest="shuffle_each_try", action="store_true", default=None)
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a parameter sweep from an experiment file")
    p.add_argument("config", help="path to the experiment file")
    p.add_argument("--jobs", type=int, default=None, help="worker threads")
    p.add_argument("--out-dir", default=None, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grover", help="print the Grover early-stopping plan")
    p.add_argument("n", type=int, help="number of variables")
    p.add_argument("--clauses", type=int, default=None, help="clause count (default round(4.267 n))")
    p.set_defaults(func=cmd_grover)

    p = sub.add_parser("infer", help="infer an assignment from a measurement tally")
    p.add_argument("tally", help="tally CSV (qubit_index, ones, runs)")
    p.add_argument("--theta-frac", dest="theta_frac", type=float, required=True)
    p.add_argument("--n", type=int, default=None, help="number of qubits")
    p.add_argument("--z", type=float, default=defaults.AMBIGUITY_Z, help="ambiguity threshold")
    p.set_defaults(func=cmd_infer)
    return parser


def main(argv=None, out=sys.stdout):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args, out)
    except (SculptError, OSError) as e:
        logger.error(str(e))
        print(f"sculpt {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
