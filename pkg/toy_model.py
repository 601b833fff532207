# Set up a toy model

from sculpt.core import Model
from sculpt.core.ledger import expected_cost
from sculpt.core.noise import MultiplicativeNoise
from sculpt.core.sat import generate_instance
from sculpt.core.schedule import HALF_PI, ConstantSchedule, LinearSchedule, SteppedSchedule
from sculpt.core.solver import AdiabaticSolver, HybridSolver, SculptSolver
from sculpt.core.trajectory import n_hifid, run_trajectory_deterministic

# Draw a 10-variable instance with a single solution
instance = generate_instance(10, seed=7, target_ns=1)

# Exact expected cost of two schedules, without sampling
for schedule in (LinearSchedule(60), SteppedSchedule(0.56 * HALF_PI, 20, 20)):
    cost = expected_cost(run_trajectory_deterministic(instance, schedule))
    print(f"{schedule!r}: P={cost.p_success:.4f} C_total={cost.c_total:.0f}")

# Sculpting runs last until the register is close to the target state
theta = 0.5 * HALF_PI
n_full = n_hifid(instance, theta)

# Instantiate a model and race three solvers on the same clock
model = Model()
model.add_solver(AdiabaticSolver, "linear", instance, LinearSchedule(60), 1)
model.add_solver(HybridSolver, "hybrid", instance, SteppedSchedule(0.56 * HALF_PI, 20, 20), 2)
model.add_solver(
    SculptSolver, "sculpt", instance, ConstantSchedule(theta, n_full), 3,
    noise=MultiplicativeNoise(0.02, rng=4),
)
model.start()
model.run()

for uid, solver in model.solvers.items():
    r = solver.result
    print(f"{uid}: solved={r.solved} tries={r.tries} checks={r.total_checks}")
