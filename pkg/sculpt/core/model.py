"""Contains the model controller running solver agents"""

import logging

from simpy import Environment

from sculpt.core.base import SimLogFilter

# Set up the logging module for errors and debugging
logger = logging.getLogger(__name__)

# One filter per process; every new model makes itself the active one
_sim_filter = SimLogFilter()


def _attach_sim_handlers(debug):
    simLog = logging.getLogger("sim")
    if getattr(simLog, "_sculpt_configured", False):
        if debug and not getattr(simLog, "_sculpt_debug", False):
            _attach_debug_handler(simLog)
        return simLog
    simLog.setLevel(logging.DEBUG)
    simLog.propagate = False

    # Set up stout output and formatting
    sh = logging.StreamHandler()
    sh.setLevel(logging.INFO)
    sh.addFilter(_sim_filter)
    sh.setFormatter(logging.Formatter("%(now)-10d %(name)-30s  %(message)s", style="%"))
    simLog.addHandler(sh)

    # Set up logfile output and formatting
    fh = logging.FileHandler("log/sim.log", mode="w")
    fh.setLevel(logging.INFO)
    fh.addFilter(_sim_filter)
    fh.setFormatter(
        logging.Formatter("%(now)-10d %(levelname)-8s %(name)-30s  %(message)s", style="%")
    )
    simLog.addHandler(fh)
    simLog._sculpt_configured = True
    if debug:
        _attach_debug_handler(simLog)
    return simLog


def _attach_debug_handler(simLog):
    dfh = logging.FileHandler("log/sim_debug.log", mode="w")
    dfh.setLevel(logging.DEBUG)
    dfh.addFilter(_sim_filter)
    dfh.setFormatter(
        logging.Formatter("%(now)-10d %(levelname)-8s %(name)-30s  %(message)s", style="%")
    )
    simLog.addHandler(dfh)
    simLog._sculpt_debug = True


class Model(Environment):
    """The model class

    A simpy environment whose clock counts clause checks. Solver agents are
    processes that advance the clock by the checks each try consumes.

    Attributes
    ----------
    simLog : `logging.Logger`
        The logging component of the model
    """

    def __init__(self, debug=False, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._solvers = {}
        _sim_filter.model = self
        self.simLog = _attach_sim_handlers(debug)
        self.simLog.debug("Model setup complete!")

    @property
    def solvers(self):
        return self._solvers

    def _uid_unique(self, uid):
        return uid not in self._solvers

    def add_solver(self, solver_type, uid, *args, **kwargs):
        """Add a solver agent to the model

        Parameters
        ----------
        solver_type : type
            The agent class (e.g. `SculptSolver`)
        uid : mixed
            Unique ID of the agent

        Returns
        -------
        Agent
            The initialized and added solver
        """
        s = solver_type(self, uid, *args, **kwargs)
        self._solvers[uid] = s
        self.simLog.debug(f"Added {s.__name__} {uid}")
        return s

    def start(self):
        """Start the model

        Starting the model activates all solver agents.
        """
        self.simLog.debug("Simulation is starting...")
        for solver in self._solvers.values():
            solver.start()
        self.simLog.debug(f"Activated {len(self._solvers)} solvers")

    def run(self, until=None):
        """Run the model

        Parameters
        ----------
        until : int, optional
            The clause-check count to stop at, by default None which runs
            until every solver has finished.
        """
        self.simLog.debug("Starting model run")
        super().run(until)
        self.simLog.debug(f"Finished model run after {self.now} clause checks")
