"""
Base classes of Sculpt's simulation items.

:class:`Agent` defines the abstract solver agent run as a simpy process.
"""
import logging
from abc import ABC, abstractmethod

import numpy as np

from sculpt.core.exception import NotPositiveError, NotUniqueIDError

logger = logging.getLogger(__name__)


class SimLogFilter(logging.Filter):
    """Stamp records with the clause checks consumed by the active model."""

    def __init__(self, model=None, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.model = model

    def filter(self, record) -> bool:
        record.now = self.model.now if self.model is not None else 0
        record.name = record.name.split(".", 1)[-1]
        return True


class BaseItem(ABC):
    """Abstract base item for everything that lives in a model

    Attributes
    ----------
    uid : mixed
        A unique identifier for a given item.
    """

    __name__ = "Base Item"

    def __init__(self, model, uid) -> None:
        self._model = model
        if not self._model._uid_unique(uid):
            raise NotUniqueIDError(f"UID {uid} has been used already.")
        self.uid = uid

        self.logger = logging.getLogger(f"{logger.name}.{uid}")
        self.simLog = logging.getLogger("sim.base")

    @property
    def model(self):
        return self._model

    @property
    def uid(self):
        return self._uid

    @uid.setter
    def uid(self, uid):
        self._uid = uid


class Agent(BaseItem, ABC):
    """A solver agent

    Agents repeat tries until one succeeds or the try cap is reached. Each
    try advances the model clock by the clause checks it consumed, so the
    clock always reads the total checks spent.

    Attributes
    ----------
    instance : SatInstance
        The instance being solved
    rng : numpy.random.Generator
        The stream used to sample check outcomes and measurements
    try_cap : int
        The largest number of tries before giving up
    """

    __name__ = "Agent"

    def __init__(self, model, uid, instance, rng, try_cap) -> None:
        super().__init__(model, uid)
        self.instance = instance
        self.rng = np.random.default_rng(rng)
        self.try_cap = try_cap
        self.result = None
        self.simLog = logging.getLogger(f"sim.{self.__name__}.{uid}")

    @property
    def try_cap(self):
        return self._try_cap

    @try_cap.setter
    def try_cap(self, try_cap):
        if try_cap <= 0:
            raise NotPositiveError("The try cap must be positive")
        self._try_cap = int(try_cap)

    def start(self):
        self.simLog.debug("Started!")
        self.action = self.model.process(self.run())

    @abstractmethod
    def run(self):
        pass
