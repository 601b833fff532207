"""Contains classes describing rotation errors applied to single-qubit gates"""

import logging
import math
from abc import ABC, abstractmethod

import numpy as np

from sculpt.core.exception import NotAProbabilityError, ContractViolationError

logger = logging.getLogger(__name__)


class BaseNoise(ABC):
    """Abstract noise component for rotation errors

    Noise components hold their own random stream, separate from the stream
    used to sample clause-check outcomes, so that switching noise on or off
    never shifts the outcome sequence.

    Methods
    -------
    perturb(angle)
        Returns the angle actually applied by the imperfect gate
    """

    __name__ = "BaseNoise"

    def __init__(self) -> None:
        super().__init__()

    @property
    def enabled(self) -> bool:
        return False

    @abstractmethod
    def perturb(self, angle: float) -> float:
        """Produce the perturbed rotation angle

        Parameters
        ----------
        angle : float
            The intended rotation angle, in radians.

        Returns
        -------
        float
            The applied angle, in radians.
        """
        pass


class NoNoise(BaseNoise):
    """Noise component for ideal gates

    Methods
    -------
    perturb(angle)
        Returns the angle unchanged
    """

    __name__ = "NoNoise"

    def perturb(self, angle: float) -> float:
        return angle


class _CappedNoise(BaseNoise):
    def __init__(self, cap: float, rng=None) -> None:
        """
        Parameters
        ----------
        cap : float
            Largest relative defect, e.g. 0.02 for 2%
        rng : numpy.random.Generator or int, optional
            The random stream or a seed for one, by default a fresh stream
        """
        if cap < 0.0 or cap > 1.0:
            raise NotAProbabilityError("The noise cap must be in the range [0, 1]")
        self._cap = float(cap)
        self._rng = np.random.default_rng(rng)
        super().__init__()

    @property
    def cap(self) -> float:
        return self._cap

    @property
    def enabled(self) -> bool:
        return self._cap > 0.0

    def _defect(self) -> float:
        return self._rng.uniform(-self._cap, self._cap)


class MultiplicativeNoise(_CappedNoise):
    """Over/under rotation by a uniform fraction of the intended angle

    The applied angle is ``angle * (1 + u)`` with ``u`` uniform in
    ``[-cap, cap]``. A zero cap draws nothing and returns the angle exactly.
    """

    __name__ = "MultiplicativeNoise"

    def perturb(self, angle: float) -> float:
        if self._cap == 0.0:
            return angle
        return angle * (1.0 + self._defect())


class AdditiveNoise(_CappedNoise):
    """Over/under rotation by a uniform fraction of a quarter turn

    The applied angle is ``angle + u * pi/2`` with ``u`` uniform in
    ``[-cap, cap]``, so the defect does not shrink with the angle.
    """

    __name__ = "AdditiveNoise"

    def perturb(self, angle: float) -> float:
        if self._cap == 0.0:
            return angle
        return angle + self._defect() * (math.pi / 2)


def make_noise(cap: float, mode: str = "multiplicative", rng=None) -> BaseNoise:
    """Build the noise component for a cap and mode name."""
    if cap == 0.0:
        return NoNoise()
    if mode == "multiplicative":
        return MultiplicativeNoise(cap, rng)
    if mode == "additive":
        return AdditiveNoise(cap, rng)
    raise ContractViolationError(f"Unknown noise mode {mode!r}")
