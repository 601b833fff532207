"""Majority-vote inference of an assignment from repeated measurements

Each qubit of a target state reads out its literal's value with probability
``p = (1 + sin(theta)) / 2``; ``R`` measured runs are turned into a guess by
majority vote, as one would call a biased coin from repeated throws.
"""

import csv
import io
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from sculpt.core import config
from sculpt.core.exception import ContractViolationError, NotAProbabilityError
from sculpt.core.sat import Assignment

logger = logging.getLogger(__name__)

TALLY_COLUMNS = ("qubit_index", "ones", "runs")


def readout_bias(theta: float) -> float:
    """Probability that a qubit of the target state reads its literal's value."""
    return (1.0 + math.sin(theta)) / 2.0


class MeasurementTally:
    """Per-qubit counts of outcome 1 over ``runs`` measured rounds

    Attributes
    ----------
    n : int
        Number of qubits
    theta : float or None
        The angle of the measured state, when known
    """

    def __init__(self, n: int, theta: Optional[float] = None, runs: int = 0, ones=None) -> None:
        if n < 1:
            raise ContractViolationError("A tally needs at least one qubit")
        self.n = n
        self.theta = theta
        self._runs = int(runs)
        self._ones = np.zeros(n, dtype=np.int64) if ones is None else np.array(ones, dtype=np.int64)
        if self._ones.shape != (n,):
            raise ContractViolationError(f"Expected {n} counts, got {self._ones.shape[0]}")
        if self._runs < 0 or np.any(self._ones < 0) or np.any(self._ones > self._runs):
            raise ContractViolationError("Counts must lie in [0, runs]")

    def __repr__(self):
        return f"MeasurementTally(n={self.n}, runs={self.runs})"

    @property
    def runs(self) -> int:
        return self._runs

    @property
    def ones(self) -> np.ndarray:
        return self._ones.copy()

    def fraction(self) -> np.ndarray:
        if self._runs == 0:
            raise ContractViolationError("Empty tally")
        return self._ones / self._runs

    def add(self, bits) -> None:
        """Record one measured round (an Assignment or a 0/1 sequence)."""
        bits = np.asarray(list(bits), dtype=np.int64)
        if bits.shape != (self.n,):
            raise ContractViolationError(f"Round of {bits.shape[0]} bits for {self.n} qubits")
        self._ones += bits
        self._runs += 1

    def reset(self) -> None:
        self._ones[:] = 0
        self._runs = 0

    def to_csv(self, outfile, header_lines=()) -> None:
        for line in header_lines:
            outfile.write(f"# {line}\n")
        writer = csv.writer(outfile, lineterminator="\n")
        writer.writerow(TALLY_COLUMNS)
        for i, count in enumerate(self._ones):
            writer.writerow([i, int(count), self._runs])

    @classmethod
    def from_csv(cls, text: str, n: Optional[int] = None, theta: Optional[float] = None):
        """Read a tally written by :meth:`to_csv`; ``#`` lines are skipped."""
        rows = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
        reader = csv.DictReader(io.StringIO("\n".join(rows)))
        if reader.fieldnames is None or tuple(reader.fieldnames) != TALLY_COLUMNS:
            raise ContractViolationError(f"Tally CSV must have columns {', '.join(TALLY_COLUMNS)}")
        counts = {}
        runs = set()
        for row in reader:
            counts[int(row["qubit_index"])] = int(row["ones"])
            runs.add(int(row["runs"]))
        if len(runs) != 1:
            raise ContractViolationError("Tally rows disagree on the number of runs")
        size = n if n is not None else len(counts)
        if sorted(counts) != list(range(size)):
            raise ContractViolationError(f"Tally must list qubits 0..{size - 1} exactly once")
        return cls(size, theta, runs.pop(), [counts[i] for i in range(size)])


def _check_odd(R):
    if R < 1 or R % 2 == 0:
        raise ContractViolationError(f"R={R} must be odd and positive")


def _check_bias(p):
    if not 0.0 <= p <= 1.0:
        raise NotAProbabilityError(f"p={p} is not a probability")
    if p <= 0.5:
        raise ContractViolationError(f"p={p} must exceed 1/2")


def p_wrong_exact(R: int, p: float) -> float:
    """Probability that a majority of ``R`` throws of a ``p``-biased coin comes up wrong.

    ``sum_{i <= (R-1)/2} C(R, i) p^i (1-p)^(R-i)``, summed in log space.
    """
    _check_odd(R)
    _check_bias(p)
    if p == 1.0:
        return 0.0
    i = np.arange(0, (R - 1) // 2 + 1)
    log_terms = (
        special.gammaln(R + 1)
        - special.gammaln(i + 1)
        - special.gammaln(R - i + 1)
        + i * math.log(p)
        + (R - i) * math.log1p(-p)
    )
    return float(np.exp(special.logsumexp(log_terms)))


def gaussian_exponent(R: int, p: float) -> float:
    """``G = (p - 1/2) sqrt(R) / sqrt(2 p (1 - p))``; infinite at ``p = 1``."""
    if p == 1.0:
        return math.inf
    return (p - 0.5) * math.sqrt(R) / math.sqrt(2.0 * p * (1.0 - p))


def p_wrong_gaussian(R: int, p: float) -> float:
    """Normal approximation ``erfc(G) / 2`` of :func:`p_wrong_exact`.

    A warning is logged when ``R (1 - p) <= 5``, where the approximation is
    poor.
    """
    _check_bias(p)
    if R * (1.0 - p) <= 5.0:
        logger.warning(f"Gaussian error estimate outside its validity range (R(1-p)={R * (1 - p):.3g})")
    return float(0.5 * special.erfc(gaussian_exponent(R, p)))


def _smallest_odd(predicate) -> int:
    """Smallest odd R for which a monotone ``predicate(R)`` holds."""
    if predicate(1):
        return 1
    lo, hi = 0, 1
    while not predicate(2 * hi + 1):
        lo, hi = hi, hi * 2
    # predicate fails at 2*lo+1 and holds at 2*hi+1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(2 * mid + 1):
            hi = mid
        else:
            lo = mid
    return 2 * hi + 1


def required_repetitions(n: int, theta: float, method: str = "exact") -> int:
    """Smallest odd number of runs making a wrong full guess unlikely.

    Parameters
    ----------
    n : int
        Number of variables, at least 2
    theta : float
        The angle of the measured state, in (0, pi/2]
    method : {"exact", "gaussian"}
        ``exact`` requires ``p_wrong_exact(R, p) < 1/n``; ``gaussian`` uses
        the normal-tail condition ``G exp(G^2) > n / (2 sqrt(pi))``.
    """
    if n < 2:
        raise ContractViolationError("n must be at least 2")
    if not 0.0 < theta <= math.pi / 2:
        raise ContractViolationError(f"theta={theta} outside (0, pi/2]")
    p = readout_bias(theta)
    if p >= 1.0:
        return 1
    if method == "exact":
        return _smallest_odd(lambda R: p_wrong_exact(R, p) < 1.0 / n)
    if method == "gaussian":
        bound = n / (2.0 * math.sqrt(math.pi))

        def holds(R):
            G = gaussian_exponent(R, p)
            return G * math.exp(min(G * G, 700.0)) > bound

        return _smallest_odd(holds)
    raise ContractViolationError(f"Unknown method {method!r}")


def infer_assignment(tally: MeasurementTally, theta: Optional[float] = None):
    """Majority vote per qubit.

    Returns
    -------
    tuple
        ``(Assignment, confidence)``; ``confidence[i]`` is one minus the
        two-sided binomial p-value of the majority count, under the
        hypothesis that the true value of qubit ``i`` is the minority
        outcome.
    """
    _check_odd(tally.runs)
    theta = tally.theta if theta is None else theta
    if theta is None:
        raise ContractViolationError("The measured angle is needed for confidences")
    ones = tally.ones
    R = tally.runs
    bits = ones > R / 2
    majority = np.where(bits, ones, R - ones)
    p = readout_bias(theta)
    upper = stats.binom.sf(majority - 1, R, 1.0 - p)
    lower = stats.binom.cdf(majority, R, 1.0 - p)
    confidence = 1.0 - np.minimum(1.0, 2.0 * np.minimum(upper, lower))
    return Assignment(tuple(bool(b) for b in bits)), confidence


def detect_ambiguous(
    tally: MeasurementTally,
    theta: Optional[float] = None,
    z_threshold: float = config.AMBIGUITY_Z,
    ignore: Sequence[int] = (),
) -> set:
    """Qubits whose asymmetry falls well short of the expected bias.

    Such qubits likely take different values in different solutions. A
    qubit is flagged when ``sin(theta)/2 - |ones/R - 1/2|`` exceeds
    ``z_threshold`` standard errors.
    """
    if tally.runs < 3:
        raise ContractViolationError("At least 3 runs are needed")
    theta = tally.theta if theta is None else theta
    if theta is None:
        raise ContractViolationError("The measured angle is needed")
    p = readout_bias(theta)
    se = math.sqrt(p * (1.0 - p) / tally.runs)
    shortfall = math.sin(theta) / 2.0 - np.abs(tally.fraction() - 0.5)
    flagged = {int(i) for i in np.flatnonzero(shortfall > z_threshold * se)}
    return flagged - set(ignore)
