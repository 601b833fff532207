"""Reference costs in expected clause checks: Grover search and classical scalings"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Mapping, Optional

import numpy as np
from scipy import optimize

from sculpt.core.exception import ContractViolationError
from sculpt.core.sat import clause_count

logger = logging.getLogger(__name__)

MAX_GROVER_N = 60
# Above this many iterations per period the argmin is refined continuously
SCAN_LIMIT = 10**7

PATURI_BASE = 2.0 ** (2.0 * math.log(2.0) - 1.0)
GROVER_BASE = math.sqrt(2.0)
HYBRID_BASE = 1.153

CLASSICAL_MODELS = {
    "brute": 2.0,
    "paturi": PATURI_BASE,
    "grover_base": GROVER_BASE,
    "hybrid_base": HYBRID_BASE,
}


@dataclass(frozen=True)
class GroverPlan:
    """Grover search stopped early at the iteration count minimising ``m / p(m)``

    Each iterate tests every clause, so it costs ``n_c`` checks.
    """

    n: int
    n_c: int
    m_opt: int
    p_success: float
    expected_runs: float
    expected_iterations: float
    expected_total_checks: int

    def as_dict(self) -> dict:
        return asdict(self)


def _grover_angle(n):
    return math.asin(2.0 ** (-n / 2.0))


def grover_success_prob(m: int, n: int) -> float:
    """``sin^2((2m + 1) asin(2^(-n/2)))`` for a single marked item among ``2^n``."""
    if m < 0:
        raise ContractViolationError("Iteration count must be non-negative")
    return math.sin((2 * m + 1) * _grover_angle(n)) ** 2


def _cost(m, a):
    return m / np.sin((2 * m + 1) * a) ** 2


def grover_expected_total(n: int, n_c: Optional[int] = None) -> GroverPlan:
    """Optimal early stopping for Grover search on ``n`` variables.

    ``f(m) = m / p(m)`` is at least ``m``, so once ``m`` passes the best
    value found no larger ``m`` can win; the first period of ``p`` always
    contains the optimum. Ties go to the smaller ``m``.
    """
    if n < 1 or n > MAX_GROVER_N:
        raise ContractViolationError(f"n={n} outside 1..{MAX_GROVER_N}")
    if n_c is None:
        n_c = clause_count(n)
    a = _grover_angle(n)
    period = int(math.ceil(math.pi / (2.0 * a)))

    if period <= SCAN_LIMIT:
        m = np.arange(1, period + 1, dtype=np.float64)
        with np.errstate(divide="ignore"):
            f = _cost(m, a)
        m_opt = int(m[int(np.argmin(f))])
    else:
        peak = math.pi / (4.0 * a) - 0.5
        res = optimize.minimize_scalar(
            lambda x: _cost(x, a), bounds=(1.0, peak), method="bounded",
            options={"xatol": 0.25},
        )
        candidates = range(max(1, int(res.x) - 2), int(res.x) + 3)
        m_opt = min(candidates, key=lambda c: (_cost(c, a), c))

    p = grover_success_prob(m_opt, n)
    iterations = m_opt / p
    plan = GroverPlan(
        n=n,
        n_c=n_c,
        m_opt=m_opt,
        p_success=p,
        expected_runs=1.0 / p,
        expected_iterations=iterations,
        expected_total_checks=int(round(iterations * n_c)),
    )
    logger.debug(f"Grover plan {plan}")
    return plan


def classical_reference(n: int, model: str = "brute", n_c: Optional[int] = None) -> float:
    """Order-of-magnitude reference scaling ``n_c * K^n``.

    These are growth rates, not exact operation counts. ``brute`` is
    exhaustive search (``K = 2``), ``paturi`` the best randomized classical
    rate ``K = 2^(2 ln 2 - 1)``, ``grover_base`` plain Grover search
    (``K = sqrt 2``) and ``hybrid_base`` the combined quantum-classical rate.
    """
    if model not in CLASSICAL_MODELS:
        raise ContractViolationError(
            f"Unknown model {model!r}; expected one of {', '.join(CLASSICAL_MODELS)}"
        )
    if n_c is None:
        n_c = clause_count(n)
    return n_c * CLASSICAL_MODELS[model] ** n


def compare_table(n: int, n_c: int, measured: Mapping[str, Mapping] = None) -> list:
    """Rows comparing approaches by expected total clause checks.

    Parameters
    ----------
    n, n_c : int
        Variables and clauses of the instance
    measured : mapping, optional
        Approach name to a mapping with ``cycles``, ``tries`` and
        ``c_total`` from the simulated solvers

    Returns
    -------
    list of dict
        One row per approach with keys ``approach``, ``kind``, ``cycles``,
        ``tries`` and ``expected_total_checks``; simulated rows first.
    """
    rows = []
    for name, values in (measured or {}).items():
        rows.append(
            {
                "approach": name,
                "kind": "simulated",
                "cycles": values.get("cycles"),
                "tries": values.get("tries"),
                "expected_total_checks": values["c_total"],
            }
        )
    plan = grover_expected_total(n, n_c)
    rows.append(
        {
            "approach": "grover",
            "kind": "analytic",
            "cycles": plan.m_opt,
            "tries": plan.expected_runs,
            "expected_total_checks": plan.expected_total_checks,
        }
    )
    for model in ("brute", "paturi", "grover_base"):
        rows.append(
            {
                "approach": model,
                "kind": "scaling",
                "cycles": None,
                "tries": None,
                "expected_total_checks": classical_reference(n, model, n_c),
            }
        )
    return rows
