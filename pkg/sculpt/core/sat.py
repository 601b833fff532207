"""Contains classes describing 3-SAT instances and their exhaustive analysis.

Variables are 0-based. An :class:`Assignment` stores bit ``i`` as the truth
value of variable ``x_i`` (1 = TRUE), which is also bit ``i`` of the basis
index used by the rebit register.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from sculpt.core import config
from sculpt.core.exception import (
    ConflictError,
    ContractViolationError,
    ExhaustiveLimitError,
    GenerationError,
)

# Set up module logger
logger = logging.getLogger(__name__)

# Largest block of assignments evaluated at once during enumeration
_BLOCK_BITS = 20


@dataclass(frozen=True)
class Literal:
    """A possibly negated variable."""

    var: int
    negated: bool = False

    def __post_init__(self):
        if self.var < 0:
            raise ContractViolationError(f"Variable index {self.var} is negative")

    def __repr__(self):
        return f"{'¬' if self.negated else ''}x{self.var}"

    @property
    def sign(self) -> int:
        return -1 if self.negated else 1

    def satisfied_by(self, value) -> bool:
        return bool(value) != self.negated

    def to_dimacs(self) -> int:
        return -(self.var + 1) if self.negated else self.var + 1

    @classmethod
    def from_dimacs(cls, code: int) -> "Literal":
        return cls(abs(code) - 1, code < 0)


@dataclass(frozen=True)
class Clause:
    """An OR of one to three literals."""

    literals: Tuple[Literal, ...]

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))
        if not 1 <= len(self.literals) <= 3:
            raise ContractViolationError(
                f"Clauses hold 1 to 3 literals, got {len(self.literals)}"
            )
        if len({lit.var for lit in self.literals}) != len(self.literals):
            raise ContractViolationError(f"Clause {self} repeats a variable")

    def __repr__(self):
        return "(" + " ∨ ".join(repr(lit) for lit in self.literals) + ")"

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(lit.var for lit in self.literals)

    def key(self) -> frozenset:
        """Order-free identity used for the distinct-clause criterion."""
        return frozenset((lit.var, lit.negated) for lit in self.literals)

    def satisfied_by(self, bits) -> bool:
        return any(lit.satisfied_by(bits[lit.var]) for lit in self.literals)

    @classmethod
    def of(cls, *codes: int) -> "Clause":
        """Build a clause from DIMACS-style signed 1-based codes."""
        return cls(tuple(Literal.from_dimacs(c) for c in codes))


@dataclass(frozen=True)
class Assignment:
    """Truth values for ``n`` variables, bit ``i`` for ``x_i``."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ContractViolationError("Assignment bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def __iter__(self):
        return iter(self.bits)

    def __str__(self):
        return "".join(str(b) for b in self.bits)

    @property
    def index(self) -> int:
        """Basis index with bit ``i`` equal to ``x_i``."""
        return sum(b << i for i, b in enumerate(self.bits))

    @classmethod
    def from_index(cls, index: int, n: int) -> "Assignment":
        return cls(tuple((int(index) >> i) & 1 for i in range(n)))

    @classmethod
    def from_string(cls, text: str) -> "Assignment":
        return cls(tuple(int(c) for c in text.strip()))

    def hamming(self, other: "Assignment") -> int:
        return sum(a != b for a, b in zip(self.bits, other.bits))


def round_half_away(x: float) -> int:
    """Round to nearest integer, halves away from zero."""
    return int(np.sign(x) * np.floor(abs(x) + 0.5))


def clause_count(n: int, ratio: float = config.CLAUSE_RATIO) -> int:
    """Number of clauses generated for ``n`` variables."""
    return round_half_away(ratio * n)


class SatInstance:
    """An ordered list of clauses over ``n`` variables.

    Instances are immutable once built. The clause order is part of the
    instance: every solver cycle visits the clauses in this order.

    Attributes
    ----------
    n : int
        Number of variables
    clauses : tuple of Clause
        The clauses, in check order
    canonical : bool
        Whether the four generation criteria all hold
    solution_count : int or None
        Cached number of satisfying assignments, if known
    seed : int or None
        Seed the instance was generated from, if any
    """

    def __init__(
        self,
        n: int,
        clauses: Sequence[Clause],
        solution_count: Optional[int] = None,
        seed: Optional[int] = None,
        ratio: float = config.CLAUSE_RATIO,
    ) -> None:
        if n < 1:
            raise ContractViolationError("An instance needs at least one variable")
        self._n = int(n)
        self._clauses = tuple(clauses)
        for clause in self._clauses:
            for lit in clause:
                if lit.var >= self._n:
                    raise ContractViolationError(
                        f"Literal {lit!r} is out of range for {n} variables"
                    )
        if solution_count is not None and solution_count < 0:
            raise ContractViolationError("Solution count must be non-negative")
        self._solution_count = solution_count
        self._seed = seed
        self._criteria = _criteria(self._n, self._clauses, ratio)
        self._canonical = all(self._criteria.values())

    def __repr__(self):
        return f"SatInstance(n={self.n}, clauses={len(self.clauses)})"

    def __len__(self):
        return len(self._clauses)

    def __eq__(self, other):
        if not isinstance(other, SatInstance):
            return NotImplemented
        return self.n == other.n and self.clauses == other.clauses

    def __hash__(self):
        return hash((self.n, self.clauses))

    @property
    def n(self) -> int:
        return self._n

    @property
    def clauses(self) -> Tuple[Clause, ...]:
        return self._clauses

    @property
    def canonical(self) -> bool:
        return self._canonical

    @property
    def criteria(self) -> dict:
        return dict(self._criteria)

    @property
    def solution_count(self) -> Optional[int]:
        return self._solution_count

    @property
    def seed(self) -> Optional[int]:
        return self._seed

    def with_solution_count(self, count: Optional[int]) -> "SatInstance":
        return SatInstance(self.n, self.clauses, count, self.seed)

    def with_clauses(self, clauses: Sequence[Clause]) -> "SatInstance":
        """A derived instance over the same variables; the cached count is dropped."""
        return SatInstance(self.n, clauses, None, self.seed)


def _criteria(n, clauses, ratio):
    keys = [c.key() for c in clauses]
    positive = set()
    negative = set()
    for clause in clauses:
        for lit in clause:
            (negative if lit.negated else positive).add(lit.var)
    return {
        "distinct": len(set(keys)) == len(keys),
        "both_polarities": len(positive) == n and len(negative) == n,
        "three_variables": all(len(c) == 3 for c in clauses),
        "clause_count": len(clauses) == clause_count(n, ratio),
    }


def check_criteria(instance: SatInstance) -> dict:
    """Return the four generation criterion flags of an instance."""
    return instance.criteria


def evaluate(instance: SatInstance, a: Assignment) -> bool:
    """Whether the assignment satisfies every clause.

    Raises
    ------
    ContractViolationError
        If the assignment length does not match the instance.
    """
    if len(a) != instance.n:
        raise ContractViolationError(
            f"Assignment of length {len(a)} given for {instance.n} variables"
        )
    return all(clause.satisfied_by(a.bits) for clause in instance.clauses)


def violated_clauses(instance: SatInstance, a: Assignment) -> list:
    """Indices of the clauses the assignment falsifies."""
    if len(a) != instance.n:
        raise ContractViolationError(
            f"Assignment of length {len(a)} given for {instance.n} variables"
        )
    return [i for i, c in enumerate(instance.clauses) if not c.satisfied_by(a.bits)]


def _check_exhaustive(instance, limit):
    if instance.n > limit:
        raise ExhaustiveLimitError(instance.n, limit)


def _violation_blocks(instance):
    """Yield ``(indices, violated_count)`` arrays covering all assignments."""
    n = instance.n
    total = 1 << n
    block = min(total, 1 << _BLOCK_BITS)
    for start in range(0, total, block):
        z = np.arange(start, start + block, dtype=np.int64)
        bits = [((z >> v) & 1).astype(bool) for v in range(n)]
        violated = np.zeros(block, dtype=np.int32)
        for clause in instance.clauses:
            sat = np.zeros(block, dtype=bool)
            for lit in clause:
                sat |= ~bits[lit.var] if lit.negated else bits[lit.var]
            violated += ~sat
        yield z, violated


def count_solutions(
    instance: SatInstance, cap: int = 0, limit: int = config.EXHAUSTIVE_LIMIT
):
    """Count satisfying assignments by exhaustive enumeration.

    Parameters
    ----------
    instance : SatInstance
        The instance to analyse
    cap : int, optional
        Solutions are returned as a list only when there are at most ``cap``
        of them, by default 0
    limit : int, optional
        Largest variable count allowed, by default 30

    Returns
    -------
    tuple
        ``(count, solutions)`` where ``solutions`` is a list of
        :class:`Assignment` in increasing index order, or None.

    Raises
    ------
    ExhaustiveLimitError
        If ``instance.n`` exceeds ``limit``.
    """
    _check_exhaustive(instance, limit)
    count = 0
    found = []
    for z, violated in _violation_blocks(instance):
        hits = z[violated == 0]
        count += len(hits)
        if len(found) <= cap:
            found.extend(int(i) for i in hits[: cap + 1 - len(found)])
    logger.debug(f"Enumerated {instance!r}: {count} solution(s)")
    if count <= cap:
        return count, [Assignment.from_index(i, instance.n) for i in found]
    return count, None


def solutions(instance: SatInstance, limit: int = config.EXHAUSTIVE_LIMIT) -> list:
    """All satisfying assignments, in increasing index order."""
    _check_exhaustive(instance, limit)
    out = []
    for z, violated in _violation_blocks(instance):
        out.extend(Assignment.from_index(int(i), instance.n) for i in z[violated == 0])
    return out


def violation_histogram(
    instance: SatInstance, limit: int = config.EXHAUSTIVE_LIMIT
) -> np.ndarray:
    """Count assignments by number of violated clauses.

    Entry 0 is the solution count; entry 1 counts the nearly successful
    assignments that fail a single clause. Instances with many of these
    tend to converge slowly towards their target state.
    """
    _check_exhaustive(instance, limit)
    hist = np.zeros(len(instance) + 1, dtype=np.int64)
    for _, violated in _violation_blocks(instance):
        hist += np.bincount(violated, minlength=len(instance) + 1)
    return hist


def generate_instance(
    n: int,
    seed: int,
    target_ns: Optional[int] = None,
    rejection_cap: int = config.REJECTION_CAP,
    limit: int = config.EXHAUSTIVE_LIMIT,
    ratio: float = config.CLAUSE_RATIO,
) -> SatInstance:
    """Generate a random canonical 3-SAT instance.

    Each clause draws three distinct variables and three polarity bits
    uniformly; duplicate clauses are redrawn. Whole instances failing the
    both-polarities criterion (or, when ``target_ns`` is set, having a
    different solution count) are discarded and drawn afresh.

    Parameters
    ----------
    n : int
        Number of variables, at least 4
    seed : int
        Seed of the generator; output is deterministic in
        ``(n, seed, target_ns)``
    target_ns : int, optional
        Required number of solutions, by default None (any)
    rejection_cap : int, optional
        Maximum number of whole-instance draws, by default 10^6

    Raises
    ------
    GenerationError
        If no acceptable instance is found within ``rejection_cap`` draws.
    """
    if n < 4:
        raise ContractViolationError("Generation needs at least 4 variables")
    if target_ns is not None:
        if target_ns < 0:
            raise ContractViolationError("Target solution count must be non-negative")
        if n > limit:
            raise ExhaustiveLimitError(n, limit)
    m = clause_count(n, ratio)
    possible = 8 * n * (n - 1) * (n - 2) // 6
    if m > possible:
        raise ContractViolationError(f"{m} distinct clauses do not exist over {n} variables")

    rng = np.random.default_rng(seed)
    for attempt in range(1, rejection_cap + 1):
        drawn = _draw_clauses(n, m, rng)
        order = rng.permutation(m)
        instance = SatInstance(n, [drawn[i] for i in order], seed=seed, ratio=ratio)
        if not instance.criteria["both_polarities"]:
            continue
        if target_ns is not None:
            count, _ = count_solutions(instance, limit=limit)
            if count != target_ns:
                continue
            instance = instance.with_solution_count(count)
        logger.info(f"Generated n={n} seed={seed} after {attempt} draw(s)")
        return instance
    raise GenerationError(
        f"No instance with n={n}, target_ns={target_ns} (seed {seed})", rejection_cap
    )


def _draw_clauses(n, m, rng):
    seen = set()
    clauses = []
    while len(clauses) < m:
        variables = rng.choice(n, size=3, replace=False)
        negated = rng.integers(0, 2, size=3)
        clause = Clause(
            tuple(Literal(int(v), bool(s)) for v, s in zip(variables, negated))
        )
        if clause.key() in seen:
            continue
        seen.add(clause.key())
        clauses.append(clause)
    return clauses


def shuffled(instance: SatInstance, rng: np.random.Generator) -> SatInstance:
    """The same instance with its clause order re-randomized."""
    order = rng.permutation(len(instance))
    return SatInstance(
        instance.n,
        [instance.clauses[i] for i in order],
        instance.solution_count,
        instance.seed,
    )


def add_exclusion_clause(
    instance: SatInstance, a: Assignment, variables: Optional[Sequence[int]] = None
) -> SatInstance:
    """Append a clause that the found solution ``a`` falsifies.

    The clause is built over ``variables`` (the lowest three indices by
    default) with each literal taking the polarity opposite to ``a``. Every
    old solution agreeing with ``a`` on those variables is excluded.

    Raises
    ------
    ContractViolationError
        If ``a`` does not satisfy the instance.
    """
    if not evaluate(instance, a):
        raise ContractViolationError(f"Assignment {a} does not satisfy the instance")
    if variables is None:
        variables = range(min(3, instance.n))
    clause = Clause(tuple(Literal(int(v), bool(a[v])) for v in variables))
    logger.debug(f"Excluding {a} with {clause!r}")
    return instance.with_clauses(instance.clauses + (clause,))


def assign_and_simplify(instance: SatInstance, var: int, value) -> SatInstance:
    """Fix ``x_var = value`` and simplify the clauses.

    Satisfied clauses are dropped and the opposite literal is deleted from
    the rest. Variable indices are kept as they are.

    Raises
    ------
    ConflictError
        If a clause loses its last literal.
    """
    if not 0 <= var < instance.n:
        raise ContractViolationError(f"Variable {var} out of range for {instance.n}")
    value = bool(value)
    simplified = []
    for clause in instance.clauses:
        if any(lit.var == var and lit.satisfied_by(value) for lit in clause):
            continue
        remaining = tuple(lit for lit in clause if lit.var != var)
        if not remaining:
            raise ConflictError(f"Setting x{var}={int(value)} falsifies {clause!r}")
        simplified.append(Clause(remaining))
    return instance.with_clauses(simplified)


def clause_graph(instance: SatInstance) -> nx.Graph:
    """Graph of clause checks joined when they share a variable.

    Adjacent checks do not commute; checks with no edge between them can be
    applied in either order with identical results.
    """
    G = nx.Graph()
    by_var = {}
    for i, clause in enumerate(instance.clauses):
        G.add_node(i, clause=clause)
        for v in clause.variables:
            by_var.setdefault(v, []).append(i)
    for v, members in by_var.items():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                u, w = members[a], members[b]
                if G.has_edge(u, w):
                    G[u][w]["shared"].add(v)
                else:
                    G.add_edge(u, w, shared={v})
    return G


def checks_commute(first: Clause, second: Clause) -> bool:
    """Whether two clause checks act on disjoint variables."""
    return set(first.variables).isdisjoint(second.variables)


def instance_statistics(instance: SatInstance, limit: int = config.EXHAUSTIVE_LIMIT) -> dict:
    """Descriptive statistics used in sweep output."""
    G = clause_graph(instance)
    stats = {
        "n": instance.n,
        "clauses": len(instance),
        "noncommuting_pairs": G.number_of_edges(),
        "conflict_density": nx.density(G) if len(instance) > 1 else 0.0,
    }
    if instance.n <= limit:
        hist = violation_histogram(instance, limit)
        stats["solutions"] = int(hist[0])
        stats["near_solutions"] = int(hist[1]) if len(hist) > 1 else 0
    return stats
