"""Reading and writing instances in DIMACS CNF.

Two comment extensions are understood: ``c ns <k>`` records the number of
solutions and ``c seed <s>`` the generator seed. Other comments are
ignored on input. The emitted normal form is::

    c seed 7
    c ns 1
    p cnf 3 1
    1 -2 3 0
"""

import hashlib
import logging

from sculpt.core.exception import ContractViolationError, DimacsParseError
from sculpt.core.sat import Clause, Literal, SatInstance

logger = logging.getLogger(__name__)


def parse_dimacs(text: str) -> SatInstance:
    """Parse DIMACS CNF text

    Clauses may span several lines; a ``%`` line ends the clause section.

    Raises
    ------
    DimacsParseError
        On a malformed header, an out-of-range literal, or a clause with no
        literals, more than three literals or a repeated variable.
    """
    n = None
    declared = None
    solution_count = None
    seed = None
    clauses = []
    pending = []
    pending_line = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 3 and parts[1] in ("ns", "seed"):
                try:
                    value = int(parts[2])
                except ValueError:
                    raise DimacsParseError(f"bad annotation {line!r}", number)
                if parts[1] == "ns":
                    solution_count = value
                else:
                    seed = value
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if n is not None:
                raise DimacsParseError("duplicate problem line", number)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(f"invalid problem line {line!r}", number)
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(f"invalid problem line {line!r}", number)
            if n < 1 or declared < 0:
                raise DimacsParseError(f"invalid problem sizes {line!r}", number)
            continue
        if n is None:
            raise DimacsParseError("clause before problem line", number)

        for token in line.split():
            try:
                code = int(token)
            except ValueError:
                raise DimacsParseError(f"not an integer literal {token!r}", number)
            if pending_line is None:
                pending_line = number
            if code == 0:
                clauses.append(_build_clause(pending, n, pending_line))
                pending = []
                pending_line = None
                continue
            if abs(code) > n:
                raise DimacsParseError(f"literal {code} out of range for {n} variables", number)
            pending.append(code)

    if n is None:
        raise DimacsParseError("missing problem line", 0)
    if pending:
        raise DimacsParseError("clause not terminated by 0", pending_line)
    if len(clauses) != declared:
        raise DimacsParseError(
            f"header declares {declared} clauses but {len(clauses)} were read", 0
        )
    return SatInstance(n, clauses, solution_count=solution_count, seed=seed)


def _build_clause(codes, n, line):
    if len(codes) == 0:
        raise DimacsParseError("empty clause", line)
    if len(codes) > 3:
        raise DimacsParseError(f"clause of length {len(codes)} (at most 3 allowed)", line)
    try:
        return Clause(tuple(Literal.from_dimacs(c) for c in codes))
    except ContractViolationError as e:
        raise DimacsParseError(str(e), line)


def emit_dimacs(instance: SatInstance) -> str:
    """Return the DIMACS normal form of an instance."""
    out = []
    if instance.seed is not None:
        out.append(f"c seed {instance.seed}")
    if instance.solution_count is not None:
        out.append(f"c ns {instance.solution_count}")
    out.append(f"p cnf {instance.n} {len(instance)}")
    for clause in instance.clauses:
        out.append(" ".join(str(lit.to_dimacs()) for lit in clause) + " 0")
    return "\n".join(out) + "\n"


def read_dimacs(filepath) -> SatInstance:
    with open(filepath, "r") as infile:
        instance = parse_dimacs(infile.read())
    logger.debug(f"Read {instance!r} from {filepath}")
    return instance


def write_dimacs(instance: SatInstance, filepath) -> None:
    with open(filepath, "w") as outfile:
        outfile.write(emit_dimacs(instance))
    logger.debug(f"Wrote {instance!r} to {filepath}")


def instance_digest(instance: SatInstance) -> str:
    """SHA-256 of the clause body, independent of annotations."""
    body = [f"p cnf {instance.n} {len(instance)}"]
    body.extend(" ".join(str(l.to_dimacs()) for l in c) + " 0" for c in instance.clauses)
    return hashlib.sha256("\n".join(body).encode("utf-8")).hexdigest()
