import itertools

import numpy as np
import pytest

from sculpt.core.exception import (
    ConflictError,
    ContractViolationError,
    ExhaustiveLimitError,
)
from sculpt.core.sat import (
    Assignment,
    Clause,
    Literal,
    SatInstance,
    add_exclusion_clause,
    assign_and_simplify,
    check_criteria,
    checks_commute,
    clause_count,
    clause_graph,
    count_solutions,
    evaluate,
    generate_instance,
    instance_statistics,
    shuffled,
    solutions,
    violated_clauses,
    violation_histogram,
)


def test_clause_count():
    assert clause_count(24) == 102
    assert clause_count(20) == 85
    assert clause_count(10) == 43


def test_clause_rejects_repeated_variable():
    with pytest.raises(ContractViolationError):
        Clause((Literal(0), Literal(0, True)))
    with pytest.raises(ContractViolationError):
        Clause.of(1, 2, 3, 4)


def test_generate_is_deterministic():
    a = generate_instance(10, 42)
    b = generate_instance(10, 42)
    assert a == b
    assert a.clauses == b.clauses
    assert generate_instance(10, 43) != a


def test_generate_is_canonical():
    instance = generate_instance(12, 3)
    assert len(instance) == clause_count(12)
    assert instance.canonical
    assert all(check_criteria(instance).values())
    assert instance.seed == 3


def test_generate_target_solution_count(usa8):
    count, found = count_solutions(usa8, cap=1)
    assert count == 1
    assert usa8.solution_count == 1
    assert evaluate(usa8, found[0])


def test_generate_needs_four_variables():
    with pytest.raises(ContractViolationError):
        generate_instance(3, 0)


def test_evaluate_length_mismatch(hand_instance):
    with pytest.raises(ContractViolationError):
        evaluate(hand_instance, Assignment.from_string("10"))


def test_hand_instance_solutions(hand_instance, hand_solution):
    assert solutions(hand_instance) == [hand_solution]
    assert violated_clauses(hand_instance, hand_solution) == []
    assert len(violated_clauses(hand_instance, Assignment.from_string("000"))) == 1


def test_violation_histogram(usa8):
    hist = violation_histogram(usa8)
    assert hist.sum() == 2**8
    assert hist[0] == 1


def test_exhaustive_limit(usa8):
    with pytest.raises(ExhaustiveLimitError):
        count_solutions(usa8, limit=6)


def test_add_exclusion_clause(two_solution_instance):
    a = Assignment.from_string("101")
    reduced = add_exclusion_clause(two_solution_instance, a)
    assert not evaluate(reduced, a)
    assert solutions(reduced) == [Assignment.from_string("100")]
    with pytest.raises(ContractViolationError):
        add_exclusion_clause(two_solution_instance, Assignment.from_string("000"))


def test_assign_and_simplify(two_solution_instance):
    reduced = assign_and_simplify(two_solution_instance, 2, False)
    assert all(2 not in c.variables for c in reduced.clauses)
    assert len(reduced) < len(two_solution_instance)
    assert evaluate(reduced, Assignment.from_string("100"))


def test_assign_and_simplify_conflict():
    instance = SatInstance(2, [Clause.of(1), Clause.of(-1, 2)])
    with pytest.raises(ConflictError):
        assign_and_simplify(instance, 0, False)


def test_clause_graph():
    instance = SatInstance(8, [Clause.of(1, 2, 3), Clause.of(3, 4, 5), Clause.of(6, 7, 8)])
    G = clause_graph(instance)
    assert G.has_edge(0, 1)
    assert G[0][1]["shared"] == {2}
    assert not G.has_edge(0, 2)
    assert checks_commute(instance.clauses[0], instance.clauses[2])
    assert not checks_commute(instance.clauses[0], instance.clauses[1])


def test_instance_statistics(usa8):
    stats = instance_statistics(usa8)
    assert stats["solutions"] == 1
    assert stats["near_solutions"] == violation_histogram(usa8)[1]
    assert 0.0 < stats["conflict_density"] <= 1.0


def test_shuffled_keeps_clauses(usa8):
    other = shuffled(usa8, np.random.default_rng(0))
    assert sorted(map(repr, other.clauses)) == sorted(map(repr, usa8.clauses))
    assert other.clauses != usa8.clauses


def enumerate_descending(instance):
    """Satisfying assignments found by walking variables from the highest index down."""
    found = []
    for bits in itertools.product((0, 1), repeat=instance.n):
        a = Assignment(tuple(reversed(bits)))
        if all(any(lit.satisfied_by(a[lit.var]) for lit in c) for c in instance.clauses):
            found.append(a)
    return sorted(found, key=lambda a: a.index)


def relabel(instance, perm):
    """Rename variable ``v`` to ``perm[v]`` throughout."""
    clauses = [
        Clause(tuple(Literal(int(perm[lit.var]), lit.negated) for lit in c))
        for c in instance.clauses
    ]
    return SatInstance(instance.n, clauses)


@pytest.mark.parametrize("seed", range(6))
def test_enumeration_matches_second_walk(seed):
    instance = generate_instance(7, seed)
    count, _ = count_solutions(instance)
    assert solutions(instance) == enumerate_descending(instance)
    assert count == len(solutions(instance))


@pytest.mark.parametrize("seed", range(4))
def test_count_invariant_under_permutations(seed):
    instance = generate_instance(9, 100 + seed)
    count, _ = count_solutions(instance)
    rng = np.random.default_rng(seed)
    assert count_solutions(shuffled(instance, rng))[0] == count
    perm = rng.permutation(instance.n)
    relabelled = relabel(instance, perm)
    assert count_solutions(relabelled)[0] == count
    inverse = np.argsort(perm)
    moved = {Assignment(tuple(a[int(v)] for v in inverse)) for a in solutions(instance)}
    assert set(solutions(relabelled)) == moved


def test_generator_criteria_over_many_seeds():
    for n in (5, 8, 13):
        for seed in range(25):
            instance = generate_instance(n, seed)
            assert all(check_criteria(instance).values()), (n, seed)
            assert len({c.key() for c in instance.clauses}) == clause_count(n)
            assert all(len(set(c.variables)) == 3 for c in instance.clauses)
