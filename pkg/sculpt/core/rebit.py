"""Contains the real-amplitude qubit register and its measurement primitives.

Bit ``i`` of an amplitude index is the z-basis value of qubit ``i`` (index 0
is ``|00...0>``). All amplitudes are real 64-bit floats.

The rotation used throughout is

.. math::

    Y(\\theta) = \\begin{pmatrix} \\cos\\theta/2 & \\sin\\theta/2 \\\\
                                  -\\sin\\theta/2 & \\cos\\theta/2 \\end{pmatrix}

so that ``Y(pi/2)|0> = |->`` and the target factor of a variable with
truth value ``x`` is ``Y(L*theta)|+>`` with ``L = -1`` for TRUE and ``+1``
for FALSE.
"""

import enum
import logging
import math
import struct
import threading
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence

import numba as nb
import numpy as np
import scipy.linalg

from sculpt.core import config
from sculpt.core.exception import (
    CapacityError,
    CertainFailureError,
    ContractViolationError,
    IllConditionedError,
    StateConsumedError,
)
from sculpt.core.noise import BaseNoise, NoNoise
from sculpt.core.sat import Assignment, Clause

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2
_ANGLE_TOL = 1e-12


class CheckOutcome(enum.Enum):
    PASS = "pass"
    FAIL = "fail"


def y_matrix(angle: float) -> np.ndarray:
    """The 2x2 real rotation ``Y(angle)``."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, s], [-s, c]])


def target_factor(value, theta: float) -> np.ndarray:
    """Single-qubit factor ``Y(L*theta)|+>`` for truth value ``value``.

    With ``phi = (2*theta + pi)/4`` the factor is ``(cos phi, sin phi)`` for
    TRUE and ``(sin phi, cos phi)`` for FALSE.
    """
    phi = (2 * theta + math.pi) / 4
    c, s = math.cos(phi), math.sin(phi)
    return np.array([c, s]) if value else np.array([s, c])


@dataclass(frozen=True)
class TargetSpec:
    """The product state encoding an assignment at angle ``theta``."""

    assignment: Assignment
    theta: float

    def __post_init__(self):
        if not -_ANGLE_TOL <= self.theta <= HALF_PI + _ANGLE_TOL:
            raise ContractViolationError(f"theta={self.theta} outside [0, pi/2]")

    @property
    def n(self) -> int:
        return len(self.assignment)

    def factors(self) -> list:
        return [target_factor(b, self.theta) for b in self.assignment]


def required_bytes(n: int) -> int:
    return 8 * (1 << n)


def _check_capacity(n, max_qubits):
    if n < 1:
        raise ContractViolationError("A register needs at least one qubit")
    if n > max_qubits:
        raise CapacityError(
            f"{n} qubits need {required_bytes(n) / 2**20:.0f} MiB of amplitudes; "
            f"the cap is {max_qubits} qubits ({required_bytes(max_qubits) / 2**20:.0f} MiB)"
        )


# -- kernels -----------------------------------------------------------------

# Fixed partial-sum blocks keep reductions bit-identical for any thread count
_BLOCKS = 64
# Smaller registers run the serial kernels
_PARALLEL_MIN_QUBITS = 14


def _rotate(amps, qubit, angle):
    """Apply ``Y(angle)`` to ``qubit`` of a flat amplitude array in place."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    v = amps.reshape(-1, 2, 1 << qubit)
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] *= c
    v[:, 0, :] += s * b
    b *= c
    b -= s * a


@nb.njit(nogil=True)
def _group_base(g, qubits):
    """Index of the ``g``-th amplitude whose clause qubits are all zero."""
    i = np.int64(g)
    for q in qubits:
        i = ((i >> q) << (q + 1)) + (i & ((1 << q) - 1))
    return i


def _fail_norm(amps, qubits, offsets, fail):
    nrest = amps.shape[0] >> qubits.shape[0]
    size = (nrest + _BLOCKS - 1) // _BLOCKS
    partial = np.zeros(_BLOCKS)
    for b in nb.prange(_BLOCKS):
        total = 0.0
        for g in range(b * size, min(nrest, (b + 1) * size)):
            base = _group_base(g, qubits)
            acc = 0.0
            for p in range(offsets.shape[0]):
                acc += fail[p] * amps[base + offsets[p]]
            total += acc * acc
        partial[b] = total
    out = 0.0
    for b in range(_BLOCKS):
        out += partial[b]
    return out


def _project(amps, qubits, offsets, fail, rot, ret, scale):
    k = qubits.shape[0]
    m = offsets.shape[0]
    for g in nb.prange(amps.shape[0] >> k):
        base = _group_base(g, qubits)
        acc = 0.0
        for p in range(m):
            acc += fail[p] * amps[base + offsets[p]]
        for j in range(k):
            step = 1 << j
            for p in range(m):
                if p & step == 0:
                    i0 = base + offsets[p]
                    i1 = base + offsets[p + step]
                    a = amps[i0]
                    b = amps[i1]
                    amps[i0] = rot[j, 0, 0] * a + rot[j, 0, 1] * b
                    amps[i1] = rot[j, 1, 0] * a + rot[j, 1, 1] * b
        for p in range(m):
            i = base + offsets[p]
            amps[i] = scale * (amps[i] - ret[p] * acc)


_fail_norm_parallel = nb.njit(parallel=True, nogil=True)(_fail_norm)
_fail_norm_serial = nb.njit(nogil=True)(_fail_norm)
_project_parallel = nb.njit(parallel=True, nogil=True)(_project)
_project_serial = nb.njit(nogil=True)(_project)


def _kernels(n):
    """Threaded kernels for large registers on the main thread, serial ones otherwise."""
    if n >= _PARALLEL_MIN_QUBITS and threading.current_thread() is threading.main_thread():
        return _fail_norm_parallel, _project_parallel
    return _fail_norm_serial, _project_serial


def _fail_vector(angle):
    """Row of ``Y(angle)`` that maps onto ``|0>``, as a column vector."""
    return np.array([math.cos(angle / 2), math.sin(angle / 2)])


def _return_vector(angle):
    """``Y(angle)|0>``."""
    return np.array([math.cos(angle / 2), -math.sin(angle / 2)])


def _check_angles(clause, theta, noise):
    """Forward and backward frame angles per literal, with noise applied.

    The physical rotations ``Y(s*theta)`` (before the three-qubit test) and
    ``Y(-s*theta)`` (after it) are each perturbed independently; the fixed
    quarter turns of the frame change are exact.
    """
    forward = [noise.perturb(lit.sign * theta) - HALF_PI for lit in clause]
    backward = [HALF_PI - noise.perturb(lit.sign * theta) for lit in clause]
    return forward, backward


class CheckPlan:
    """Coefficients of one clause check, laid out for the fused kernels

    A check rotates its qubits into the fail frame, removes the all-``|0>``
    pattern and rotates back. On the full register this is
    ``psi -> R psi - g (x) F`` where ``R`` rotates each clause qubit by the
    sum of its two frame angles, ``F`` contracts ``psi`` with the fail row
    of each forward rotation and ``g`` is the product of the backward
    rotations applied to ``|0>``.

    Attributes
    ----------
    qubits : numpy.ndarray
        Clause qubits in increasing order
    offsets : numpy.ndarray
        Index offset of each local bit pattern; bit ``j`` is ``qubits[j]``
    fail : numpy.ndarray
        Fail-row coefficient of each local pattern
    ret : numpy.ndarray
        Return-vector coefficient of each local pattern
    rot : numpy.ndarray
        ``(k, 2, 2)`` net rotation of each clause qubit
    """

    def __init__(self, clause: Clause, theta: float, noise: BaseNoise) -> None:
        forward, backward = _check_angles(clause, theta, noise)
        order = np.argsort([lit.var for lit in clause])
        k = len(order)
        self.qubits = np.array([clause.literals[j].var for j in order], dtype=np.int64)
        bits = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
        self.offsets = np.ascontiguousarray((bits << self.qubits).sum(axis=1), dtype=np.int64)
        fails = np.array([_fail_vector(forward[j]) for j in order])
        returns = np.array([_return_vector(backward[j]) for j in order])
        self.fail = np.prod(fails[np.arange(k), bits], axis=1)
        self.ret = np.prod(returns[np.arange(k), bits], axis=1)
        self.rot = np.array([y_matrix(forward[j] + backward[j]) for j in order])


class RebitState:
    """A register of ``n`` rebits

    Attributes
    ----------
    n : int
        Number of qubits
    amps : numpy.ndarray
        Read-only view of the ``2**n`` amplitudes
    """

    def __init__(self, amps, copy: bool = True) -> None:
        amps = np.array(amps, dtype=np.float64) if copy else np.asarray(amps, dtype=np.float64)
        size = amps.shape[0] if amps.ndim == 1 else 0
        if size < 2 or size & (size - 1):
            raise ContractViolationError("Amplitude array length must be a power of two >= 2")
        self._amps = amps
        self._n = size.bit_length() - 1
        self._consumed = None

    def __repr__(self):
        return f"RebitState(n={self.n})"

    @property
    def n(self) -> int:
        return self._n

    @property
    def amps(self) -> np.ndarray:
        view = self._amps.view()
        view.flags.writeable = False
        return view

    @property
    def alive(self) -> bool:
        return self._consumed is None

    def copy(self) -> "RebitState":
        self._check_alive()
        return RebitState(self._amps, copy=True)

    def _check_alive(self):
        if self._consumed is not None:
            raise StateConsumedError(f"Register was {self._consumed}")

    def _check_clause(self, clause):
        if not 1 <= len(clause) <= 3:
            raise ContractViolationError("Clause checks act on 1 to 3 qubits")
        for lit in clause:
            if lit.var >= self.n:
                raise ContractViolationError(f"Literal {lit!r} out of range for {self.n} qubits")

    @classmethod
    def plus(cls, n: int, max_qubits: int = config.MAX_QUBITS) -> "RebitState":
        """Every qubit in ``|+>``."""
        _check_capacity(n, max_qubits)
        return cls(np.full(1 << n, 2.0 ** (-n / 2)), copy=False)

    @classmethod
    def basis(cls, a: Assignment) -> "RebitState":
        amps = np.zeros(1 << len(a))
        amps[a.index] = 1.0
        return cls(amps, copy=False)

    def norm(self) -> float:
        return float(math.sqrt(np.dot(self._amps, self._amps)))

    def normalize(self) -> None:
        self._amps /= self.norm()

    def apply_y(self, qubit: int, angle: float, noise: Optional[BaseNoise] = None) -> None:
        """Rotate one qubit by ``Y(angle)``, perturbed by ``noise`` if given."""
        self._check_alive()
        if not 0 <= qubit < self.n:
            raise ContractViolationError(f"Qubit {qubit} out of range for {self.n} qubits")
        if noise is not None:
            angle = noise.perturb(angle)
        _rotate(self._amps, qubit, angle)

    # -- clause checks ---------------------------------------------------------

    def _degenerate(self, clause, theta):
        """Validate a check; True when it is the ``theta == 0`` no-op."""
        self._check_alive()
        self._check_clause(clause)
        return theta == 0.0

    def _pass_probability(self, plan):
        fail_norm = _kernels(self.n)[0]
        return max(0.0, 1.0 - float(fail_norm(self._amps, plan.qubits, plan.offsets, plan.fail)))

    def _apply_plan(self, plan, p_pass):
        project = _kernels(self.n)[1]
        project(
            self._amps, plan.qubits, plan.offsets, plan.fail, plan.rot, plan.ret,
            1.0 / math.sqrt(p_pass),
        )

    def _frame_check(self, clause, theta, noise, rng=None, floor=config.PASS_FLOOR):
        """Rotate into the fail frame, zero the all-``|0>`` pattern, rotate back."""
        forward, backward = _check_angles(clause, theta, noise or NoNoise())
        qubits = [lit.var for lit in clause]
        for q, a in zip(qubits, forward):
            _rotate(self._amps, q, a)
        n = self.n
        idx = [slice(None)] * n
        for q in qubits:
            idx[n - 1 - q] = 0
        idx = tuple(idx)
        psi = self._amps.reshape((2,) * n)
        fail = psi[idx]
        p_pass = max(0.0, 1.0 - float(np.sum(fail * fail)))
        if rng is not None and not rng.random() < p_pass:
            self._consumed = "aborted by a failed clause check"
            return p_pass, CheckOutcome.FAIL
        if p_pass < floor:
            for q, a in zip(qubits, forward):
                _rotate(self._amps, q, -a)
            raise CertainFailureError(f"Check {clause!r} at theta={theta} cannot pass")
        psi[idx] = 0.0
        self._amps *= 1.0 / math.sqrt(p_pass)
        for q, b in zip(qubits, backward):
            _rotate(self._amps, q, b)
        return p_pass, CheckOutcome.PASS

    def clause_check(
        self,
        clause: Clause,
        theta: float,
        noise: Optional[BaseNoise] = None,
        floor: float = config.PASS_FLOOR,
        method: str = "projector",
    ) -> float:
        """Apply a clause check, keep the passing branch, return its probability.

        At ``theta == 0`` both truth values map to ``|+>`` and the check
        carries no information; it is skipped, returning 1 with the register
        and the noise stream untouched.

        Parameters
        ----------
        clause : Clause
            The clause to check, 1 to 3 literals
        theta : float
            The check angle in radians; 0 is a no-op, pi/2 an orthogonal test
        noise : BaseNoise, optional
            Perturbs the two physical rotations of every literal
        floor : float, optional
            Pass probabilities below this are treated as certain failure
        method : {"projector", "frame"}
            ``projector`` applies the check as a rank-one update in two fused
            passes over the amplitudes. ``frame`` rotates each clause qubit
            into the fail frame, zeroes the all-``|0>`` component and rotates
            back, one numpy operation at a time.

        Raises
        ------
        CertainFailureError
            If the pass probability is below ``floor``; the state is left
            unchanged.
        """
        if method not in ("projector", "frame"):
            raise ContractViolationError(f"Unknown check method {method!r}")
        if self._degenerate(clause, theta):
            return 1.0
        if method == "frame":
            return self._frame_check(clause, theta, noise, floor=floor)[0]
        plan = CheckPlan(clause, theta, noise or NoNoise())
        p_pass = self._pass_probability(plan)
        if p_pass < floor:
            raise CertainFailureError(f"Check {clause!r} at theta={theta} cannot pass")
        self._apply_plan(plan, p_pass)
        return p_pass

    def clause_check_sample(
        self,
        clause: Clause,
        theta: float,
        rng: np.random.Generator,
        noise: Optional[BaseNoise] = None,
        method: str = "projector",
    ):
        """Sample the ancilla outcome of a clause check.

        On a pass the register is updated as in :meth:`clause_check`; on a
        failure it is marked aborted and refuses further use. A ``theta == 0``
        check passes without drawing from ``rng``.

        Returns
        -------
        tuple
            ``(outcome, p_pass)``
        """
        if method not in ("projector", "frame"):
            raise ContractViolationError(f"Unknown check method {method!r}")
        if self._degenerate(clause, theta):
            return CheckOutcome.PASS, 1.0
        if method == "frame":
            p_pass, outcome = self._frame_check(clause, theta, noise, rng=rng, floor=0.0)
            return outcome, p_pass
        plan = CheckPlan(clause, theta, noise or NoNoise())
        p_pass = self._pass_probability(plan)
        if not rng.random() < p_pass:
            self._consumed = "aborted by a failed clause check"
            return CheckOutcome.FAIL, p_pass
        self._apply_plan(plan, p_pass)
        return CheckOutcome.PASS, p_pass

    # -- readout ---------------------------------------------------------------

    def overlap(self, spec: TargetSpec) -> float:
        """``<theta_spec|psi>`` computed without building the target."""
        self._check_alive()
        if spec.n != self.n:
            raise ContractViolationError(f"Target of {spec.n} qubits for a {self.n}-qubit register")
        out = self._amps
        for f in reversed(spec.factors()):
            v = out.reshape(2, -1)
            out = f[0] * v[0] + f[1] * v[1]
        return float(out[0])

    def fidelity(self, spec: TargetSpec) -> float:
        return self.overlap(spec) ** 2

    def probabilities(self) -> np.ndarray:
        self._check_alive()
        return self._amps * self._amps

    def sample(self, rng: np.random.Generator, shots: int = 1) -> np.ndarray:
        """Draw basis indices without consuming the register."""
        self._check_alive()
        cdf = np.cumsum(self._amps * self._amps)
        u = rng.random(shots) * cdf[-1]
        return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.shape[0] - 1)

    def measure(self, rng: np.random.Generator) -> Assignment:
        """Measure every qubit in the z basis; the register is consumed."""
        index = int(self.sample(rng, 1)[0])
        self._consumed = "measured"
        return Assignment.from_index(index, self.n)

    def dump_snapshot(self, filepath, theta: float = float("nan"), step: int = 0) -> None:
        """Write a debugging snapshot: a small header then raw ``<f8`` amplitudes."""
        with open(filepath, "wb") as outfile:
            outfile.write(b"SCULPTSV")
            outfile.write(struct.pack("<iqd", self.n, step, theta))
            outfile.write(self._amps.astype("<f8").tobytes())
        logger.debug(f"Wrote {self!r} snapshot (step {step}) to {filepath}")

    @classmethod
    def load_snapshot(cls, filepath):
        """Read a snapshot back as ``(state, theta, step)``."""
        with open(filepath, "rb") as infile:
            if infile.read(8) != b"SCULPTSV":
                raise ContractViolationError(f"{filepath} is not a register snapshot")
            n, step, theta = struct.unpack("<iqd", infile.read(struct.calcsize("<iqd")))
            amps = np.frombuffer(infile.read(), dtype="<f8")
        if amps.shape[0] != 1 << n:
            raise ContractViolationError(f"{filepath} is truncated")
        return cls(amps.astype(np.float64), copy=False), theta, step


class SolutionSubspace:
    """Fidelity with the span of several target states

    The target states of distinct solutions are independent but not
    orthogonal: their Gram matrix has entries ``cos(theta)**d`` with ``d``
    the Hamming distance. The squared norm of the projection of a state onto
    the span is ``v^T M^{-1} v`` with ``v`` the vector of overlaps.

    Raises
    ------
    IllConditionedError
        If the Gram matrix condition number exceeds the limit.
    """

    def __init__(
        self,
        solutions: Sequence[Assignment],
        theta: float,
        condition_limit: float = config.CONDITION_LIMIT,
    ) -> None:
        solutions = list(solutions)
        if not solutions:
            raise ContractViolationError("At least one solution is needed")
        if len(set(solutions)) != len(solutions):
            raise ContractViolationError("Solutions must be distinct")
        self._specs = [TargetSpec(s, theta) for s in solutions]
        distances = np.array([[a.hamming(b) for b in solutions] for a in solutions])
        self._gram = np.power(math.cos(theta), distances)
        condition = float(np.linalg.cond(self._gram))
        if not condition <= condition_limit:
            raise IllConditionedError(condition, condition_limit)
        self._factor = scipy.linalg.cho_factor(self._gram)

    @property
    def gram(self) -> np.ndarray:
        return self._gram.copy()

    @property
    def specs(self) -> list:
        return list(self._specs)

    def fidelity(self, state: RebitState) -> float:
        v = np.array([state.overlap(s) for s in self._specs])
        return float(v @ scipy.linalg.cho_solve(self._factor, v))


# -- operation-level functions -------------------------------------------------


def init_plus(n: int, max_qubits: int = config.MAX_QUBITS) -> RebitState:
    return RebitState.plus(n, max_qubits)


def apply_y(state: RebitState, qubit: int, angle: float, noise: Optional[BaseNoise] = None) -> None:
    state.apply_y(qubit, angle, noise)


def target_state(spec: TargetSpec) -> RebitState:
    """Materialize the product state ``(x) Y(L_i*theta)|+>``."""
    return RebitState(reduce(np.kron, reversed(spec.factors())), copy=False)


def clause_check_pass(state, clause, theta, noise=None, **kwargs) -> float:
    return state.clause_check(clause, theta, noise, **kwargs)


def clause_check_sample(state, clause, theta, noise, rng, **kwargs) -> CheckOutcome:
    return state.clause_check_sample(clause, theta, rng, noise, **kwargs)[0]


def overlap(state: RebitState, spec: TargetSpec) -> float:
    return state.overlap(spec)


def fidelity_usa(state: RebitState, spec: TargetSpec) -> float:
    return state.fidelity(spec)


def fidelity_subspace(state: RebitState, solutions, theta: float, **kwargs) -> float:
    return SolutionSubspace(solutions, theta, **kwargs).fidelity(state)


def measure_all(state: RebitState, rng: np.random.Generator) -> Assignment:
    return state.measure(rng)


def norm(state: RebitState) -> float:
    return state.norm()
