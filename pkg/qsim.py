import logging
from enum import Enum
from itertools import count
from typing import NewType, Sequence

import numpy as np

from errors import ConfigurationError, ProtocolFault

logger = logging.getLogger(__name__)

MAX_QUBITS = 4
NORM_TOLERANCE = 1e-9
SQRT2_INV = 1 / np.sqrt(2)

ParticleHandle = NewType("ParticleHandle", int)


class PauliLabel(Enum):
    I = "I"
    Z = "Z"
    X = "X"
    Y = "Y"


# Y is the real-valued i*sigma_y = |0><1| - |1><0| used as the fourth encoding operation.
PAULI_MATRICES = {
    PauliLabel.I: np.eye(2, dtype=complex),
    PauliLabel.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    PauliLabel.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliLabel.Y: np.array([[0, 1], [-1, 0]], dtype=complex),
}

CNOT_MATRIX = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
], dtype=complex)


class BellOutcome(Enum):
    PSI_MINUS = "PsiMinus"
    PSI_PLUS = "PsiPlus"
    PHI_MINUS = "PhiMinus"
    PHI_PLUS = "PhiPlus"


BELL_ORDER = (
    BellOutcome.PSI_MINUS,
    BellOutcome.PSI_PLUS,
    BellOutcome.PHI_MINUS,
    BellOutcome.PHI_PLUS,
)

# Rows in basis order |00>, |01>, |10>, |11>.
BELL_BASIS = np.array([
    [0, 1, -1, 0],
    [0, 1, 1, 0],
    [1, 0, 0, -1],
    [1, 0, 0, 1],
], dtype=complex) * SQRT2_INV

BELL_VECTORS = {outcome: BELL_BASIS[k] for k, outcome in enumerate(BELL_ORDER)}

_BELL_TRANSFORM = {
    PauliLabel.I: BellOutcome.PSI_MINUS,
    PauliLabel.Z: BellOutcome.PSI_PLUS,
    PauliLabel.X: BellOutcome.PHI_MINUS,
    PauliLabel.Y: BellOutcome.PHI_PLUS,
}


def fidelity(u, v):
    """Overlap |<u|v>|^2 of two normalized amplitude vectors; blind to global phase."""
    return float(abs(np.vdot(u, v)) ** 2)


class QState:
    """
	A normalized pure state over up to MAX_QUBITS particles.

    Qubit k of the state belongs to ``handles[k]``; amplitudes are indexed with
    qubit 0 as the most significant bit, so a two-qubit vector reads
    |00>, |01>, |10>, |11>.
    """

    def __init__(self, amplitudes, handles):
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        handles = list(handles)
        if len(handles) > MAX_QUBITS:
            raise ConfigurationError(
                f"Joint state of {len(handles)} qubits exceeds the budget of {MAX_QUBITS}."
            )
        if amplitudes.size != 2 ** len(handles):
            raise ProtocolFault(
                f"{amplitudes.size} amplitudes do not describe {len(handles)} qubits."
            )
        norm = np.linalg.norm(amplitudes)
        if norm == 0:
            raise ProtocolFault("Cannot build a state from a zero vector.")
        self.amplitudes = amplitudes / norm
        self.handles = handles

    @property
    def num_qubits(self):
        return len(self.handles)

    def index_of(self, handle):
        return self.handles.index(handle)

    def norm(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def tensor(self, other):
        return QState(np.kron(self.amplitudes, other.amplitudes), self.handles + other.handles)

    def _front(self, positions):
        """Move the given qubits to the leading axes and flatten the rest."""
        n = self.num_qubits
        psi = self.amplitudes.reshape((2,) * n)
        psi = np.moveaxis(psi, positions, tuple(range(len(positions))))
        return psi.reshape(2 ** len(positions), -1)

    def _restore(self, block, positions):
        n = self.num_qubits
        psi = block.reshape((2,) * n)
        psi = np.moveaxis(psi, tuple(range(len(positions))), positions)
        self.amplitudes = psi.reshape(-1)

    def apply(self, matrix, positions):
        positions = tuple(positions)
        block = self._front(positions)
        self._restore(matrix @ block, positions)

    def reordered(self, handles):
        """Amplitudes with qubits arranged in the order of ``handles``."""
        positions = tuple(self.index_of(h) for h in handles)
        psi = self.amplitudes.reshape((2,) * self.num_qubits)
        return np.transpose(psi, positions).reshape(-1)

    def __repr__(self):
        return f"<QState qubits={self.handles}>"


class EntanglementRegistry:
    """
	Tracks which particles share a joint state.

    Every live handle is bound to exactly one QState. Operations that span two
    states tensor-merge them first; measurements split the measured qubits back
    out, so disjoint states are always the unentangled partitions.

    Args:
        audit (bool): Re-check the partition and every norm after each operation.
    """

    def __init__(self, audit=False):
        self.audit_enabled = audit
        self._owner = {}
        self._ids = count()

    def __contains__(self, handle):
        return handle in self._owner

    @property
    def handles(self):
        return list(self._owner)

    def states(self):
        unique = {}
        for state in self._owner.values():
            unique[id(state)] = state
        return list(unique.values())

    def _bind(self, state):
        for handle in state.handles:
            self._owner[handle] = state

    def new_state(self, amplitudes):
        """
	Registers a fresh joint state and returns its handles.

        Args:
            amplitudes (Sequence[complex]): 2^k amplitudes for k new particles.

        Returns:
            tuple[ParticleHandle, ...]: One fresh handle per qubit, in qubit order.
        """
        size = len(amplitudes)
        k = size.bit_length() - 1
        handles = [ParticleHandle(next(self._ids)) for _ in range(k)]
        self._bind(QState(amplitudes, handles))
        self.checkpoint()
        return tuple(handles)

    def new_qubit(self):
        (handle,) = self.new_state([1, 0])
        return handle

    def locate(self, handle):
        """
	Resolves a handle to its joint state and qubit position.

        Raises:
            ProtocolFault: If the handle is not live.
        """
        try:
            state = self._owner[handle]
        except KeyError:
            raise ProtocolFault(f"Unknown particle handle {handle!r}.") from None
        return state, state.index_of(handle)

    def require(self, handles: Sequence[ParticleHandle]):
        for handle in handles:
            self.locate(handle)

    def join(self, a, b):
        """Returns one state holding both particles, merging their states if needed."""
        state_a, _ = self.locate(a)
        state_b, _ = self.locate(b)
        if state_a is state_b:
            return state_a
        merged = state_a.tensor(state_b)
        self._bind(merged)
        logger.debug("Merged %s and %s into %s", state_a, state_b, merged)
        return merged

    def replace(self, old, new_states):
        covered = sorted(h for state in new_states for h in state.handles)
        if covered != sorted(old.handles):
            raise ProtocolFault("Replacement states must cover exactly the old qubits.")
        for state in new_states:
            self._bind(state)

    def joint_amplitudes(self, handles):
        """
	Returns the amplitudes of the state formed by exactly ``handles``.

        Args:
            handles (Sequence[ParticleHandle]): All particles of one joint state, in
                the qubit order wanted for the result.

        Returns:
            numpy.ndarray: A copy of the amplitude vector.

        Raises:
            ProtocolFault: If the handles do not make up one whole state.
        """
        state, _ = self.locate(handles[0])
        if sorted(handles) != sorted(state.handles):
            raise ProtocolFault(
                f"Handles {list(handles)} do not form one joint state {state.handles}."
            )
        return state.reordered(handles).copy()

    def checkpoint(self):
        if self.audit_enabled:
            self.audit()

    def audit(self):
        """
	Verifies registry soundness.

        Every handle must appear in the state it is bound to, no handle may appear
        in two states, and every state must be normalized.

        Raises:
            ProtocolFault: On the first violated condition.
        """
        seen = set()
        for state in self.states():
            if abs(state.norm() - 1) > NORM_TOLERANCE:
                raise ProtocolFault(f"{state} lost normalization: {state.norm()}")
            for handle in state.handles:
                if handle in seen:
                    raise ProtocolFault(f"Handle {handle} appears in two states.")
                if self._owner.get(handle) is not state:
                    raise ProtocolFault(f"Handle {handle} is bound to a different state.")
                seen.add(handle)
        if seen != set(self._owner):
            raise ProtocolFault("Live handles do not partition the registered states.")


def make_epr(registry):
    """
	Prepares a singlet (|01> - |10>)/sqrt(2) on two fresh particles.

    Args:
        registry (EntanglementRegistry): The trial's registry.

    Returns:
        tuple[ParticleHandle, ParticleHandle]: The first and second particle.
    """
    return registry.new_state(BELL_VECTORS[BellOutcome.PSI_MINUS])


def prepare_bell(registry, outcome):
    """Prepares two fresh particles in the given Bell state."""
    return registry.new_state(BELL_VECTORS[outcome])


def apply_pauli(registry, handle, op):
    """
	Applies one of the four encoding operations to a single particle.

    Args:
        registry (EntanglementRegistry): The trial's registry.
        handle (ParticleHandle): The particle to act on.
        op (PauliLabel): The operation.

    Raises:
        ProtocolFault: If the handle is unknown.
    """
    state, position = registry.locate(handle)
    if op is not PauliLabel.I:
        state.apply(PAULI_MATRICES[op], (position,))
    registry.checkpoint()


def apply_cnot(registry, control, target):
    """
	Applies a CNOT, merging the two particles' states first when they differ.

    Raises:
        ProtocolFault: If control and target are the same particle or unknown.
        ConfigurationError: If the merged state would exceed MAX_QUBITS.
    """
    if control == target:
        raise ProtocolFault("CNOT needs two distinct particles.")
    state = registry.join(control, target)
    state.apply(CNOT_MATRIX, (state.index_of(control), state.index_of(target)))
    registry.checkpoint()


def _collapse(registry, state, positions, basis, rng):
    """Projects the qubits at ``positions`` onto the rows of ``basis`` and splits them out."""
    block = state._front(positions)
    components = basis.conj() @ block
    probabilities = np.sum(np.abs(components) ** 2, axis=1)
    total = probabilities.sum()
    if abs(total - 1) > 1e-6:
        raise ProtocolFault(f"Measurement probabilities sum to {total}.")
    k = int(rng.choice(len(basis), p=probabilities / total))

    measured = [state.handles[p] for p in positions]
    rest = [h for h in state.handles if h not in measured]
    pieces = [QState(basis[k], measured)]
    if rest:
        pieces.append(QState(components[k], rest))
    registry.replace(state, pieces)
    registry.checkpoint()
    return k


_Z_BASIS = np.eye(2, dtype=complex)


def z_measure(registry, handle, rng):
    """
	Measures one particle in the computational basis.

    The particle is split off into its own |0> or |1> state and the remainder of
    its former joint state is renormalized.

    Args:
        registry (EntanglementRegistry): The trial's registry.
        handle (ParticleHandle): The particle to measure.
        rng (numpy.random.Generator): Source of the Born-rule draw.

    Returns:
        int: 0 or 1.
    """
    state, position = registry.locate(handle)
    return _collapse(registry, state, (position,), _Z_BASIS, rng)


def bell_measure(registry, a, b, rng):
    """
	Projects two particles onto the Bell basis.

    The pair is left in the measured Bell state and any other qubits of the
    joint state are split off and renormalized. Global phase of the projected
    component is ignored.

    Args:
        registry (EntanglementRegistry): The trial's registry.
        a (ParticleHandle): First particle of the pair.
        b (ParticleHandle): Second particle of the pair.
        rng (numpy.random.Generator): Source of the Born-rule draw.

    Returns:
        BellOutcome: The measured Bell state.

    Raises:
        ProtocolFault: If ``a`` and ``b`` are the same particle.
    """
    if a == b:
        raise ProtocolFault("Bell measurement needs two distinct particles.")
    state = registry.join(a, b)
    k = _collapse(registry, state, (state.index_of(a), state.index_of(b)), BELL_BASIS, rng)
    return BELL_ORDER[k]


def bell_transform_of(op):
    """Bell state reached by applying ``op`` to one half of a singlet."""
    return _BELL_TRANSFORM[op]
