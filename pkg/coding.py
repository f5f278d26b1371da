import string
from dataclasses import dataclass
from typing import NewType, Sequence

from errors import ProtocolFault
from qsim import BellOutcome, PauliLabel

Dibit = NewType("Dibit", int)

# U0=I, U1=Z, U2=X, U3=iY carry 00, 11, 01, 10.
_DIBIT_TO_PAULI = {
    0b00: PauliLabel.I,
    0b11: PauliLabel.Z,
    0b01: PauliLabel.X,
    0b10: PauliLabel.Y,
}
_PAULI_TO_DIBIT = {op: Dibit(d) for d, op in _DIBIT_TO_PAULI.items()}

_OUTCOME_TO_DIBIT = {
    BellOutcome.PSI_MINUS: Dibit(0b00),
    BellOutcome.PSI_PLUS: Dibit(0b11),
    BellOutcome.PHI_MINUS: Dibit(0b01),
    BellOutcome.PHI_PLUS: Dibit(0b10),
}
_DIBIT_TO_OUTCOME = {d: outcome for outcome, d in _OUTCOME_TO_DIBIT.items()}


def _check_dibit(d):
    if not 0 <= d < 4:
        raise ProtocolFault(f"{d!r} is not a dibit.")
    return Dibit(int(d))


def dibit_to_pauli(d):
    return _DIBIT_TO_PAULI[_check_dibit(d)]


def pauli_to_dibit(p):
    return _PAULI_TO_DIBIT[p]


def decode_outcome(o):
    """Dibit of the operation that turns a singlet into Bell state ``o``."""
    return _OUTCOME_TO_DIBIT[o]


def outcome_of(d):
    """Inverse of decode_outcome."""
    return _DIBIT_TO_OUTCOME[_check_dibit(d)]


def compose_dibits(a, b):
    """
	Combines two encodings applied to the same particle.

    The dibit assignment is a group isomorphism from the Pauli group modulo phase
    onto Z2 x Z2, so composing operations is bitwise XOR. The same arithmetic
    removes a known encoding from a Bell result, which is how both dialogue
    parties read the other side's dibits.

    Args:
        a (Dibit): First encoding.
        b (Dibit): Second encoding.

    Returns:
        Dibit: ``a XOR b``.
    """
    return Dibit(_check_dibit(a) ^ _check_dibit(b))


def decode_relative(outcome, initial):
    """Dibit applied to a pair prepared in ``initial`` that was measured as ``outcome``."""
    return compose_dibits(decode_outcome(outcome), decode_outcome(initial))


def same_bell_class(d):
    """True when encoding ``d`` keeps a pair inside its Psi/Phi class (I and Z)."""
    return _check_dibit(d) in (0b00, 0b11)


@dataclass(frozen=True)
class Message:
    """An ordered bit string; ``bits`` holds 0/1 ints."""

    bits: tuple = ()

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ProtocolFault("Message bits must be 0 or 1.")
        object.__setattr__(self, "bits", bits)

    @property
    def length(self):
        return len(self.bits)

    @classmethod
    def from_hex(cls, text):
        """
	Builds a message from a hex string, four bits per digit, most significant first.

        Args:
            text (str): Hex digits, optionally prefixed with ``0x``.

        Raises:
            ValueError: If ``text`` contains non-hex characters.
        """
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        bad = [digit for digit in text if digit not in string.hexdigits]
        if bad:
            raise ValueError(f"{bad[0]!r} is not a hex digit.")
        bits = []
        for digit in text:
            value = int(digit, 16)
            bits.extend((value >> shift) & 1 for shift in (3, 2, 1, 0))
        return cls(tuple(bits))

    @classmethod
    def random(cls, n_bits, rng):
        return cls(tuple(int(b) for b in rng.integers(0, 2, size=n_bits)))

    def to_hex(self):
        padded = self.bits + (0,) * (-self.length % 4)
        digits = []
        for k in range(0, len(padded), 4):
            a, b, c, d = padded[k:k + 4]
            digits.append(format(a << 3 | b << 2 | c << 1 | d, "x"))
        return "".join(digits)


def chunk_message(m):
    """
	Splits a message into dibits, first-transmitted bit most significant.

    Odd-length messages get one trailing 0 bit; the receiver strips it with the
    bit length that travels in the classical metadata.

    Args:
        m (Message): The message.

    Returns:
        list[Dibit]: ``ceil(m.length / 2)`` dibits.
    """
    bits = m.bits + (0,) * (m.length % 2)
    return [Dibit(bits[k] << 1 | bits[k + 1]) for k in range(0, len(bits), 2)]


def dibits_to_message(dibits, bit_length):
    bits = []
    for d in dibits:
        d = _check_dibit(d)
        bits.extend((d >> 1, d & 1))
    if bit_length > len(bits):
        raise ProtocolFault(f"{len(dibits)} dibits cannot hold {bit_length} bits.")
    return Message(tuple(bits[:bit_length]))


def dibits_needed(bit_length):
    return (bit_length + 1) // 2


def random_dibits(n, rng):
    return [Dibit(int(d)) for d in rng.integers(0, 4, size=n)]


@dataclass(frozen=True)
class Permutation:
    """
	A secret transmitting order.

    ``apply_permutation`` sends ``seq[mapping[j]]`` to position ``j``, so the
    position of item ``i`` after the shuffle is ``invert_permutation(p).mapping[i]``.
    """

    mapping: tuple = ()

    def __post_init__(self):
        mapping = tuple(int(m) for m in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ProtocolFault(f"{mapping} is not a bijection on 0..{len(mapping) - 1}.")
        object.__setattr__(self, "mapping", mapping)

    @property
    def n(self):
        return len(self.mapping)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    def position_of(self, i):
        """Index at which item ``i`` lands after apply_permutation."""
        return self.mapping.index(i)


def random_permutation(n, rng):
    """
	Draws a uniformly distributed permutation of ``n`` positions.

    Uses numpy's Fisher-Yates shuffle on the trial's generator. ``n == 0`` yields
    the empty permutation.
    """
    if n < 0:
        raise ProtocolFault(f"Cannot permute {n} items.")
    return Permutation(tuple(int(k) for k in rng.permutation(n)))


def apply_permutation(perm, seq: Sequence):
    if len(seq) != perm.n:
        raise ProtocolFault(f"Permutation of {perm.n} items applied to {len(seq)} items.")
    return [seq[m] for m in perm.mapping]


def invert_permutation(perm):
    inverse = [0] * perm.n
    for j, m in enumerate(perm.mapping):
        inverse[m] = j
    return Permutation(tuple(inverse))


def compose_permutations(first, second):
    """Permutation equal to applying ``first`` and then ``second``."""
    if first.n != second.n:
        raise ProtocolFault("Cannot compose permutations of different lengths.")
    return Permutation(tuple(first.mapping[s] for s in second.mapping))
