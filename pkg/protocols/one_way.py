import logging

from channel import (
    ABORT,
    CHECK_MATCHING,
    CHECK_RESULTS,
    INITIAL_STATE,
    MESSAGE_MATCHING,
    Direction,
    Party,
    TransitBatch,
    transmit,
)
from coding import (
    Dibit,
    Permutation,
    apply_permutation,
    chunk_message,
    decode_relative,
    dibit_to_pauli,
    dibits_needed,
    dibits_to_message,
    invert_permutation,
    random_dibits,
    random_permutation,
)
from errors import ProtocolFault
from qsim import BellOutcome, apply_pauli, bell_measure, prepare_bell

from .common import (
    Phase,
    ProtocolName,
    Session,
    ensure_capacity,
    fill_message_set,
    select_checking_set,
)

logger = logging.getLogger(__name__)


class OneWaySession(Session):
    """
	QSDC where Alice encodes first and sends both halves of every pair in one pass.

    Slot ``2i`` holds the first particle of pair ``i`` and slot ``2i + 1`` the
    second; a single secret permutation over all 2N slots decides the order on
    the wire. Alice encodes on the first particle of each pair.
    """

    protocol = ProtocolName.ONE_WAY

    def __init__(self, config, rng, attack=None):
        super().__init__(config, rng, attack)
        self.pairs = []
        # Alice's private state.
        self.check_set = []
        self.message_set = []
        self.alice_dibits = {}
        self.order = None
        # Bob's private state.
        self.bob_received = []

    def prepare(self):
        self.pairs = [
            prepare_bell(self.registry, self.config.initial_state) for _ in range(self.config.n_pairs)
        ]
        self._advance(Phase.INIT, Phase.PREPARED)

    def alice_encode(self, message):
        self.check_set, self.message_set = select_checking_set(
            self.config.n_pairs, self.config.check_fraction, self.rng
        )
        self.alice_dibits = dict(zip(self.check_set, random_dibits(len(self.check_set), self.rng)))
        self.alice_dibits.update(fill_message_set(message, self.message_set, self.rng))
        for pair, dibit in self.alice_dibits.items():
            apply_pauli(self.registry, self.pairs[pair][0], dibit_to_pauli(dibit))
        self._advance(Phase.PREPARED, Phase.ALICE_ENCODED)
        logger.debug("Alice checks %d of %d pairs", len(self.check_set), self.config.n_pairs)

    def send(self):
        slots = [handle for pair in self.pairs for handle in pair]
        n = len(slots)
        self.order = random_permutation(n, self.rng) if self.config.permute else Permutation.identity(n)
        batch = TransitBatch(apply_permutation(self.order, slots), Direction.FORWARD, Party.ALICE, Party.BOB)
        delivered = transmit(
            batch, self.config.noise, self._hook(Direction.FORWARD), self.registry, self.rng, self.counters
        )
        self.bob_received = list(delivered.items)
        self._advance(Phase.ALICE_ENCODED, Phase.FORWARD_SENT)

    def _matching(self, pairs):
        inverse = invert_permutation(self.order).mapping
        return [[pair, inverse[2 * pair], inverse[2 * pair + 1]] for pair in pairs]

    def announce_check_matching(self):
        self.log.announce(Party.ALICE, INITIAL_STATE, {"state": self.config.initial_state.value})
        self.log.announce(Party.ALICE, CHECK_MATCHING, {"pairs": self._matching(self.check_set)})
        self._advance(Phase.FORWARD_SENT, Phase.CHECK_ORDER_ANNOUNCED)

    def _bob_measure(self, matching):
        initial = BellOutcome(self.log.latest(INITIAL_STATE).payload["state"])
        results = []
        for pair, first, second in matching:
            outcome = bell_measure(self.registry, self.bob_received[first], self.bob_received[second], self.rng)
            results.append([pair, int(decode_relative(outcome, initial))])
        return results

    def bob_measure_check(self):
        results = self._bob_measure(self.log.latest(CHECK_MATCHING).payload["pairs"])
        self.log.announce(Party.BOB, CHECK_RESULTS, {"results": results})
        self._advance(Phase.CHECK_ORDER_ANNOUNCED, Phase.CHECK_RESULTS_ANNOUNCED)

    def alice_verify(self):
        results = self.log.latest(CHECK_RESULTS).payload["results"]
        expected = [self.alice_dibits[pair] for pair, _ in results]
        rate, abort = self._record_check(expected, [Dibit(d) for _, d in results])
        if abort:
            self.log.announce(Party.ALICE, ABORT, {"error_rate": rate})
            self._advance(Phase.CHECK_RESULTS_ANNOUNCED, Phase.ABORTED)
        else:
            self._advance(Phase.CHECK_RESULTS_ANNOUNCED, Phase.CHECK_PASSED)

    def disclose_message_matching(self, bit_length):
        if self.phase is not Phase.CHECK_PASSED:
            raise ProtocolFault(f"Message matching cannot be disclosed in phase {self.phase.value}.")
        self.log.announce(
            Party.ALICE,
            MESSAGE_MATCHING,
            {"pairs": self._matching(self.message_set), "message_bits": bit_length},
        )
        self._advance(Phase.CHECK_PASSED, Phase.MESSAGE_ORDER_DISCLOSED)

    def bob_decode(self):
        payload = self.log.latest(MESSAGE_MATCHING).payload
        results = self._bob_measure(payload["pairs"])
        bit_length = payload["message_bits"]
        dibits = [Dibit(d) for _, d in results][:dibits_needed(bit_length)]
        self._advance(Phase.MESSAGE_ORDER_DISCLOSED, Phase.DECODED)
        return dibits_to_message(dibits, bit_length)

    def run(self, message):
        ensure_capacity(self.config, message)
        self.counters["message_bits"] = message.length
        self.prepare()
        self.alice_encode(message)
        self.send()
        self.announce_check_matching()
        self.bob_measure_check()
        self.alice_verify()
        decoded = None
        if self.phase is Phase.CHECK_PASSED:
            self.disclose_message_matching(message.length)
            decoded = self.bob_decode()
        used = self.message_set[:len(chunk_message(message))]
        self._score_eve(used, [self.alice_dibits[pair] for pair in used])
        return self.outcome(decoded)


def run_one_way(config, alice_message, rng, attack=None):
    """
	Sends ``alice_message`` from Alice to Bob in a single transit.

    Args:
        config (ProtocolConfig): Session parameters.
        alice_message (Message): Bits Alice encodes before sending.
        rng (numpy.random.Generator): The trial's only source of randomness.
        attack (Eavesdropper, optional): Prebuilt attacker.

    Returns:
        RunOutcome: Aborted runs carry no decoded message.
    """
    return OneWaySession(config, rng, attack).run(alice_message)
