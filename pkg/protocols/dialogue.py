from channel import CHECK_RESULTS, CHECKING_TRUTH, MESSAGE_ORDER, MESSAGE_RESULTS, SPLIT, Party
from coding import (
    Dibit,
    chunk_message,
    compose_dibits,
    dibit_to_pauli,
    dibits_needed,
    dibits_to_message,
    random_dibits,
)
from qsim import apply_pauli

from .common import Phase, ProtocolName, ensure_capacity, fill_message_set, select_checking_set
from .round_trip import RoundTripSession


class DialogueSession(RoundTripSession):
    """
	Two-way exchange on one set of travel particles.

    Alice encodes her dibits before the forward leg and Bob adds his on top
    before the shuffled return. Each Bell result is the XOR of both encodings,
    so each side recovers the other's dibits by removing its own.
    """

    protocol = ProtocolName.DIALOGUE

    def __init__(self, config, rng, attack=None):
        super().__init__(config, rng, attack)
        self.alice_check_set = []
        self.alice_message_set = []
        self.alice_dibits = {}

    def alice_encode(self, message):
        self.alice_check_set, self.alice_message_set = select_checking_set(
            self.config.n_pairs, self.config.check_fraction, self.rng
        )
        checks = random_dibits(len(self.alice_check_set), self.rng)
        self.alice_dibits = dict(zip(self.alice_check_set, checks))
        self.alice_dibits.update(fill_message_set(message, self.alice_message_set, self.rng))
        for pair, dibit in self.alice_dibits.items():
            apply_pauli(self.registry, self.travel[pair], dibit_to_pauli(dibit))
        self._advance(Phase.PREPARED, Phase.ALICE_ENCODED)

    def send_forward(self):
        self._forward_leg()
        self._advance(Phase.ALICE_ENCODED, Phase.FORWARD_SENT)

    def announce_split(self):
        self.log.announce(
            Party.ALICE, SPLIT, {"check": list(self.alice_check_set), "message": list(self.alice_message_set)}
        )
        self._advance(Phase.FORWARD_SENT, Phase.SPLIT_ANNOUNCED)

    def bob_encode(self, message):
        split = self.log.latest(SPLIT).payload
        self.check_set, self.message_set = list(split["check"]), list(split["message"])
        checks = random_dibits(len(self.check_set), self.rng)
        self.bob_dibits = dict(zip(self.check_set, checks))
        self.bob_dibits.update(fill_message_set(message, self.message_set, self.rng))
        self._encode_received(self.bob_dibits)
        self._advance(Phase.SPLIT_ANNOUNCED, Phase.ENCODED)

    def announce_checking_truth(self):
        self.log.announce(
            Party.ALICE, CHECKING_TRUTH, {"dibits": [[i, int(self.alice_dibits[i])] for i in self.alice_check_set]}
        )
        self.log.announce(
            Party.BOB, CHECKING_TRUTH, {"dibits": [[i, int(self.bob_dibits[i])] for i in self.check_set]}
        )
        self._advance(Phase.CHECK_RESULTS_ANNOUNCED, Phase.CHECKING_TRUTH_ANNOUNCED)

    def verify(self):
        """
	Both sides compare what the announced results imply with the published truths.

        Bob deduces Alice's checking dibits as ``R_c XOR M^B_c`` and Alice deduces
        Bob's as ``R_c XOR M^A_c``; a mismatch on one side is a mismatch on the
        other, so a single comparison decides for both.
        """
        results = dict((pair, Dibit(d)) for pair, d in self.log.latest(CHECK_RESULTS).payload["results"])
        truths = {}
        for entry in self.log.read():
            if entry.kind == CHECKING_TRUTH:
                truths[entry.sender] = dict((pair, Dibit(d)) for pair, d in entry.payload["dibits"])
        pairs = sorted(results)
        expected = [truths[Party.BOB][pair] for pair in pairs]
        deduced = [compose_dibits(results[pair], truths[Party.ALICE][pair]) for pair in pairs]
        self._conclude_check(expected, deduced, Phase.CHECKING_TRUTH_ANNOUNCED, Party.BOB)

    def announce_message_results(self, bit_length):
        positions = self.log.latest(MESSAGE_ORDER).payload["positions"]
        results = self._alice_measure(positions)
        self.log.announce(Party.ALICE, MESSAGE_RESULTS, {"results": results, "message_bits": bit_length})
        self._advance(Phase.MESSAGE_ORDER_DISCLOSED, Phase.MESSAGE_RESULTS_ANNOUNCED)

    def decode(self):
        """
	Returns ``(bob_message_at_alice, alice_message_at_bob)``.
        """
        bob_bits = self.log.latest(MESSAGE_ORDER).payload["message_bits"]
        payload = self.log.latest(MESSAGE_RESULTS).payload
        alice_bits = payload["message_bits"]
        results = [(pair, Dibit(d)) for pair, d in payload["results"]]
        at_alice = [compose_dibits(r, self.alice_dibits[pair]) for pair, r in results]
        at_bob = [compose_dibits(r, self.bob_dibits[pair]) for pair, r in results]
        self._advance(Phase.MESSAGE_RESULTS_ANNOUNCED, Phase.DECODED)
        return (
            dibits_to_message(at_alice[:dibits_needed(bob_bits)], bob_bits),
            dibits_to_message(at_bob[:dibits_needed(alice_bits)], alice_bits),
        )

    def run(self, alice_message, bob_message):
        for message in (alice_message, bob_message):
            ensure_capacity(self.config, message)
        self.counters["message_bits"] = alice_message.length + bob_message.length
        self.prepare()
        self.alice_encode(alice_message)
        self.send_forward()
        self.announce_split()
        self.bob_encode(bob_message)
        self.bob_return()
        self.announce_check_order()
        self.alice_measure_check()
        self.announce_checking_truth()
        self.verify()
        decoded = decoded_peer = None
        if self.phase is Phase.CHECK_PASSED:
            self.disclose_message_order(bob_message.length)
            self.announce_message_results(alice_message.length)
            decoded, decoded_peer = self.decode()
        used = self.message_set[:len(chunk_message(bob_message))]
        self._score_eve(used, [self.bob_dibits[pair] for pair in used])
        return self.outcome(decoded, decoded_peer)


def run_dialogue(config, alice_message, bob_message, rng, attack=None):
    """
	Exchanges one message in each direction over a dialogue session.

    Returns:
        RunOutcome: ``decoded_message`` is Bob's message as Alice read it and
        ``decoded_message_peer`` is Alice's message as Bob read it.
    """
    return DialogueSession(config, rng, attack).run(alice_message, bob_message)
