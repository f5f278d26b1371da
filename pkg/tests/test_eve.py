import pytest

from channel import ClassicalLog, Direction, MESSAGE_ORDER, Party, TransitBatch
from coding import dibit_to_pauli
from errors import ConfigurationError, ProtocolFault
from eve import (
    AttackKind,
    EntangleMeasure,
    Eavesdropper,
    InterceptBellGuess,
    InterceptResendEPR,
    MeasureResendZ,
    build_attack,
    check_attack_applies,
)
from qsim import EntanglementRegistry, apply_pauli, make_epr


@pytest.mark.parametrize("kind,protocol", [
    (AttackKind.INTERCEPT_RESEND_EPR, "one_way"),
    (AttackKind.INTERCEPT_BELL_GUESS, "round_trip"),
    (AttackKind.INTERCEPT_BELL_GUESS, "dialogue"),
])
def test_inapplicable_attacks_are_configuration_errors(kind, protocol):
    with pytest.raises(ConfigurationError) as excinfo:
        check_attack_applies(kind, protocol)
    assert excinfo.value.field == "attack"
    with pytest.raises(ConfigurationError):
        build_attack(kind, protocol, 8)


@pytest.mark.parametrize("kind", [AttackKind.NONE, AttackKind.MEASURE_RESEND_Z, AttackKind.ENTANGLE_MEASURE])
@pytest.mark.parametrize("protocol", ["round_trip", "one_way", "dialogue"])
def test_general_attacks_apply_everywhere(kind, protocol):
    attack = build_attack(kind, protocol, 8)
    assert attack.kind is kind


def test_absent_attacker_has_no_hooks():
    attack = Eavesdropper("round_trip", 4)
    assert not attack.active
    assert attack.hook(Direction.FORWARD) is None
    assert attack.hook(Direction.RETURN) is None
    assert attack.guess_message([0, 1]) == [0, 0]


def _travel_batch(registry, n, direction=Direction.FORWARD):
    pairs = [make_epr(registry) for _ in range(n)]
    return pairs, TransitBatch([t for _, t in pairs], direction, Party.ALICE, Party.BOB)


def test_intercept_resend_substitutes_and_restores(rng):
    registry = EntanglementRegistry(audit=True)
    attack = InterceptResendEPR("round_trip", 4)
    pairs, batch = _travel_batch(registry, 4)
    forwarded = attack.intercept_forward(batch, registry, rng)
    assert not set(forwarded.items) & set(batch.items)
    returned = attack.intercept_return(forwarded.with_items(forwarded.items), registry, rng)
    assert list(returned.items) == [t for _, t in pairs]
    assert attack.interceptions == 8
    assert attack.guess_message([0, 1, 2, 3]) == [0, 0, 0, 0]


def test_z_attack_records_each_direction(rng):
    registry = EntanglementRegistry(audit=True)
    attack = MeasureResendZ("round_trip", 3)
    _, batch = _travel_batch(registry, 3)
    attack.hook(Direction.FORWARD)(batch, registry, rng)
    attack.hook(Direction.RETURN)(batch, registry, rng)
    # Nothing touched the particles in between, so every pair reads as unchanged.
    assert attack.guess_message([0, 1, 2]) == [0, 0, 0]


def test_z_attack_follows_disclosed_order(rng):
    registry = EntanglementRegistry(audit=True)
    attack = MeasureResendZ("round_trip", 2)
    attack.z_records = {
        (Direction.FORWARD, 0): 0,
        (Direction.FORWARD, 1): 1,
        (Direction.RETURN, 0): 1,
        (Direction.RETURN, 1): 0,
    }
    log = ClassicalLog()
    attack.finalize(log.view(), registry, rng)
    assert attack.guess_message([0, 1]) == [0b01, 0b01]
    log.announce(Party.BOB, MESSAGE_ORDER, {"positions": [[0, 1], [1, 0]], "message_bits": 4})
    assert attack.guess_message([0, 1]) == [0b00, 0b00]


def test_entangle_measure_defers_measurement(rng):
    registry = EntanglementRegistry(audit=True)
    attack = EntangleMeasure("round_trip", 2)
    pairs, batch = _travel_batch(registry, 2)
    attack.hook(Direction.FORWARD)(batch, registry, rng)
    assert attack.z_records == {}
    assert len(attack.ancillas) == 2
    attack.finalize(ClassicalLog().view(), registry, rng)
    assert set(attack.z_records.values()) <= {0, 1}
    registry.audit()


def test_bell_guess_rejects_odd_batches(rng):
    registry = EntanglementRegistry()
    attack = InterceptBellGuess("one_way", 2)
    batch = TransitBatch([registry.new_qubit() for _ in range(3)], Direction.FORWARD, Party.ALICE, Party.BOB)
    with pytest.raises(ProtocolFault):
        attack.intercept(batch, registry, rng)


def test_bell_guess_only_hooks_the_forward_leg():
    attack = InterceptBellGuess("one_way", 2)
    assert attack.hook(Direction.FORWARD) is not None
    assert attack.hook(Direction.RETURN) is None


def test_bell_guess_replaces_every_particle(rng):
    registry = EntanglementRegistry(audit=True)
    attack = InterceptBellGuess("one_way", 4)
    slots = [h for _ in range(4) for h in make_epr(registry)]
    batch = TransitBatch(slots, Direction.FORWARD, Party.ALICE, Party.BOB)
    forwarded = attack.intercept(batch, registry, rng)
    assert len(forwarded) == 8
    assert not set(forwarded.items) & set(slots)
    assert len(attack.matching) == 4
    covered = sorted(p for key in attack.matching for p in key)
    assert covered == list(range(8))


@pytest.mark.parametrize("dibit", [0b00, 0b01, 0b10, 0b11])
def test_bell_guess_on_a_single_pair_is_exact(dibit, rng):
    registry = EntanglementRegistry(audit=True)
    first, second = make_epr(registry)
    apply_pauli(registry, first, dibit_to_pauli(dibit))
    attack = InterceptBellGuess("one_way", 1)
    attack.intercept(TransitBatch([first, second], Direction.FORWARD, Party.ALICE, Party.BOB), registry, rng)
    assert list(attack.matching) == [(0, 1)]
    assert attack.guess_message([0]) == [dibit]
