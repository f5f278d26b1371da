from .common import (
    Phase,
    ProtocolConfig,
    ProtocolName,
    RunOutcome,
    check_security,
    checking_set_size,
    select_checking_set,
)
from .dialogue import DialogueSession, run_dialogue
from .one_way import OneWaySession, run_one_way
from .round_trip import RoundTripSession, run_round_trip

__all__ = [
    "DialogueSession",
    "OneWaySession",
    "Phase",
    "ProtocolConfig",
    "ProtocolName",
    "RoundTripSession",
    "RunOutcome",
    "check_security",
    "checking_set_size",
    "run_dialogue",
    "run_one_way",
    "run_round_trip",
    "select_checking_set",
]
