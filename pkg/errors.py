class SimulationError(Exception):
    """Base class for every fault raised by the simulator."""


class ProtocolFault(SimulationError):
    """
	Raised when protocol logic misuses the simulator.

    Unknown particle handles, out-of-order session steps, mismatched sequence
    lengths and malformed eavesdropper batches all land here. These point at a
    bug in the caller, never at an eavesdropper.
    """


class ConfigurationError(SimulationError):
    """
	Raised when a configuration cannot be run as given.

    Covers invalid parameter ranges, attacks that do not apply to the chosen
    protocol and joint states that would exceed the qubit budget.

    Args:
        message (str): What is wrong.
        field (str, optional): The campaign setting at fault, e.g. ``check_fraction``.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class CapacityError(ConfigurationError):
    """Raised when a message needs more dibits than the message set holds."""

    def __init__(self, message, field="message_hex"):
        super().__init__(message, field)
