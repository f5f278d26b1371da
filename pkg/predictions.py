import math

from scipy.stats import binom

from eve import AttackKind
from protocols import ProtocolName

# Pauli noise hits every particle of a pair once (one-way) or the travel half
# twice (round trip, dialogue); either way the pair sees two traversals.
PAIR_TRAVERSALS = {
    ProtocolName.ROUND_TRIP: 2,
    ProtocolName.ONE_WAY: 2,
    ProtocolName.DIALOGUE: 2,
}


def calculate_noise_error_rate(p, traversals=2):
    """
	Probability that independent Pauli noise leaves a pair in the wrong Bell state.

    Each traversal applies X, Y or Z with probability p/3 each. Paulis compose
    as a group modulo phase, so the pair is wrong whenever the product of its
    noise events is not the identity.

    Args:
        p (float): Per-particle, per-traversal noise probability.
        traversals (int): Noisy traversals that act on the pair.

    Returns:
        float: ``p`` for one traversal, ``1 - [(1-p)^2 + p^2/3]`` for two.
    """
    return 0.75 * (1.0 - (1.0 - 4.0 * p / 3.0) ** traversals)


def calculate_attack_error_rate(attack, n_pairs, permute=True):
    """
	Expected checking error rate an attack causes on a noiseless channel.

    Args:
        attack (AttackKind): The strategy.
        n_pairs (int): Number of EPR pairs N.
        permute (bool): Whether the secret order is in use.

    Returns:
        float: The per-checked-pair error rate.
    """
    if attack is AttackKind.INTERCEPT_RESEND_EPR:
        # Only permutation fixed points, 1/N of positions on average, survive.
        return 0.75 * (1.0 - 1.0 / n_pairs) if permute else 0.0
    if attack in (AttackKind.MEASURE_RESEND_Z, AttackKind.ENTANGLE_MEASURE):
        return 0.5
    if attack is AttackKind.INTERCEPT_BELL_GUESS:
        return 0.75 * (1.0 - 1.0 / (2 * n_pairs - 1))
    return 0.0


def calculate_predicted_error_rate(protocol, config):
    """
	Combines noise and attack into one expected checking error rate.

    Wrong outcomes of either source are treated as uniform over the three wrong
    Bell states, which gives ``e = a + n - 4an/3``. This is exact for the
    intercept-resend attacks and an approximation for the Z-basis attacks.

    Args:
        protocol (ProtocolName): Which protocol runs.
        config (ProtocolConfig): Session parameters.

    Returns:
        dict: A dictionary containing the following keys:
            - noise_error_rate (float): Contribution of channel noise alone.
            - attack_error_rate (float): Contribution of the attack alone.
            - predicted_error_rate (float): Both combined.
    """
    noise_p = config.noise.p if config.noise.active else 0.0
    n = calculate_noise_error_rate(noise_p, PAIR_TRAVERSALS[protocol])
    a = calculate_attack_error_rate(config.attack, config.n_pairs, config.permute)
    return {
        "noise_error_rate": n,
        "attack_error_rate": a,
        "predicted_error_rate": a + n - 4.0 * a * n / 3.0,
    }


def calculate_detection_probability(error_rate, check_size, threshold):
    """
	Probability that a session aborts.

    The number of checking errors is Binomial(|C|, e); the session aborts when
    errors / |C| exceeds the threshold.

    Args:
        error_rate (float): Expected per-pair error rate e.
        check_size (int): Checking-set size |C|.
        threshold (float): Abort threshold.

    Returns:
        float: P(abort).
    """
    tolerated = math.floor(threshold * check_size + 1e-9)
    return float(binom.sf(tolerated, check_size, error_rate))


def predict(protocol, config):
    prediction = calculate_predicted_error_rate(protocol, config)
    prediction.update({
        "protocol": protocol.value,
        "check_size": config.check_size,
        "message_capacity_bits": 2 * config.message_capacity,
        "detection_probability": calculate_detection_probability(
            prediction["predicted_error_rate"], config.check_size, config.abort_threshold
        ),
    })
    return prediction
