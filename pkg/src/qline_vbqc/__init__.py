"""Simulation and verification of two-client verifiable blind quantum computing on a Qline."""
from .devices import (AngleTamper, FixedOutcome, Honest, NoiseParams, OutcomeFlip, StateReplace, noisy_source_state,
                      parse_behavior)
from .protocol import Algorithm, RoundType, Transcript, run_protocol, run_round
from .verify import Thresholds, decide, sigma_threshold, test_error_fraction

test_error_fraction.__test__ = False

__all__ = [
    "Algorithm", "AngleTamper", "FixedOutcome", "Honest", "NoiseParams", "OutcomeFlip", "RoundType",
    "StateReplace", "Thresholds", "Transcript", "decide", "noisy_source_state", "parse_behavior", "run_protocol",
    "run_round", "sigma_threshold", "test_error_fraction",
]
