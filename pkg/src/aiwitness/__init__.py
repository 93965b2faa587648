"""Entanglement witness for an atom interferometer coupled to a mechanical oscillator."""
from .core import (MomentTable, Provenance, Scenario, ScenarioConfig, WitnessCoefficients,
                   WitnessReport, lambda_max, validate)

__all__ = ["MomentTable", "Provenance", "Scenario", "ScenarioConfig", "WitnessCoefficients",
           "WitnessReport", "lambda_max", "validate"]
