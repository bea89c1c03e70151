"""Compound multiple-access channels with conferencing encoders.

Capacity-region computation (max-min over input policies), the one-shot
conference construction, random half-lattice codes with a joint-typicality
decoder, and exact small-instance typicality computations.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .channel import (Channel, CompoundChannel, QuantizationResult, load_channel, paper_example,
                      parse_channel_file, quantize, serialize_channel)
from .codes import (Codebook, ConfCode, DecoderConfig, ErrorReport, TypicalityDecoder,
                    derive_conf_code, sample_codebook, simulate_error, typicality_decode)
from .conferencing import ConferencePlan, ConferencingMac, build_plan, conferencing_mac, willems_mac
from .errors import (BlocklengthTooSmall, CompoundMacError, ConfigurationError, DomainError,
                     InfeasiblePlan, InstanceTooLarge, QuantizationInfeasible, ValidationError)
from .optimize import (OptimizerConfig, full_region_thresholds, min_conf_sum, optimize_region,
                       sum_capacity_full_coop, support_at)
from .probability import entropy, mutual_information
from .regions import (InputPolicy, RatePolytope, RateRegion, hausdorff, polytope_cm, polytope_conf,
                      state_bounds)
from .simulation import run_simulation
from .typicality import TypicalSpec, atypical_mass_exact, is_typical

__all__ = [
    "BlocklengthTooSmall", "Channel", "Codebook", "CompoundChannel", "CompoundMacError", "ConfCode",
    "ConferencePlan", "ConferencingMac", "ConfigurationError", "DecoderConfig", "DomainError",
    "ErrorReport", "InfeasiblePlan", "InputPolicy", "InstanceTooLarge", "OptimizerConfig",
    "QuantizationInfeasible", "QuantizationResult", "RatePolytope", "RateRegion", "TypicalSpec",
    "TypicalityDecoder", "ValidationError", "atypical_mass_exact", "build_plan", "conferencing_mac",
    "derive_conf_code", "entropy", "full_region_thresholds", "hausdorff", "is_typical", "load_channel",
    "min_conf_sum", "mutual_information", "optimize_region", "paper_example", "parse_channel_file",
    "polytope_cm", "polytope_conf", "quantize", "run_simulation", "sample_codebook", "serialize_channel",
    "simulate_error", "state_bounds", "sum_capacity_full_coop", "support_at", "typicality_decode",
    "willems_mac",
]
