"""GHZ and Bell-pair sources: photon emission links and cavity-based schemes."""
from .cavity import (CarvingParams, ReflectionParams, carving_coherent_ghz, carving_sps_ghz,
                     reflection_ghz)
from .emission import EMISSION_PRESETS, EmissionParams, double_click, single_click
from .result import SchemeResult

__all__ = ["CarvingParams", "EMISSION_PRESETS", "EmissionParams", "ReflectionParams",
           "SchemeResult", "carving_coherent_ghz", "carving_sps_ghz", "double_click",
           "reflection_ghz", "single_click"]
