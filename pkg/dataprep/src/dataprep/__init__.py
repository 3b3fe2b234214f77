"""Converter from raw Planetoid citation-network pickles to the plain-text
dataset format consumed by the graphprop engine."""

from .convert import (
    EXPECTED_STATS,
    ConversionError,
    PlanetoidBundle,
    convert,
)

__all__ = ["EXPECTED_STATS", "ConversionError", "PlanetoidBundle", "convert"]
