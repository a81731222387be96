"""Fluorescent-detection atomic-ensemble quantum repeater: state checks, rate models, Monte Carlo."""

from .model import ChainConfig, LinkParams, PhysicalParams, RateResult, Scheme, load_config, validate

__all__ = ["ChainConfig", "LinkParams", "PhysicalParams", "RateResult", "Scheme", "load_config", "validate"]
__version__ = "0.1.0"
