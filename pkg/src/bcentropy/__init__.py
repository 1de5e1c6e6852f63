"""Entropy-at-scale toolkit for Bernoulli convolutions.

Exact measures, exact scale entropies, a catalogue of entropy inequalities
with their explicit constants, and certified checks of explicit
absolute-continuity conditions for algebraic parameters.
"""

from .config import Config, load_config

__all__ = ["Config", "load_config"]
__version__ = "0.1.0"
