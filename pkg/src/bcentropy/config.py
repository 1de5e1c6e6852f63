"""Run configuration shared by the library and the command line."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

PRECISION_ENV = "BC_ENTROPY_PRECISION"


@dataclass(frozen=True)
class Config:
    precision_bits: int = 128
    enumeration_bound: int = 26
    tolerance: float = 1e-9
    seed: int = 0
    output_format: str = "json"
    threads: int = 1
    pm1_degree_bound: int = 40
    # largest half-enumeration (3^h vectors) the collision search may hold
    pm1_memory_budget: int = 3**13

    def __post_init__(self):
        if self.precision_bits < 8:
            raise ValueError("precision_bits must be at least 8")
        if self.enumeration_bound < 1:
            raise ValueError("enumeration_bound must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.output_format not in ("json", "csv"):
            raise ValueError("output_format must be json or csv")
        if self.threads < 1:
            raise ValueError("threads must be positive")

    def with_(self, **changes) -> "Config":
        return replace(self, **changes)


def load_config(**overrides) -> Config:
    """Defaults, then the precision environment variable, then explicit overrides."""
    values = {}
    env = os.environ.get(PRECISION_ENV)
    if env:
        values["precision_bits"] = int(env)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Config(**values)


DEFAULT = Config()
