"""Air quality categorisation with interval type-2 fuzzy sets, pairwise-comparison weights and a small triple store."""

__version__ = "0.1.0"
