"""Use cases: dataset generation, rendering, inference, scoring and analysis."""
