"""Domain layer for gridprobe - value types, task oracles and ports."""
