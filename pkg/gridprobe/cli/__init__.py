"""Command-line interface for gridprobe."""
