"""Integration tests for gridprobe."""
