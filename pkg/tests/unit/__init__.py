"""Unit tests for gridprobe."""
