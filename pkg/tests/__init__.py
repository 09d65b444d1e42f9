"""Test package for gridprobe."""
