"""Infrastructure layer for gridprobe - adapters for I/O, rendering and endpoints."""
