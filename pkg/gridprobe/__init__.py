"""gridprobe - matched text/image task generation, rendering and scoring."""

__version__ = "1.0.0"
__author__ = "gridprobe development team"
__description__ = "Serialization-friction testbed for layout-defined symbolic tasks"

from .cli.application import main

__all__ = ["main"]
