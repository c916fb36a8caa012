"""Command Line Interface for nekholab."""

from .main import main

__all__ = ["main"]
