"""Utility functions for nekholab."""

from .logger import Logger
from .system_info import SystemInfo

__all__ = ["Logger", "SystemInfo"]
