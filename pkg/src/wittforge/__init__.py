"""wittforge: exact truncated Witt vector arithmetic over characteristic p."""

__version__ = "0.1.0"
