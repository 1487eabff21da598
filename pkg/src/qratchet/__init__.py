"""Energy ratcheting of coupled oscillators through repeated fresh encounters."""

__version__ = "0.1.0"
