"""Error types shared across the signal chain.

Every raised error carries a short stable ``code`` string so callers (and
the CLI) can dispatch on failure kind without parsing prose messages.
"""
from __future__ import annotations


class JrcssError(Exception):
    """Base error; ``code`` is a stable machine-readable identifier."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}" if message else code)


class SignalError(JrcssError, ValueError):
    """Invalid waveform input or a DSP contract violation."""


class ConfigError(JrcssError, ValueError):
    """Malformed scenario configuration (bad key, type, or value)."""


class PhysicsError(JrcssError, ValueError):
    """Configuration is well-formed but physically inconsistent."""


class FilterTransientWarning(UserWarning):
    """Filter impulse response is not short compared to the record."""
