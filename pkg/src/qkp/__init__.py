"""Quaternionic KP hierarchy: symbolic dressing, explicit Baker functions and tau functions."""

__version__ = "0.1.0"
