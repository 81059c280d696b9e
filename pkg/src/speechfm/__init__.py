"""Desk-scale Whisper-style speech model stack."""

__version__ = "0.1.0"
