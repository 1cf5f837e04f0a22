"""Fronthaul compression and split dimensioning toolkit."""

__version__ = "0.1.0"
