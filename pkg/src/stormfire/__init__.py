"""Thunderstorm-to-wildfire ignition pipeline."""

__version__ = "0.1.0"
