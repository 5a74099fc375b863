"""Typhoon resilience assessment for transmission systems."""
