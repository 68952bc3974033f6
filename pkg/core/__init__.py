"""Configuration, logging, errors and shared helpers"""

__all__ = []
