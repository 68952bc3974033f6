"""Herding toolkit command-line scripts"""

__all__ = []
