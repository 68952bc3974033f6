"""Herding dynamics, objectives, classifiers and exporters"""

__all__ = []
