"""Text-format parsers"""

__all__ = []
