"""Utility functions for common operations."""

from collections.abc import Iterable

import numpy as np

from core.errors import DataError


def format_float(value: float) -> str:
    """
    Format a float with full round-trip precision.

    Examples:
        0.1 -> "0.1"
        1/3 -> "0.3333333333333333"

    Args:
        value: Number to format

    Returns:
        Shortest string that parses back to the identical float
    """
    return repr(float(value))


def format_row(values: Iterable[float]) -> str:
    """Join floats with single spaces at full precision."""
    return " ".join(format_float(v) for v in values)


def to_spins(values: np.ndarray, from_binary: bool = False) -> np.ndarray:
    """
    Convert a 0/1 or -1/+1 array to int8 spins.

    Args:
        values: Integer array
        from_binary: Interpret entries as {0, 1} and map 0 -> -1, 1 -> +1

    Returns:
        int8 array with entries in {-1, +1}

    Raises:
        DataError: If an entry is outside the expected alphabet
    """
    arr = np.asarray(values)
    if from_binary:
        if not np.isin(arr, (0, 1)).all():
            raise DataError("binary input must contain only 0 and 1")
        return (2 * arr - 1).astype(np.int8)
    if not np.isin(arr, (-1, 1)).all():
        raise DataError("spin input must contain only -1 and +1")
    return arr.astype(np.int8)


def spin_product_states(n_units: int) -> np.ndarray:
    """
    Enumerate all spin configurations of ``n_units`` units.

    Row 0 is all -1; the first unit is the most significant position, so the
    order matches ``itertools.product((-1, 1), repeat=n_units)``.
    """
    if n_units == 0:
        return np.zeros((1, 0), dtype=np.int8)
    idx = np.arange(2**n_units)
    shifts = np.arange(n_units - 1, -1, -1)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)
