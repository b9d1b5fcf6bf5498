"""
Classical data-rate arithmetic for real-time decoding.

Inputs may be ints, Fractions, decimal strings or floats. Floats are read through their
shortest repr, so 30e-9 is exactly 3/10**8 and the headline figures come out exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from exceptions.exceptions import ExperimentConfigError

BITS_PER_CELL: int = 6
DEFAULT_SHEET_PERIOD: Fraction = Fraction(1, 10**8)
# one cell layer spans either a single sheet or the three sheets its parity reads
SHEETS_PER_LAYER_READINGS: tuple[int, int] = (1, 3)

Number = int | float | str | Fraction


def as_fraction(value: Number, name: str = "value") -> Fraction:
    try:
        if isinstance(value, float):
            return Fraction(repr(value))
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exp:
        raise ExperimentConfigError(f"{name} is not a number: {value!r}") from exp


def _positive(value: Number, name: str) -> Fraction:
    _value = as_fraction(value=value, name=name)
    if _value <= 0:
        raise ExperimentConfigError(f"{name} must be positive, got {value!r}")
    return _value


def data_rate(cells_per_cross_section: Number, bits_per_cell: Number, seconds_per_cell_layer: Number) -> Fraction:
    """
    Raw bits per second a decoder must ingest: bits_per_cell * cells / seconds_per_cell_layer.

    Raises:
        ExperimentConfigError: a non-positive or non-numeric input
    """
    _cells = _positive(value=cells_per_cross_section, name="cells_per_cross_section")
    _bits = _positive(value=bits_per_cell, name="bits_per_cell")
    seconds = _positive(value=seconds_per_cell_layer, name="seconds_per_cell_layer")
    return _bits * _cells / seconds


def seconds_per_cell_layer(sheet_period: Number, sheets_per_layer: int) -> Fraction:
    if sheets_per_layer not in SHEETS_PER_LAYER_READINGS:
        raise ExperimentConfigError(
            f"sheets_per_layer must be one of {SHEETS_PER_LAYER_READINGS}, got {sheets_per_layer}"
        )
    return _positive(value=sheet_period, name="sheet_period") * sheets_per_layer


@dataclass(frozen=True)
class DataRateReading:
    sheets_per_layer: int
    seconds_per_cell_layer: Fraction
    bits_per_second: Fraction


def data_rate_readings(
    cells_per_cross_section: Number, sheet_period: Number = DEFAULT_SHEET_PERIOD, bits_per_cell: Number = BITS_PER_CELL
) -> list[DataRateReading]:
    """
    The rate under both readings of how many sheets make up one cell layer.
    """
    _readings: list[DataRateReading] = []
    for _sheets in SHEETS_PER_LAYER_READINGS:
        _layer = seconds_per_cell_layer(sheet_period=sheet_period, sheets_per_layer=_sheets)
        _readings.append(
            DataRateReading(
                sheets_per_layer=_sheets,
                seconds_per_cell_layer=_layer,
                bits_per_second=data_rate(
                    cells_per_cross_section=cells_per_cross_section,
                    bits_per_cell=bits_per_cell,
                    seconds_per_cell_layer=_layer,
                ),
            )
        )
    return _readings


def format_rate(value: Fraction) -> str:
    if value.denominator == 1:
        return f"{value.numerator} ({float(value):.3e}) bits/s"
    return f"{float(value):.6e} bits/s"
