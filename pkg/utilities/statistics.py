from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

# two-sided 95%
WILSON_Z_95: float = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z_95) -> tuple[float, float]:
    """
    Wilson score interval of a binomial proportion.

    Raises:
        ValueError: trials < 1 or successes outside [0, trials]
    """
    if trials < 1:
        raise ValueError(f"Wilson interval needs at least one trial, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")

    phat = successes / trials
    z2 = z * z
    denominator = 1 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denominator
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denominator
    return max(0.0, center - half), min(1.0, center + half)


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Least-squares slope of log(y) against log(x).
    """
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError(f"Slope fit needs two or more paired points, got {len(xs)} x and {len(ys)} y")

    _slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(_slope)


def smooth_adjacent(values: Sequence[float]) -> list[float]:
    """
    Mean of each point with its sweep neighbours.
    """
    _values = np.asarray(values, dtype=float)
    if _values.size < 3:
        return _values.tolist()

    padded = np.concatenate(([_values[0]], _values, [_values[-1]]))
    return np.convolve(padded, np.ones(3) / 3, mode="valid").tolist()


def is_increasing(values: Sequence[float]) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))
