"""Adaptive normalization of metric values to [0,1] heat positions.

Raw movement metrics are heavily skewed: one hot edge can be orders of
magnitude above the rest, which under a plain linear scale pushes every
other value into the same color. The centered methods spread the scale over
[0, 2c] around a representative center (mean or median), clamping above;
the histogram method ignores magnitudes entirely and spaces the distinct
observed values evenly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Rgb = tuple[float, float, float]
Stop = tuple[float, Rgb]

DEFAULT_PALETTE: tuple[Stop, ...] = (
    (0.0, (0, 128, 0)),
    (0.5, (255, 255, 0)),
    (1.0, (200, 0, 0)),
)

METHODS = ("linear", "mean", "median", "histogram")


class ScaleError(ValueError):
    pass


class StaleScaleError(ScaleError):
    """A value was positioned against a scale not fitted over it."""


@dataclass(frozen=True)
class ColorScale:
    method: str
    center: float | None = None          # mean/median methods
    low: float | None = None             # linear
    high: float | None = None
    buckets: tuple[float, ...] | None = None  # histogram, sorted distinct
    palette: tuple[Stop, ...] = DEFAULT_PALETTE


def lower_median(values: list[float]) -> float:
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def fit(values, method: str, palette: tuple[Stop, ...] = DEFAULT_PALETTE) -> ColorScale:
    values = list(values)
    if not values:
        raise ScaleError("cannot fit a scale over no values")
    if any(v < 0 for v in values):
        raise ScaleError("metric values must be non-negative")
    if method == "linear":
        return ColorScale("linear", low=min(values), high=max(values), palette=palette)
    if method == "mean":
        return ColorScale("mean", center=sum(values) / len(values), palette=palette)
    if method == "median":
        return ColorScale("median", center=lower_median(values), palette=palette)
    if method == "histogram":
        return ColorScale("histogram", buckets=tuple(sorted(set(values))), palette=palette)
    raise ScaleError(f"unknown scale method {method!r}")


def position(scale: ColorScale, value) -> float:
    if scale.method == "linear":
        if scale.high == scale.low:
            return 0.5
        return min(max((value - scale.low) / (scale.high - scale.low), 0.0), 1.0)
    if scale.method in ("mean", "median"):
        c = scale.center
        if c == 0:
            return 0.0
        return min(value, 2 * c) / (2 * c)
    if scale.method == "histogram":
        try:
            i = scale.buckets.index(value)
        except ValueError:
            raise StaleScaleError(
                f"value {value!r} was not among the fitted values"
            ) from None
        return (i + 0.5) / len(scale.buckets)
    raise ScaleError(f"unknown scale method {scale.method!r}")


def color(pos: float, palette: tuple[Stop, ...] = DEFAULT_PALETTE) -> tuple[int, int, int]:
    """Piecewise-linear interpolation through the palette stops."""
    stops = sorted(palette)
    if pos <= stops[0][0]:
        rgb = stops[0][1]
    elif pos >= stops[-1][0]:
        rgb = stops[-1][1]
    else:
        rgb = None
        for (p0, c0), (p1, c1) in zip(stops, stops[1:]):
            if p0 <= pos <= p1:
                t = 0.0 if p1 == p0 else (pos - p0) / (p1 - p0)
                rgb = tuple(a + (b - a) * t for a, b in zip(c0, c1))
                break
    return tuple(int(x + 0.5) for x in rgb)


def scale_bounds(scale: ColorScale) -> tuple[float, float]:
    """The numeric interval the scale spreads over, for legend rendering."""
    if scale.method == "linear":
        return scale.low, scale.high
    if scale.method in ("mean", "median"):
        return 0.0, 2 * scale.center
    return 0.0, float(len(scale.buckets))


def scale_center(scale: ColorScale) -> float:
    """The value a legend should label at the palette midpoint."""
    if scale.method == "linear":
        return (scale.low + scale.high) / 2
    if scale.method in ("mean", "median"):
        return scale.center
    return scale.buckets[(len(scale.buckets) - 1) // 2]
