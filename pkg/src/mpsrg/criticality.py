"""One-sided derivatives, derivative jumps, the discrete beta function, and nu fits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateFit, DivergedSide, EvaluationFailed
from .geometric import entanglement_per_block
from .models import Model, ModelPoint, catalog_mps
from .transfer import transfer_operator

DEFAULT_H0 = 1e-3
DEFAULT_LEVELS = 4
# estimates growing by more than this per halving, three times running, count as divergent
DIVERGENCE_RATIO = 1.25
DIVERGENCE_RUN = 3


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    CENTRAL = "central"


@dataclass(frozen=True)
class DerivativeEstimate:
    """Richardson-extrapolated derivative.

    Attributes:
        value: Extrapolated derivative, or the smallest-step raw estimate when
            ``diverged`` is set.
        side: Stencil side.
        step_sequence: Step sizes used, largest first.
        richardson_order: Number of extrapolation levels applied.
        error: Difference between the last two extrapolation levels.
        diverged: Raw estimates grow geometrically as the step shrinks.
        divergence_exponent: Log-log slope of the raw estimates against the
            step, i.e. ``a`` in ``f' ~ h^a``, when ``diverged``.
    """

    value: float
    side: Side
    step_sequence: tuple[float, ...]
    richardson_order: int
    error: float
    diverged: bool = False
    divergence_exponent: float | None = None


def _eval(curve: Callable[[float], float], g: float) -> float:
    try:
        v = float(curve(g))
    except Exception as exc:  # noqa: BLE001 - any curve failure is reported the same way
        raise EvaluationFailed(f"curve failed at g={g!r}: {exc}") from exc
    if not math.isfinite(v):
        raise EvaluationFailed(f"curve is not finite at g={g!r}")
    return v


def one_sided_derivative(
    curve: Callable[[float], float],
    g0: float,
    side: Side | str = Side.RIGHT,
    h0: float = DEFAULT_H0,
    levels: int = DEFAULT_LEVELS,
) -> DerivativeEstimate:
    """Derivative of ``curve`` at ``g0`` from one side only.

    The raw estimate ``s (f(g0 + 2 s h) - f(g0 + s h)) / h`` never touches
    ``g0`` itself, so a jump in the value at ``g0`` does not leak in.  Its
    error is a power series in ``h``, removed by Richardson extrapolation over
    ``levels`` halvings.
    """
    side = Side(side)
    if side is Side.CENTRAL:
        raise ValueError("use side='left' or side='right'")
    if levels < 2:
        raise ValueError("need at least two levels")
    s = 1.0 if side is Side.RIGHT else -1.0
    hs = [h0 / 2**i for i in range(levels)]
    raw = [s * (_eval(curve, g0 + 2 * s * h) - _eval(curve, g0 + s * h)) / h for h in hs]

    mags = np.abs(raw)
    ratios = mags[1:] / np.maximum(mags[:-1], 1e-300)
    tail = ratios[-DIVERGENCE_RUN:]
    if len(tail) == DIVERGENCE_RUN and np.all(tail > DIVERGENCE_RATIO):
        slope = float(np.polyfit(np.log(hs), np.log(mags), 1)[0])
        return DerivativeEstimate(
            raw[-1], side, tuple(hs), 0, float(abs(raw[-1] - raw[-2])), True, slope
        )

    table = [list(raw)]
    for j in range(1, levels):
        prev = table[-1]
        table.append([prev[i] + (prev[i] - prev[i - 1]) / (2**j - 1) for i in range(1, len(prev))])
    value = table[-1][-1]
    error = abs(value - table[-2][-1])
    return DerivativeEstimate(value, side, tuple(hs), levels - 1, error)


def derivative_jump(
    curve: Callable[[float], float],
    g0: float,
    h0: float = DEFAULT_H0,
    levels: int = DEFAULT_LEVELS,
) -> float:
    """Right minus left derivative at ``g0``.

    Raises:
        DivergedSide: Either one-sided derivative diverges.
    """
    right = one_sided_derivative(curve, g0, Side.RIGHT, h0, levels)
    left = one_sided_derivative(curve, g0, Side.LEFT, h0, levels)
    for est in (right, left):
        if est.diverged:
            raise DivergedSide(
                f"{est.side.value} derivative at g={g0} diverges with exponent {est.divergence_exponent:.3f}"
            )
    return right.value - left.value


@dataclass(frozen=True)
class BetaValue:
    g: float | None
    L: int
    value: float


def beta_function(model: Model | str, g: float | None, L: int, **kwargs) -> BetaValue:
    """Discrete flow ``(E_{2L}(g) - E_L(g)) / log 2`` from the transfer route.

    ``g`` is ignored for parameter-free models.  Extra keyword arguments go to
    :func:`entanglement_per_block`.
    """
    model = Model(model)
    point = ModelPoint(model, g if model.parametrized else None)
    E = transfer_operator(catalog_mps(point))
    e1 = entanglement_per_block(E, L, **kwargs).per_block
    e2 = entanglement_per_block(E, 2 * L, **kwargs).per_block
    return BetaValue(g, L, (e2 - e1) / math.log(2.0))


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit ``|dE/dg| ~ |g - g_c|^(d nu - 1)`` with ``d = 1``.

    Attributes:
        nu: Correlation-length exponent.
        exponent_raw: Fitted slope ``d nu - 1``.
        grid: ``|g - g_c|`` values used, strictly decreasing.
        residual: Root-mean-square residual of the log-log fit.
        dimension: Spatial dimension (always 1).
    """

    nu: float
    exponent_raw: float
    grid: tuple[float, ...]
    residual: float
    dimension: int = 1


def extract_nu(slopes: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least-squares fit of ``log|dE/dg|`` against ``log|g - g_c|``.

    Raises:
        ValueError: Fewer than four points, or a non-positive entry.
        DegenerateFit: All abscissae coincide.
    """
    pts = sorted(((float(x), float(y)) for x, y in slopes), key=lambda p: -p[0])
    if len(pts) < 4:
        raise ValueError("need at least four points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("distances and slopes must be strictly positive")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0.0:
        raise DegenerateFit("all distances from the critical point coincide")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return ScalingFit(
        nu=float(slope + 1.0),
        exponent_raw=float(slope),
        grid=tuple(x),
        residual=float(np.sqrt(np.mean(resid**2))),
    )
