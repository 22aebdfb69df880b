"""
Builtin Maps Module
Generators for the two worked examples: the shift-and-fold map with a
period-n orbit and no fixed point off the fold, and the spiral similarity
with an n-step outflanking arc but no periodic points of period >= 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from planefix import LOGGER
from planefix.modules.angles import circle_polyline
from planefix.modules.geom import Box, Polyline
from planefix.modules.maps import FoldMap, SpiralMap
from planefix.utils import InputError, PointTuple


@dataclass(frozen=True)
class SpiralExample:
    f: SpiralMap
    arc: Polyline
    orbit_params: Tuple[float, ...]
    dip: float
    y_param: float
    region: Polyline

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def y(self) -> np.ndarray:
        return self.arc.point_at(self.y_param)


@dataclass(frozen=True)
class FoldExample:
    f: FoldMap
    x: PointTuple
    period: int
    region: Box


def spiral_breakpoints(n: int, beta: float) -> Tuple[float, float, float, float]:
    b1 = (2.0 * math.pi - n * beta) / 2.0
    return 0.0, b1, 2.0 * b1, beta


def example_4_5(n: int = 3, beta: float = 1.9, dip: Optional[float] = None, samples: int = 64) -> SpiralExample:
    """The spiral arc A = A_0 u f(A_0) u ... u f^(n-1)(A_0) for z -> lambda exp(i beta) z.

    A_0 is the curve phi(t) exp(i t), t in [0, beta], with phi piecewise linear
    through 1, 1, dip, lambda at the breakpoints. The default dip = lambda^-n
    makes the image of the dip point on the last step land exactly on u_0.
    """
    if not (n * beta < 2.0 * math.pi < (n + 1) * beta):
        raise InputError(f"the spiral example needs n*beta < 2*pi < (n+1)*beta, got n={n}, beta={beta}")
    if samples < 2:
        raise InputError("samples per piece must be at least 2")
    f = SpiralMap(n=n, beta=beta)
    lam = f.lam
    dip = lam ** (-n) if dip is None else float(dip)
    if not dip > 0:
        raise InputError("dip must be positive")

    b = spiral_breakpoints(n, beta)
    phi = (1.0, 1.0, dip, lam)
    thetas, radii = [], []
    for k in range(3):
        t = np.linspace(b[k], b[k + 1], samples + 1)[:-1]
        thetas.append(t)
        radii.append(phi[k] + (phi[k + 1] - phi[k]) * (t - b[k]) / (b[k + 1] - b[k]))
    theta = np.concatenate(thetas + [[b[3]]])
    r = np.concatenate(radii + [[phi[3]]])
    eta = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)

    pieces = [eta]
    step = eta
    for _ in range(1, n):
        step = f.evaluate_many(step)
        pieces.append(step[1:])
    arc = Polyline.from_array(np.vstack(pieces))
    per_step = 3 * samples
    if len(arc.vertices) != n * per_step + 1:
        raise InputError("generated spiral arc lost vertices; increase samples")
    params = tuple(float(arc.params[k * per_step]) for k in range(n + 1))
    y_param = float(arc.params[(n - 1) * per_step + 2 * samples])

    reach = float(np.hypot(*f.evaluate_many(arc.array).T).max())
    region = circle_polyline((0.0, 0.0), 1.25 * max(reach, float(np.hypot(*arc.array.T).max())), 128)
    LOGGER.debug(f"Spiral example: n={n} beta={beta} lambda={lam:.9g} dip={dip:.9g}, {len(arc)} vertices")
    return SpiralExample(f, arc, params, dip, y_param, region)


def example_1_2(n: int = 3, shear: bool = True) -> FoldExample:
    """The map with the period-n orbit (1,0) -> (2,0) -> ... -> (n,0) -> (1,0)."""
    f = FoldMap(n=n, shear=shear)
    return FoldExample(f, (1.0, 0.0), n, Box(0.0, -1.0, float(n + 1), 1.0))
