"""Exact evaluation of the kicked accelerator map on the 2-torus.

The map advances the angle first and then kicks the momentum with the
*updated* angle::

    theta' = theta + J                           (mod 2 pi)
    J'     = J + k sin(theta') + 2 pi Omega      (mod 2 pi)

It factors into two involutions, ``step = involution_B o involution_A``, and is
time-reversed by ``reversor``.  Tangent matrices use the (J, theta) ordering of
rows and columns, i.e. ``[[dJ'/dJ, dJ'/dtheta], [dtheta'/dJ, dtheta'/dtheta]]``.
Trace and determinant do not depend on that choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import OrbitClosureError, ValidationError

TWO_PI = 2.0 * math.pi
DEFAULT_MARGINAL_TOL = 1e-9


def wrap_angle(x: float) -> float:
    """Reduce ``x`` to [0, 2 pi)."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2 pi
    if y >= TWO_PI:
        y = 0.0
    return y


def wrap_signed(x):
    """Reduce ``x`` to [-pi, pi]; works on scalars and arrays."""
    if isinstance(x, np.ndarray):
        return np.remainder(x + math.pi, TWO_PI) - math.pi
    return math.remainder(x, TWO_PI)


def circular_distance(a: float, b: float) -> float:
    return abs(math.remainder(a - b, TWO_PI))


class InvolutionCase(str, Enum):
    """Which involution fixed line seeds an orbit search.

    ``A`` is the line J = 0; ``B_PLUS`` and ``B_MINUS`` are the two branches
    J = k sin(theta)/2 + pi Omega (+ pi) of the second involution.
    """

    A = "A"
    B_PLUS = "B_plus"
    B_MINUS = "B_minus"


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class TorusPoint:
    theta: float
    J: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "J", wrap_angle(float(self.J)))

    def distance(self, other: "TorusPoint") -> float:
        """Largest circular coordinate difference."""
        return max(
            circular_distance(self.theta, other.theta),
            circular_distance(self.J, other.J),
        )

    def as_tuple(self) -> tuple[float, float]:
        return (self.theta, self.J)


@dataclass(frozen=True)
class MapParams:
    k_tilde: float
    omega: float
    involution_case: InvolutionCase = InvolutionCase.A

    def __post_init__(self):
        k = float(self.k_tilde)
        if not math.isfinite(k) or k < 0.0:
            raise ValidationError(f"k_tilde must be finite and >= 0, got {self.k_tilde!r}")
        if not math.isfinite(float(self.omega)):
            raise ValidationError(f"omega must be finite, got {self.omega!r}")
        object.__setattr__(self, "k_tilde", k)
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "involution_case", InvolutionCase(self.involution_case))

    def replace(self, **changes) -> "MapParams":
        values = {
            "k_tilde": self.k_tilde,
            "omega": self.omega,
            "involution_case": self.involution_case,
        }
        values.update(changes)
        return MapParams(**values)


@dataclass(frozen=True)
class Jacobian2x2:
    a: float
    b: float
    c: float
    d: float

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Jacobian2x2") -> "Jacobian2x2":
        return Jacobian2x2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @classmethod
    def identity(cls) -> "Jacobian2x2":
        return cls(1.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class OrbitRecord:
    """A periodic orbit found on the torus.

    ``points`` are in time order. ``case`` records the involution line that
    ``points[0]`` was found on, or ``None`` for orbits located without the
    involution method.
    """

    points: tuple[TorusPoint, ...]
    period: int
    winding_j: int
    winding_s: int
    trace: float
    stability: Stability
    case: InvolutionCase | None = None
    symmetric: tuple[tuple[int, InvolutionCase], ...] = field(default=())

    def contains(self, x: TorusPoint, tol: float = 1e-7) -> bool:
        return any(q.distance(x) < tol for q in self.points)

    def same_orbit(self, other: "OrbitRecord", tol: float = 1e-7) -> bool:
        return self.period == other.period and other.contains(self.points[0], tol)

    def index_of(self, x: TorusPoint, tol: float = 1e-7) -> int | None:
        for i, q in enumerate(self.points):
            if q.distance(x) < tol:
                return i
        return None


# ---------------------------------------------------------------------------
# the map and its factors


def step(x: TorusPoint, params: MapParams) -> TorusPoint:
    theta = x.theta + x.J
    J = x.J + params.k_tilde * math.sin(theta) + TWO_PI * params.omega
    return TorusPoint(theta, J)


def step_inverse(x: TorusPoint, params: MapParams) -> TorusPoint:
    J = x.J - params.k_tilde * math.sin(x.theta) - TWO_PI * params.omega
    return TorusPoint(x.theta - J, J)


def iterate(x: TorusPoint, params: MapParams, n: int) -> TorusPoint:
    for _ in range(n):
        x = step(x, params)
    return x


def involution_A(x: TorusPoint) -> TorusPoint:
    return TorusPoint(x.theta + x.J, -x.J)


def involution_B(x: TorusPoint, params: MapParams) -> TorusPoint:
    return TorusPoint(
        x.theta, -x.J + params.k_tilde * math.sin(x.theta) + TWO_PI * params.omega
    )


def free_rotation(x: TorusPoint) -> TorusPoint:
    return TorusPoint(x.theta + x.J, x.J)


def momentum_flip(x: TorusPoint) -> TorusPoint:
    return TorusPoint(x.theta, -x.J)


def reversor(x: TorusPoint) -> TorusPoint:
    """Time reversal: momentum flip after a free rotation."""
    return momentum_flip(free_rotation(x))


def lifted_iterates(theta, J, k: float, omega: float, n: int):
    """Iterate without reducing mod 2 pi.

    Accepts scalars or arrays. Returns ``(thetas, Js)`` with a leading axis of
    length ``n + 1`` holding the initial values followed by each iterate.
    """
    theta = np.asarray(theta, dtype=float)
    J = np.asarray(J, dtype=float)
    thetas = np.empty((n + 1,) + np.broadcast(theta, J).shape)
    Js = np.empty_like(thetas)
    thetas[0] = theta
    Js[0] = J
    kick = TWO_PI * omega
    for i in range(n):
        theta = theta + J
        J = J + k * np.sin(theta) + kick
        thetas[i + 1] = theta
        Js[i + 1] = J
    return thetas, Js


# ---------------------------------------------------------------------------
# linearisation


def tangent(theta_next: float, params: MapParams) -> Jacobian2x2:
    """Tangent matrix of one step, evaluated at the updated angle."""
    kc = params.k_tilde * math.cos(theta_next)
    return Jacobian2x2(1.0 + kc, kc, 1.0, 1.0)


def monodromy_along(thetas_next: Sequence[float], params: MapParams) -> Jacobian2x2:
    """Ordered product ``T(theta_n) ... T(theta_1)`` over the given updated angles."""
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    k = params.k_tilde
    for th in thetas_next:
        kc = k * math.cos(th)
        # [[1+kc, kc], [1, 1]] @ [[a, b], [c, d]]
        a, b, c, d = (1.0 + kc) * a + kc * c, (1.0 + kc) * b + kc * d, a + c, b + d
    return Jacobian2x2(a, b, c, d)


def orbit_closure_error(points: Sequence[TorusPoint], params: MapParams) -> float:
    """Largest one-step mismatch around the cycle ``points``."""
    err = 0.0
    p = len(points)
    for i in range(p):
        err = max(err, step(points[i], params).distance(points[(i + 1) % p]))
    return err


def monodromy(orbit: OrbitRecord, params: MapParams, tol: float = 1e-8) -> Jacobian2x2:
    """Monodromy matrix of a periodic orbit, starting at ``orbit.points[0]``.

    Raises ``OrbitClosureError`` if consecutive points are not images of each
    other under the map to within ``tol``.
    """
    pts = orbit.points
    if len(pts) != orbit.period or orbit.period < 1:
        raise OrbitClosureError("orbit point count does not match its period")
    err = orbit_closure_error(pts, params)
    if err > tol:
        raise OrbitClosureError(f"orbit is not periodic: one-step mismatch {err:.3e}")
    p = orbit.period
    return monodromy_along([pts[(i + 1) % p].theta for i in range(p)], params)


def classify_stability(trace: float, tol: float = DEFAULT_MARGINAL_TOL) -> Stability:
    if tol <= 0:
        raise ValidationError("tol must be positive")
    t = abs(trace)
    if t < 2.0 - tol:
        return Stability.STABLE
    if t > 2.0 + tol:
        return Stability.UNSTABLE
    return Stability.MARGINAL


# ---------------------------------------------------------------------------
# involution fixed lines


def fixed_line_momentum(theta, params: MapParams, case: InvolutionCase):
    """Momentum of the involution fixed line ``case`` at angle ``theta``."""
    case = InvolutionCase(case)
    if case is InvolutionCase.A:
        return np.zeros_like(theta, dtype=float) if isinstance(theta, np.ndarray) else 0.0
    J = 0.5 * params.k_tilde * np.sin(theta) + math.pi * params.omega
    if case is InvolutionCase.B_MINUS:
        J = J + math.pi
    return J if isinstance(theta, np.ndarray) else float(J)


def fixed_line_distance(x: TorusPoint, params: MapParams, case: InvolutionCase) -> float:
    """Circular distance in J between ``x`` and the fixed line ``case``."""
    return circular_distance(x.J, fixed_line_momentum(x.theta, params, case))


def symmetric_points(
    points: Sequence[TorusPoint], params: MapParams, tol: float = 1e-7
) -> tuple[tuple[int, InvolutionCase], ...]:
    """Indices of orbit points lying on an involution fixed line."""
    out = []
    for i, x in enumerate(points):
        for case in InvolutionCase:
            if fixed_line_distance(x, params, case) < tol:
                out.append((i, case))
    return tuple(out)
