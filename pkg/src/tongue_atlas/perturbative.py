"""First-order predictions in the kick strength.

Near the vertex of a tongue (k = 0, Omega = j/p) the orbit condition reduces to

    2 pi (j/p - Omega) = (k / sqrt(p)) sin(vartheta),    vartheta = theta0 + xi(p, j)

and the monodromy trace to ``2 + k p**1.5 cos(vartheta)``.  Everything here is
closed form; nothing iterates the map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import OutsideTongueError, ValidationError
from .mapcore import TWO_PI, InvolutionCase, MapParams, fixed_line_momentum, wrap_angle
from .numtheory import WindingRatio, xi_phase

# sin(vartheta) may overshoot +-1 by rounding exactly at an edge
_EDGE_SLACK = 1e-12


@dataclass(frozen=True)
class TongueSpec:
    """Label (p, j) of a tongue; its vertex sits at Omega = j/p on the k = 0 axis."""

    p: int
    j: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValidationError(f"period p must be a positive integer, got {self.p!r}")
        if int(self.j) != self.j:
            raise ValidationError(f"winding j must be an integer, got {self.j!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "j", int(self.j))

    @property
    def vertex_omega(self) -> Fraction:
        return Fraction(self.j, self.p)

    @property
    def coprime(self) -> bool:
        return math.gcd(self.j, self.p) == 1

    @property
    def natural_case(self) -> InvolutionCase:
        """Involution line whose Gauss sum has l = -j (odd p) or l = 0 (even p)."""
        return InvolutionCase.A if self.p % 2 else InvolutionCase.B_PLUS

    def cases(self) -> tuple[InvolutionCase, ...]:
        """Lines scanned by the orbit finder: A always, both B branches for even p."""
        if self.p % 2:
            return (InvolutionCase.A,)
        return (InvolutionCase.A, InvolutionCase.B_PLUS, InvolutionCase.B_MINUS)


@dataclass(frozen=True)
class PerturbativeOrbit:
    vartheta: float
    theta0: float
    j0: float
    s: int
    predicted_trace: float


@dataclass(frozen=True)
class Resonance3Params:
    eta: float
    c_val: float
    c_prime: float
    a_val: float
    a_prime: float
    omega_freq: float


def _require_coprime(t: TongueSpec) -> None:
    if not t.coprime:
        raise ValidationError(f"tongue (p={t.p}, j={t.j}) needs gcd(j, p) = 1")


def tongue_xi(t: TongueSpec, case: InvolutionCase | None = None) -> float:
    """Gauss-sum phase of the tongue on ``case`` (its natural line by default)."""
    case = t.natural_case if case is None else InvolutionCase(case)
    return xi_phase(WindingRatio(t.j, t.p), case)


def tongue_edges(t: TongueSpec, k: float) -> tuple[float, float]:
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    _require_coprime(t)
    half = k / (TWO_PI * math.sqrt(t.p))
    w = float(t.vertex_omega)
    return (w - half, w + half)


def _sin_vartheta(t: TongueSpec, k: float, omega: float) -> float:
    if k <= 0:
        raise OutsideTongueError("k = 0 leaves vartheta undetermined")
    x = TWO_PI * math.sqrt(t.p) * (float(t.vertex_omega) - omega) / k
    if abs(x) > 1.0 + _EDGE_SLACK:
        raise OutsideTongueError(
            f"Omega={omega} lies outside tongue (p={t.p}, j={t.j}) at k={k}"
        )
    return max(-1.0, min(1.0, x))


def solve_vartheta(t: TongueSpec, params: MapParams) -> tuple[float, float]:
    """Stable and unstable solutions of the first-order orbit condition.

    The stable root is the one with cos(vartheta) <= 0.  Both angles are in [0, 2 pi).
    """
    _require_coprime(t)
    x = _sin_vartheta(t, params.k_tilde, params.omega)
    a = math.asin(x)
    return wrap_angle(math.pi - a), wrap_angle(a)


def winding_s(t: TongueSpec, case: InvolutionCase | None = None) -> int:
    """Angle winding at the vertex.

    For the natural case this is j(p-1)/2 for odd p and pj/2 for even p; the
    B_minus line adds a further p/2 because its momentum is shifted by pi.
    """
    case = t.natural_case if case is None else InvolutionCase(case)
    p, j = t.p, t.j
    if case is InvolutionCase.A:
        twice = j * (p - 1)
    elif case is InvolutionCase.B_PLUS:
        twice = j * p
    else:
        twice = j * p + p
    if twice % 2:
        raise ValidationError(
            f"no integer angle winding for (p={p}, j={j}) on line {case.value}"
        )
    return twice // 2


def perturbative_trace(t: TongueSpec, k: float, vartheta: float) -> float:
    return 2.0 + k * t.p**1.5 * math.cos(vartheta)


def perturbative_orbits(t: TongueSpec, params: MapParams) -> tuple[PerturbativeOrbit, PerturbativeOrbit]:
    """Stable and unstable first-order orbits on the tongue's natural involution line."""
    case = t.natural_case
    xi = tongue_xi(t, case)
    s = winding_s(t, case)
    p_case = params.replace(involution_case=case)
    out = []
    for vt in solve_vartheta(t, params):
        th0 = wrap_angle(vt - xi)
        out.append(
            PerturbativeOrbit(
                vartheta=vt,
                theta0=th0,
                j0=wrap_angle(fixed_line_momentum(th0, p_case, case)),
                s=s,
                predicted_trace=perturbative_trace(t, params.k_tilde, vt),
            )
        )
    return out[0], out[1]


def coalescence_gap(t: TongueSpec, k: float, d_omega: float) -> float:
    """|vartheta_u - vartheta_s| at distance ``d_omega`` inside an edge."""
    if k <= 0:
        raise ValidationError(f"coalescence gap needs k > 0, got {k}")
    return math.sqrt(16.0 * math.pi * math.sqrt(t.p) * abs(d_omega) / k)


def predicted_stability_border(t: TongueSpec) -> float:
    """Heuristic k where |k p^1.5 cos(vartheta)| reaches 4, taken on the tongue axis."""
    return 4.0 / t.p**1.5


def p1_boundary(omega: float) -> float:
    return TWO_PI * abs(omega - 1.0)


def p1_stability_border(omega: float) -> float:
    return math.sqrt(16.0 + 4.0 * math.pi**2 * (omega - 1.0) ** 2)


def resonance3_params(eta: float) -> Resonance3Params:
    """Normal-form coefficients a distance ``eta`` past the first period doubling."""
    c = -1.0 - eta
    a = 2.0 * c - 2.0
    c_prime = -2.0 * c * c + 4.0 * c + 7.0
    a_prime = 2.0 * c_prime - 2.0
    # a_prime = -16 eta - 4 eta^2 is negative for eta > 0 and rounds to ~0 at eta = 0
    omega = math.sqrt(-a_prime) if a_prime < 0 else 0.0
    return Resonance3Params(eta, c, c_prime, a, a_prime, omega)


def resonance3_eta() -> Resonance3Params:
    """The eta at which the doubled orbit's oscillation frequency reaches 2 pi / 3."""
    eta = -2.0 + math.sqrt(4.0 + math.pi**2 / 9.0)
    return resonance3_params(eta)
