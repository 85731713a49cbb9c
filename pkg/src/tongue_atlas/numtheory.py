"""Integer arithmetic behind the quadratic Gauss sums of the tongue vertices.

The phase of

    G(p, j) = sum_{m=1}^{p} exp(i pi (l m + j m^2) / p)

is a rational multiple of pi for coprime (j, p).  It is computed here in exact
rational arithmetic and only converted to a float at the end, so that large
``p`` does not lose digits to cancellation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .mapcore import InvolutionCase


@dataclass(frozen=True)
class WindingRatio:
    j: int
    p: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValidationError(f"p must be a positive integer, got {self.p!r}")
        if int(self.j) != self.j:
            raise ValidationError(f"j must be an integer, got {self.j!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "j", int(self.j))

    @property
    def coprime(self) -> bool:
        return math.gcd(self.j, self.p) == 1


@dataclass(frozen=True)
class GaussSumResult:
    magnitude: float
    phase: float
    l_param: int


def factorize(n: int) -> list[int]:
    """Prime factors of ``n`` with multiplicity, by trial division."""
    if n < 1:
        raise ValidationError(f"cannot factorize {n}")
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == [n]


def totient(p: int) -> int:
    if p < 1:
        raise ValidationError(f"totient needs p >= 1, got {p}")
    result = p
    for q in set(factorize(p)):
        result -= result // q
    return result


def mod_inverse(j: int, p: int) -> int:
    """Inverse of ``j`` modulo ``p``, in [1, p) (0 when p = 1)."""
    if p < 1:
        raise ValidationError(f"modulus must be >= 1, got {p}")
    if math.gcd(j, p) != 1:
        raise ValidationError(f"{j} has no inverse mod {p}")
    if p == 1:
        return 0
    return pow(j, -1, p)


def mod_inverse_totient(j: int, p: int) -> int:
    """Inverse via Euler's theorem, j^(phi(p) - 1) mod p; kept as a cross-check."""
    if math.gcd(j, p) != 1:
        raise ValidationError(f"{j} has no inverse mod {p}")
    return pow(j % p, totient(p) - 1, p) if p > 1 else 0


def legendre(a: int, q: int) -> int:
    if q < 3 or not is_prime(q):
        raise ValidationError(f"legendre symbol needs an odd prime, got {q}")
    r = pow(a % q, (q - 1) // 2, q)
    return -1 if r == q - 1 else r


def jacobi(a: int, b: int) -> int:
    """Jacobi symbol as the product of Legendre symbols over the factors of ``b``."""
    if b < 1 or b % 2 == 0:
        raise ValidationError(f"jacobi symbol needs an odd positive modulus, got {b}")
    result = 1
    for q in factorize(b) if b > 1 else []:
        result *= legendre(a, q)
        if result == 0:
            break
    return result


def gauss_l(w: WindingRatio, case: InvolutionCase) -> int:
    """Linear coefficient l of the Gauss sum for an involution case."""
    case = InvolutionCase(case)
    _check_case(w, case)
    if case is InvolutionCase.A:
        return -w.j
    if case is InvolutionCase.B_PLUS:
        return 0
    return w.p


def _check_case(w: WindingRatio, case: InvolutionCase) -> None:
    if w.p % 2 == 1 and case is not InvolutionCase.A:
        raise ValidationError(f"case {case.value} needs even p, got p={w.p}")
    if w.p % 2 == 0 and case is InvolutionCase.A:
        raise ValidationError(f"case A needs odd p, got p={w.p}")


def _reduce_half_turns(x: Fraction) -> Fraction:
    """Reduce a multiple of pi to (-1, 1]."""
    x = x % 2
    return x - 2 if x > 1 else x


def xi_phase_fraction(w: WindingRatio, case: InvolutionCase) -> Fraction:
    """Phase of G(p, j) as an exact multiple of pi in (-1, 1]."""
    case = InvolutionCase(case)
    _check_case(w, case)
    if not w.coprime:
        raise ValidationError(f"j={w.j} and p={w.p} are not coprime")
    p, j = w.p, w.j
    half = Fraction(1, 2)
    if case is InvolutionCase.B_PLUS:
        x = half * (1 - jacobi(p, j) + Fraction(j, 2))
    elif case is InvolutionCase.B_MINUS:
        # l = p; the (l/2)^2 factor is p^2/4
        inv = mod_inverse(j, p)
        x = half * (1 - jacobi(p, j) + Fraction(j, 2) - Fraction(j * p, 2) * inv * inv)
    else:
        l2 = j * j
        base = 1 - jacobi(j, p) - Fraction(p - 1, 2)
        if j % 2 == 0:
            inv = mod_inverse(j, p)
            x = half * (base - Fraction(j, 2 * p) * inv * inv * l2)
        else:
            inv = mod_inverse(4 * j, p)
            x = half * (base - Fraction(8 * j, p) * inv * inv * l2)
    return _reduce_half_turns(x)


def xi_phase(w: WindingRatio, case: InvolutionCase) -> float:
    """Phase of G(p, j) in radians, reduced to (-pi, pi]."""
    return float(xi_phase_fraction(w, case)) * math.pi


def _phase_terms(p: int, j: int, l: int):
    # exponent reduced mod 2p in integers before the float conversion
    for m in range(1, p + 1):
        r = (l * m + j * m * m) % (2 * p)
        yield m, cmath.exp(1j * math.pi * r / p)


def gauss_sum_direct(w: WindingRatio, l: int) -> complex:
    return sum(z for _, z in _phase_terms(w.p, w.j, l))


def weighted_gauss_sum_direct(w: WindingRatio) -> complex:
    """Sum of m exp(i pi (l m + j m^2)/p) with l = -j for odd p and l = 0 for even p."""
    l = -w.j if w.p % 2 else 0
    return sum(m * z for m, z in _phase_terms(w.p, w.j, l))


def gauss_sum(w: WindingRatio, case: InvolutionCase) -> GaussSumResult:
    """Closed-form magnitude and phase of G(p, j) for ``case``."""
    return GaussSumResult(math.sqrt(w.p), xi_phase(w, case), gauss_l(w, case))
