import cmath
import math

import pytest
from hypothesis import given, strategies as st

from tongue_atlas.errors import ValidationError
from tongue_atlas.mapcore import InvolutionCase as C
from tongue_atlas.numtheory import (
    WindingRatio,
    factorize,
    gauss_l,
    gauss_sum,
    gauss_sum_direct,
    jacobi,
    legendre,
    mod_inverse,
    mod_inverse_totient,
    totient,
    weighted_gauss_sum_direct,
    xi_phase,
    xi_phase_fraction,
)

PI = math.pi


def totient_by_count(p):
    if p == 1:
        return 1
    return sum(1 for m in range(1, p) if math.gcd(m, p) == 1)


def is_square_mod(a, q):
    return any((x * x - a) % q == 0 for x in range(q))


def legendre_by_squares(a, q):
    if a % q == 0:
        return 0
    return 1 if is_square_mod(a, q) else -1


def cases_for(p):
    return (C.A,) if p % 2 else (C.B_PLUS, C.B_MINUS)


def coprime_pairs(p_max):
    for p in range(1, p_max + 1):
        for j in range(1, p + 1):
            if math.gcd(j, p) == 1:
                yield p, j


def test_totient_examples():
    assert totient(1) == 1
    assert totient(7) == 6
    assert totient(12) == 4


@given(st.integers(1, 3000))
def test_totient_matches_count(p):
    assert totient(p) == totient_by_count(p)


@given(st.integers(1, 100000))
def test_factorize_product(n):
    fs = factorize(n)
    assert math.prod(fs) == n
    assert all(len(factorize(q)) == 1 for q in fs)


def test_mod_inverse_examples():
    assert mod_inverse(1, 9) == 1
    assert mod_inverse(3, 7) == 5
    with pytest.raises(ValidationError):
        mod_inverse(4, 6)


def test_mod_inverse_agrees_with_totient_formula():
    for p in range(2, 501):
        for j in range(1, p):
            if math.gcd(j, p) == 1:
                inv = mod_inverse(j, p)
                assert (j * inv) % p == 1 and 1 <= inv < p
                assert inv == mod_inverse_totient(j, p)


def test_legendre_examples():
    assert legendre(1, 7) == 1
    assert legendre(2, 7) == 1
    assert legendre(2, 5) == -1
    for bad in (1, 2, 9):
        with pytest.raises(ValidationError):
            legendre(3, bad)


def test_legendre_matches_squares():
    for q in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        for a in range(-40, 40):
            assert legendre(a, q) == legendre_by_squares(a, q)


def test_jacobi_examples():
    for j in range(-5, 6):
        assert jacobi(j, 1) == 1
    assert jacobi(2, 15) == 1
    for p in (1, 3, 5, 7, 9, 11, 15, 21):
        assert jacobi(-1, p) == round(cmath.exp(1j * PI * (p - 1) / 2).real)
    with pytest.raises(ValidationError):
        jacobi(3, 8)


@given(st.integers(-200, 200), st.integers(0, 60), st.integers(0, 60))
def test_jacobi_multiplicative_in_modulus(a, m, n):
    b1, b2 = 2 * m + 1, 2 * n + 1
    assert jacobi(a, b1 * b2) == jacobi(a, b1) * jacobi(a, b2)


def test_xi_examples():
    assert xi_phase(WindingRatio(1, 2), C.B_PLUS) == pytest.approx(PI / 4, abs=1e-15)
    assert xi_phase(WindingRatio(1, 3), C.A) == pytest.approx(PI / 6, abs=1e-15)
    assert xi_phase(WindingRatio(3, 7), C.A) == pytest.approx(9 * PI / 14, abs=1e-15)


def test_xi_rejects_parity_mismatch():
    with pytest.raises(ValidationError):
        xi_phase(WindingRatio(1, 3), C.B_PLUS)
    with pytest.raises(ValidationError):
        xi_phase(WindingRatio(1, 4), C.A)
    with pytest.raises(ValidationError):
        xi_phase(WindingRatio(2, 4), C.B_PLUS)


def test_xi_range():
    for p, j in coprime_pairs(60):
        for case in cases_for(p):
            x = xi_phase_fraction(WindingRatio(j, p), case)
            assert -1 < x <= 1


def test_direct_sum_examples():
    g = gauss_sum_direct(WindingRatio(1, 2), 0)
    assert g == pytest.approx(1 + 1j, abs=1e-15)
    g = gauss_sum_direct(WindingRatio(1, 3), -1)
    assert g == pytest.approx(1.5 + 1j * math.sqrt(3) / 2, abs=1e-15)


def test_closed_form_matches_direct_sum_p200():
    worst = 0.0
    for p, j in coprime_pairs(200):
        w = WindingRatio(j, p)
        for case in cases_for(p):
            g = gauss_sum_direct(w, gauss_l(w, case))
            assert abs(abs(g) - math.sqrt(p)) < 1e-9
            err = abs(math.remainder(cmath.phase(g) - xi_phase(w, case), 2 * PI))
            worst = max(worst, err)
    assert worst < 1e-9


def test_gauss_sum_result():
    r = gauss_sum(WindingRatio(2, 5), C.A)
    assert r.magnitude == pytest.approx(math.sqrt(5))
    assert r.l_param == -2
    assert r.phase == pytest.approx(2 * PI / 5)


def test_weighted_sum_odd():
    for p in (3, 5, 7):
        for j in range(1, p):
            w = WindingRatio(j, p)
            ratio = weighted_gauss_sum_direct(w) / gauss_sum_direct(w, -j)
            assert ratio == pytest.approx((p + 1) / 2, abs=1e-12)


def test_weighted_sum_even():
    for p in (2, 4, 6):
        for j in range(1, p):
            if math.gcd(j, p) != 1:
                continue
            w = WindingRatio(j, p)
            expected = (p / 2) * (gauss_sum_direct(w, 0) + 1)
            assert weighted_gauss_sum_direct(w) == pytest.approx(expected, abs=1e-12)


def test_weighted_sum_p1():
    w = WindingRatio(1, 1)
    assert weighted_gauss_sum_direct(w) == pytest.approx(gauss_sum_direct(w, -1))
