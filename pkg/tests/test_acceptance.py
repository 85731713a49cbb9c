"""Acceptance gate: one PASS/FAIL line per criterion, each with its runtime limit.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

from __future__ import annotations

import cmath
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from tongue_atlas.cascade import UNIVERSAL_ALPHA, UNIVERSAL_DELTA, follow_cascade
from tongue_atlas.errors import ConvergenceError, SingularJacobianError
from tongue_atlas.mapcore import (
    TWO_PI,
    InvolutionCase,
    MapParams,
    Stability,
    TorusPoint,
    circular_distance,
    fixed_line_distance,
    involution_A,
    involution_B,
    lifted_iterates,
    monodromy_along,
    reversor,
    step,
    step_inverse,
    tangent,
)
from tongue_atlas.numtheory import WindingRatio, gauss_l, gauss_sum_direct, xi_phase
from tongue_atlas.orbits import (
    distinct_orbits,
    find_involution_orbits,
    find_non_involution_orbit,
    involution_pairing,
    zero_kick_seeds,
)
from tongue_atlas.perturbative import (
    TongueSpec,
    coalescence_gap,
    p1_stability_border,
    solve_vartheta,
    tongue_edges,
)
from tongue_atlas.tracer import Side, trace_stability_border, trace_tongue_boundary

PI = math.pi
CRITERIA: dict[int, tuple[str, float, object]] = {}


def criterion(n: int, title: str, limit_s: float):
    def register(fn):
        CRITERIA[n] = (title, limit_s, fn)
        return fn
    return register


def evaluate(n: int) -> tuple[bool, str]:
    title, limit, fn = CRITERIA[n]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported on the same line
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t0
    in_time = dt < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    timing = f"{dt:.2f}s < {limit:g}s" if in_time else f"{dt:.2f}s OVER {limit:g}s"
    return ok and in_time, f"criterion {n}: {verdict} | {title} | {detail} | {timing}"


def _cases(p):
    return (InvolutionCase.A,) if p % 2 else (InvolutionCase.B_PLUS, InvolutionCase.B_MINUS)


# ---------------------------------------------------------------------------


@criterion(1, "Gauss-sum oracle p <= 50", 1.0)
def c1():
    worst_mag = worst_phase = 0.0
    count = 0
    for p in range(1, 51):
        for j in range(1, p + 1):
            if math.gcd(j, p) != 1:
                continue
            w = WindingRatio(j, p)
            for case in _cases(p):
                g = gauss_sum_direct(w, gauss_l(w, case))
                worst_mag = max(worst_mag, abs(abs(g) - math.sqrt(p)))
                worst_phase = max(worst_phase,
                                  abs(math.remainder(cmath.phase(g) - xi_phase(w, case), TWO_PI)))
                count += 1
    ok = worst_mag < 1e-9 and worst_phase < 1e-9
    return ok, f"{count} sums, max |G|-sqrt(p) {worst_mag:.1e}, max phase error {worst_phase:.1e}"


REFERENCE_XI = {
    (2, 1): Fraction(1, 4), (3, 1): Fraction(1, 6), (3, 2): Fraction(-1, 6),
    (4, 1): Fraction(1, 4), (4, 3): Fraction(3, 4), (5, 1): Fraction(1, 5),
    (5, 2): Fraction(2, 5), (5, 3): Fraction(-2, 5), (5, 4): Fraction(-1, 5),
    (6, 1): Fraction(1, 4), (6, 5): Fraction(-3, 4), (7, 1): Fraction(3, 14),
    (7, 2): Fraction(-1, 14), (7, 3): Fraction(9, 14), (7, 4): Fraction(-9, 14),
    (7, 5): Fraction(1, 14), (7, 6): Fraction(-3, 14),
}


@criterion(2, "xi reference values, 17 tongues", 1.0)
def c2():
    worst = 0.0
    for (p, j), frac in REFERENCE_XI.items():
        case = InvolutionCase.A if p % 2 else InvolutionCase.B_PLUS
        worst = max(worst, abs(xi_phase(WindingRatio(j, p), case) - float(frac) * PI))
    return worst < 1e-12, f"{len(REFERENCE_XI)} rows, max error {worst:.1e}"


@criterion(3, "p=1 boundary and border exact", 10.0)
def c3():
    t = TongueSpec(1, 1)
    b_err = 0.0
    for side, sign in ((Side.LEFT, -1), (Side.RIGHT, 1)):
        curve = trace_tongue_boundary(t, 6.0, 0.1, side)
        b_err = max(b_err, max(abs(om - (1 + sign * k / TWO_PI)) for k, om in curve.samples))
    border = trace_stability_border(t, (0.75, 1.25, 21))
    s_err = max(abs(k - p1_stability_border(om)) for k, om, _ in border.samples)
    k1 = [k for k, om, _ in border.samples if om == 1.0]
    at1 = abs(k1[0] - 4.0) if k1 else math.inf
    ok = b_err < 1e-8 and s_err < 1e-6 and at1 < 1e-6
    return ok, f"boundary err {b_err:.1e}, border err {s_err:.1e}, |border(1) - 4| {at1:.1e}"


@criterion(4, "tongue half-widths at k=0.01", 30.0)
def c4():
    k = 0.01
    parts = []
    worst = 0.0
    for p, j in ((2, 1), (3, 1), (5, 2)):
        t = TongueSpec(p, j)
        w = float(t.vertex_omega)
        half = k / (TWO_PI * math.sqrt(p))
        for side in (Side.LEFT, Side.RIGHT):
            om = trace_tongue_boundary(t, k, k, side).samples[-1][1]
            rel = abs(abs(om - w) - half) / half
            worst = max(worst, rel)
        parts.append(f"({p},{j})")
    return worst < 0.01, f"{' '.join(parts)} both sides, max rel error {worst:.1e}"


@criterion(5, "pitchfork at Omega=1/2", 5.0)
def c5():
    details = []
    ok = True
    for delta in (1e-3, 4e-3, 1.6e-2):
        orbits = find_involution_orbits(TongueSpec(2, 1), MapParams(PI + delta, 0.5),
                                        cases=(InvolutionCase.B_PLUS,))
        near = sorted((o for o in orbits if circular_distance(o.points[0].theta, PI / 2) < 0.3),
                      key=lambda o: o.points[0].theta)
        if len(near) != 3:
            return False, f"delta={delta}: {len(near)} orbits near pi/2"
        expected = math.sqrt(2 * delta / PI)
        off_err = max(abs(near[0].points[0].theta - PI / 2 + expected),
                      abs(near[2].points[0].theta - PI / 2 - expected))
        tr_err = max(abs(o.trace - (2 - 2 * PI * delta)) for o in (near[0], near[2]))
        ok &= off_err < 0.05 * math.sqrt(delta) and tr_err < 20 * delta**2
        details.append(f"d={delta:g}: offset err {off_err:.1e}, trace err/d^2 {tr_err / delta**2:.2f}")
    return ok, "; ".join(details)


def _period4_stable(k):
    o = find_non_involution_orbit(TorusPoint(0.0, 0.0), 4, MapParams(k, 0.5))
    square = [TorusPoint(0, 0), TorusPoint(0, PI), TorusPoint(PI, 0), TorusPoint(PI, PI)]
    assert all(o.contains(x, 1e-12) for x in square)
    return o.stability is Stability.STABLE


@criterion(6, "period-4 stability windows", 5.0)
def c6():
    ks = np.arange(0.005, 3.5, 0.01)
    flags = [_period4_stable(k) for k in ks]
    edges = []
    for a, b, fa, fb in zip(ks, ks[1:], flags, flags[1:]):
        if fa == fb:
            continue
        lo, hi = a, b
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if _period4_stable(mid) == fa:
                lo = mid
            else:
                hi = mid
        edges.append(0.5 * (lo + hi))
    target = [0.7320, 2.7320, 2.8284]
    if not flags[0] or len(edges) != 3:
        return False, f"transitions at {edges}"
    err = max(abs(a - b) for a, b in zip(edges, target))
    return err < 1e-3, "edges " + ", ".join(f"{e:.6f}" for e in edges) + f", max error {err:.1e}"


REFERENCE_CASCADE = {
    ((1, 0), 0.3692): dict(k_s=4.6239, k_inf=5.1290, alpha=-4.0645, delta=8.5839),
    ((2, 1), 0.3624): dict(k_s=2.0019, k_inf=2.2790, alpha=-3.9919, delta=8.8307),
}


@criterion(7, "cascades vs reference values and universality", 300.0)
def c7():
    ok = True
    details = []
    for ((p, j), omega), row in REFERENCE_CASCADE.items():
        r = follow_cascade(TongueSpec(p, j), omega, n_max=4)
        rel = {
            "k_inf": abs(r.k_infinity - row["k_inf"]) / abs(row["k_inf"]),
            "delta": abs(r.delta_est - row["delta"]) / abs(row["delta"]),
            "alpha": abs(r.alpha_est - row["alpha"]) / abs(row["alpha"]),
        }
        ks_err = abs(r.k_values[0] - row["k_s"])
        du = abs(r.delta_est - UNIVERSAL_DELTA) / UNIVERSAL_DELTA
        au = abs(r.alpha_est - UNIVERSAL_ALPHA) / abs(UNIVERSAL_ALPHA)
        ok &= ks_err < 1e-3 and max(rel.values()) < 0.03 and du < 0.10 and au < 0.10
        details.append(
            f"({p},{j}) k_s={r.k_values[0]:.4f} k_inf={r.k_infinity:.4f} "
            f"delta={r.delta_est:.4f} alpha={r.alpha_est:.4f} "
            f"(max reference dev {max(rel.values()):.1%}, universal dev {max(du, au):.1%})"
        )
    return ok, "; ".join(details)


@criterion(8, "period-6 orbits off the involution lines", 10.0)
def c8():
    params = MapParams(0.345, 0.5)

    def stable_from(s):
        found = []
        for seed in zero_kick_seeds(6, 3, s, params):
            try:
                found.append(find_non_involution_orbit(seed, 6, params))
            except (SingularJacobianError, ConvergenceError):
                continue
        return [o for o in distinct_orbits(found) if o.stability is Stability.STABLE]

    a, b = stable_from(2)[0], stable_from(4)[0]
    if a.same_orbit(b):
        return False, "the two seeds led to the same orbit"
    gap = min(fixed_line_distance(x, params, c) for o in (a, b) for x in o.points
              for c in InvolutionCase)
    pa = involution_pairing(a, b, involution_A)
    pb = involution_pairing(a, b, lambda y: involution_B(y, params))
    if pa is None or pb is None:
        return False, f"involution images do not match (A: {pa}, B: {pb})"
    r = pa[0]
    paired = (all(pa[i] == (r - i) % 6 for i in range(6))
              and all(pb[i] == (r + 1 - i) % 6 for i in range(6)))
    ok = gap > 0.05 and paired
    return ok, (f"traces {a.trace:.6f}/{b.trace:.6f}, min line distance {gap:.3f}, "
                f"I_A: a_i -> b_(-i), I_B: a_i -> b_(1-i): {paired}")


@criterion(9, "property suites, >= 1000 instances each", 60.0)
def c9():
    rng = np.random.default_rng(9)
    n = 1000
    counts = {}

    def point_params():
        return (TorusPoint(*rng.uniform(0, TWO_PI, 2)),
                MapParams(rng.uniform(0, 8), rng.uniform(-1, 2)))

    fails = []
    for _ in range(n):
        x, pr = point_params()
        if not (involution_A(involution_A(x)).distance(x) < 1e-12
                and involution_B(involution_B(x, pr), pr).distance(x) < 1e-12
                and reversor(step(reversor(x), pr)).distance(step_inverse(x, pr)) < 1e-11):
            fails.append("involution")
        if involution_B(involution_A(x), pr).distance(step(x, pr)) > 1e-11:
            fails.append("factorisation")
    counts["involutions"] = counts["factorisation"] = n

    for _ in range(n):
        p = int(rng.integers(1, 65))
        pr = MapParams(rng.uniform(0, 3), 0.0)
        m = monodromy_along(rng.uniform(0, TWO_PI, p), pr)
        if abs(m.det - 1) > 1e-10 * max(1.0, abs(m.a * m.d)):
            fails.append("det")
        if abs(tangent(rng.uniform(0, TWO_PI), pr).det - 1) > 1e-12:
            fails.append("det")
    counts["det"] = n

    orbit_checks = inventories = 0
    while inventories < n or orbit_checks < n:
        k, om = rng.uniform(0.05, 4.0), rng.uniform(0.0, 1.0)
        pr = MapParams(k, om)
        p = int(rng.integers(1, 5))
        j = int(rng.integers(0, p + 1))
        orbits = find_involution_orbits(TongueSpec(p, j), pr, primitive_only=False)
        inventories += 1
        for o in orbits:
            x = o.points[0]
            th, J = lifted_iterates(x.theta, x.J, k, om, p)
            scale = 1e-9 * (1 + abs(o.trace))
            dj = (J[-1] - x.J) / TWO_PI
            ds = (th[-1] - x.theta) / TWO_PI
            if abs(dj - round(dj)) * TWO_PI > scale or abs(ds - round(ds)) * TWO_PI > scale:
                fails.append("closure")
            if round(dj) != o.winding_j or round(ds) != o.winding_s:
                fails.append("winding")
            orbit_checks += 1
        # time reversal (theta, J) -> (theta + J, -J) maps the inventory onto itself
        for o in orbits:
            img = [reversor(x) for x in o.points]
            tol = 1e-7 * (1 + abs(o.trace))
            if not any(all(q.contains(y, tol) for y in img) for q in orbits):
                fails.append("inventory")
    counts["closure"] = orbit_checks
    counts["inventory"] = inventories

    gap_worst = 0.0
    for _ in range(n):
        p = int(rng.integers(1, 4))
        j = int(rng.integers(1, p + 1))
        if math.gcd(j, p) != 1:
            j = 1
        t = TongueSpec(p, j)
        k = rng.uniform(1e-3, 2e-2)
        d = 10 ** rng.uniform(-7, -5) * k
        lo, hi = tongue_edges(t, k)
        om = lo + d if rng.random() < 0.5 else hi - d
        s, u = solve_vartheta(t, MapParams(k, om))
        gap = circular_distance(s, u)
        gap_worst = max(gap_worst, abs(gap / coalescence_gap(t, k, d) - 1))
    if gap_worst > 0.05:
        fails.append("coalescence")
    counts["coalescence"] = n

    ok = not fails and min(counts.values()) >= 1000
    summary = ", ".join(f"{name} {c}" for name, c in counts.items())
    return ok, f"{summary}; orbit gap rel err {gap_worst:.1e}; failures {sorted(set(fails)) or 'none'}"


# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line = evaluate(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
