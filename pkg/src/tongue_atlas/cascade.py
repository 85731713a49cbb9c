"""Period-doubling cascades inside a tongue.

Starting from the stable period-p orbit at fixed Omega, the orbit is followed
up in k until its trace reaches -2 (``k_0``).  Just past that point the doubled
orbit is picked up on a symmetry line through the parent, followed to its own
doubling ``k_1``, and so on.  At each ``k_n`` the angle gap between orbit points
half a period apart is recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CascadeLostError, NumericalError, ValidationError
from .mapcore import (
    InvolutionCase,
    MapParams,
    Stability,
    TorusPoint,
    fixed_line_distance,
    wrap_signed,
)
from .orbits import FinderConfig, involution_roots, is_primitive, j0_from_case, orbit_from_point
from .perturbative import TongueSpec
from .tracer import _first_stable, follow_to_doubling

UNIVERSAL_DELTA = 8.721
UNIVERSAL_ALPHA = -4.018

# line membership test for parent points; parents are polished to ~1e-12
_ON_LINE_TOL = 1e-6
_CHILD_GRID = 2000


@dataclass(frozen=True)
class CascadeReport:
    """Bifurcation values ``k_values[n]`` of the period ``2**n * p`` orbit and
    half-period gaps ``dtheta_values`` (one per even-period level).

    The estimates use the last three k values and the last two gaps.
    """

    tongue: TongueSpec
    omega: float
    k_values: tuple[float, ...]
    dtheta_values: tuple[float, ...]
    delta_est: float
    alpha_est: float
    k_infinity: float
    n_max: int
    periods: tuple[int, ...] = ()
    traces: tuple[float, ...] = ()
    delta_ratios: tuple[float, ...] = ()
    alpha_ratios: tuple[float, ...] = ()


def estimate_scaling(k_values, dtheta_values) -> tuple[float, float, float]:
    """(delta, alpha, k_infinity) from the tail of the sequences; NaN where too short.

    delta = (k_{n-1} - k_{n-2}) / (k_n - k_{n-1}); alpha = dtheta_{n-1} / dtheta_n;
    k_infinity = k_n + (k_n - k_{n-1}) / (delta - 1), the geometric-series limit.
    """
    ks = list(k_values)
    ds = list(dtheta_values)
    delta = alpha = kinf = math.nan
    if len(ks) >= 3:
        delta = (ks[-2] - ks[-3]) / (ks[-1] - ks[-2])
        kinf = ks[-1] + (ks[-1] - ks[-2]) / (delta - 1.0)
    if len(ds) >= 2:
        alpha = ds[-2] / ds[-1]
    return delta, alpha, kinf


def _ratios(xs):
    return tuple(a / b for a, b in zip(xs, xs[1:]))


def _report(t, omega, ks, dths, n_max, periods, traces) -> CascadeReport:
    delta, alpha, kinf = estimate_scaling(ks, dths)
    gaps = [b - a for a, b in zip(ks, ks[1:])]
    return CascadeReport(
        tongue=t, omega=omega, k_values=tuple(ks), dtheta_values=tuple(dths),
        delta_est=delta, alpha_est=alpha, k_infinity=kinf, n_max=n_max,
        periods=tuple(periods), traces=tuple(traces),
        delta_ratios=_ratios(gaps), alpha_ratios=_ratios(dths),
    )


def _lines_through(x: TorusPoint, params: MapParams) -> list[InvolutionCase]:
    return [c for c in InvolutionCase if fixed_line_distance(x, params, c) < _ON_LINE_TOL]


def _half_period_gap(points: tuple[TorusPoint, ...], i: int) -> float:
    P = len(points)
    return wrap_signed(points[(i + P // 2) % P].theta - points[i].theta)


def _find_child(parent_points, k_parent, P, J, k, omega, window, cfg):
    """The stable doubled orbit at parameter k near the parent's symmetric points.

    Line membership of parent points is judged at the parent's own ``k_parent``
    since the B lines move with k.  Returns (parent index, line, child start
    angle).  Parent points are visited in orbit order and lines in their fixed
    order, so the choice is deterministic.
    """
    params_at = MapParams(k, omega)
    for i, x in enumerate(parent_points):
        for case in _lines_through(x, MapParams(k_parent, omega)):
            line_params = params_at.replace(involution_case=case)
            lo, hi = x.theta - window, x.theta + window
            roots = involution_roots(2 * P, 2 * J, line_params, case, cfg, lo, hi,
                                     grid_points=_CHILD_GRID)
            for r in sorted(roots, key=lambda r: abs(r - x.theta)):
                J0 = float(j0_from_case(r, line_params, case))
                try:
                    child = orbit_from_point((r, J0), 2 * P, line_params, case,
                                             cfg.closure_tol, cfg.marginal_tol)
                except NumericalError:
                    continue
                if child.stability is Stability.STABLE and is_primitive(child):
                    return i, case, r
    return None


def follow_cascade(
    t: TongueSpec,
    omega: float,
    cfg: FinderConfig | None = None,
    n_max: int = 4,
    k_start: float | None = None,
    k_step: float = 0.05,
) -> CascadeReport:
    """Locate ``k_0 .. k_{n_max}`` for the cascade of tongue ``t`` at ``omega``.

    Raises ``CascadeLostError`` carrying the partial report if some doubled
    orbit cannot be found or followed.
    """
    if not 0 <= n_max <= 6:
        raise ValidationError(f"n_max must lie in [0, 6], got {n_max}")
    cfg = cfg or FinderConfig()
    if k_start is None:
        k_start = max(k_step, 0.5 * 2 * math.pi * math.sqrt(t.p)
                      * abs(omega - float(t.vertex_omega)))
    k, first = _first_stable(t, omega, k_start, k_step, k_start + 20.0, cfg)
    theta, case = first.points[0].theta, first.case
    P, J = t.p, t.j
    ks: list[float] = []
    dths: list[float] = []
    periods: list[int] = []
    traces: list[float] = []

    def lost(msg):
        return CascadeLostError(msg, _report(t, omega, ks, dths, n_max, periods, traces))

    for n in range(n_max + 1):
        # initial continuation step, scaled to the expected distance to k_n
        if n == 0:
            step0 = 1e-3
        elif n == 1:
            step0 = 2e-4
        else:
            step0 = (ks[-1] - ks[-2]) / 50.0
        try:
            c = follow_to_doubling(theta, P, J, k, omega, case, cfg, k_step=step0,
                                   max_step=max(0.02 if n == 0 else 10 * step0, step0))
        except NumericalError as exc:
            raise lost(f"period-{P} orbit lost before doubling: {exc}") from exc
        params = MapParams(c.k, omega, case)
        J0 = float(j0_from_case(c.theta0, params, case))
        parent = orbit_from_point((c.theta0, J0), P, params, case, None)
        ks.append(c.k)
        periods.append(P)
        traces.append(c.trace)
        if n == n_max:
            if P % 2 == 0:
                dths.append(_half_period_gap(parent.points, 0))
            break
        dk = 1e-3 if n == 0 else (ks[-1] - ks[-2]) / 200.0
        if n == 0:
            window = 0.3
        else:
            window = 0.5 * abs(_half_period_gap(parent.points, 0))
        child = _find_child(parent.points, c.k, P, J, c.k + dk, omega, window, cfg)
        if child is None:
            raise lost(f"no stable period-{2 * P} orbit near k={c.k + dk}")
        i, case, theta = child
        if P % 2 == 0:
            dths.append(_half_period_gap(parent.points, i))
        k = c.k + dk
        P, J = 2 * P, 2 * J
    return _report(t, omega, ks, dths, n_max, periods, traces)


def universality_check(report: CascadeReport) -> tuple[float, float]:
    """Relative deviations of the report's delta and alpha from the universal values."""
    if len(report.k_values) < 3:
        raise ValidationError("universality check needs at least 3 bifurcations")
    delta_dev = (report.delta_est - UNIVERSAL_DELTA) / UNIVERSAL_DELTA
    alpha_dev = (report.alpha_est - UNIVERSAL_ALPHA) / UNIVERSAL_ALPHA
    return delta_dev, alpha_dev
