"""Continuation in the (k, Omega) plane.

Tongue boundaries use the overshoot idea: between the stable and unstable
roots of F_J sits an extremum, and it changes sign as Omega crosses the edge.
Stability borders follow the stable orbit up in k until its trace passes -2,
then bisect.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, golden

from .errors import (
    DegenerateResidualError,
    LostTongueError,
    NoStableOrbitError,
    NumericalError,
    ValidationError,
)
from .mapcore import TWO_PI, InvolutionCase, MapParams, Stability, lifted_iterates, monodromy_along
from .orbits import (
    FinderConfig,
    _check_degenerate,
    _residual_arrays,
    f_j_scalar,
    find_involution_orbits,
    j0_from_case,
    polish_line_root,
)
from .parallel import resolve_threads
from .perturbative import TongueSpec, tongue_edges

DEFAULT_BOUNDARY_TOL = 1e-10
DEFAULT_BORDER_TOL = 1e-6
_GOLDEN_TOL = 1e-12
_BISECT_MAX = 80


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class BoundaryCurve:
    tongue: TongueSpec
    side: Side
    samples: tuple[tuple[float, float], ...]
    f_ext: tuple[float, ...] = ()


@dataclass(frozen=True)
class BorderCurve:
    """Samples (k, Omega, trace) where the followed orbit's trace reaches ``target``."""

    tongue: TongueSpec
    samples: tuple[tuple[float, float, float], ...]
    target: float = -2.0


@dataclass(frozen=True)
class CensusEntry:
    cell: tuple[int, int]
    k: float
    omega: float
    p: int
    j: int
    n_orbits: int
    n_stable: int
    stabilities: tuple[str, ...]
    traces: tuple[float, ...]


# ---------------------------------------------------------------------------
# extrema of F_J


def _golden_extremum(fun, lo: float, hi: float, n_probe: int = 33):
    """Golden-section refine of the single extremum of ``fun`` inside (lo, hi).

    Returns (x, f(x)).  The interior is probed first; if the most extreme probe
    is not strictly beyond both endpoints there is no interior extremum.
    """
    xs = np.linspace(lo, hi, n_probe + 2)
    fs = np.array([fun(x) for x in xs])
    imax, imin = int(np.argmax(fs)), int(np.argmin(fs))
    # height of each candidate above the endpoints
    max_lift = fs[imax] - max(fs[0], fs[-1])
    min_drop = min(fs[0], fs[-1]) - fs[imin]
    interior_max = 0 < imax < len(xs) - 1 and max_lift > 0
    interior_min = 0 < imin < len(xs) - 1 and min_drop > 0
    if not (interior_max or interior_min):
        raise NumericalError("bracket holds no interior extremum of F_J")
    sign = 1.0 if interior_min and (not interior_max or min_drop >= max_lift) else -1.0
    i = imin if sign > 0 else imax
    x, fx, _ = golden(lambda t: sign * fun(t), brack=(xs[i - 1], xs[i], xs[i + 1]),
                      tol=_GOLDEN_TOL, full_output=True)
    return float(x), sign * float(fx)


def extremum_of_residual(
    t: TongueSpec, params: MapParams, bracket: tuple[float, float]
) -> tuple[float, float]:
    """Location and value of the extremum of F_J inside ``bracket``.

    Uses the line ``params.involution_case``.  Inside a tongue the value has the
    sign that separates the stable and unstable roots; on the boundary it is 0.
    """
    _check_degenerate(t.p, t.j, params)
    lo, hi = bracket
    if not hi > lo:
        raise ValidationError("bracket must satisfy lo < hi")
    case = params.involution_case
    return _golden_extremum(lambda x: f_j_scalar(x, t.p, t.j, params, case), lo, hi)


def global_extremum(
    t: TongueSpec, params: MapParams, case: InvolutionCase, kind: str, n_grid: int = 4096
) -> tuple[float, float]:
    """Global min (``kind='min'``) or max of F_J over a whole turn of the line ``case``."""
    grid = np.linspace(0.0, TWO_PI, n_grid + 1)[:-1]
    f, _ = _residual_arrays(grid, t.p, t.j, params, case)
    sign = 1.0 if kind == "min" else -1.0
    i = int(np.argmin(sign * f))
    h = grid[1] - grid[0]

    def fun(x):
        return sign * f_j_scalar(x, t.p, t.j, params, case)

    # the sampled extremum is bracketed by its neighbours on the periodic grid
    x, fx, _ = golden(fun, brack=(grid[i] - h, grid[i], grid[i] + h), tol=_GOLDEN_TOL,
                      full_output=True)
    return float(x) % TWO_PI, sign * float(fx)


def boundary_cases(t: TongueSpec) -> tuple[InvolutionCase, ...]:
    """Lines used for boundary tracing: those carrying the tongue's Gauss-sum orbits."""
    if t.p % 2:
        return (InvolutionCase.A,)
    return (InvolutionCase.B_PLUS, InvolutionCase.B_MINUS)


def edge_function(t: TongueSpec, k: float, omega: float, side: Side, n_grid: int = 4096) -> float:
    """Signed distance-like quantity that vanishes on the ``side`` edge.

    Right edge: the smallest minimum of F_J over the boundary lines (positive
    outside).  Left edge: minus the largest maximum (also positive outside).
    """
    params = MapParams(k, omega)
    side = Side(side)
    kind = "min" if side is Side.RIGHT else "max"
    vals = [global_extremum(t, params.replace(involution_case=c), c, kind, n_grid)[1]
            for c in boundary_cases(t)]
    return min(vals) if side is Side.RIGHT else -max(vals)


# ---------------------------------------------------------------------------
# boundaries


def _solve_edge_omega(t, k, guess, width, side, boundary_tol, n_grid, max_width):
    def f(om):
        return edge_function(t, k, om, side, n_grid)

    # inside is toward the vertex; outside away from it
    direction = 1.0 if side is Side.RIGHT else -1.0
    w = width
    while w <= max_width:
        a, b = guess - w, guess + w
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a, fa
        if fb == 0.0:
            return b, fb
        if fa * fb < 0:
            om = brentq(f, a, b, xtol=1e-15, rtol=1e-15, maxiter=_BISECT_MAX)
            val = f(om)
            if abs(val) >= boundary_tol:
                raise NumericalError(
                    f"edge residual {val:.3e} above boundary_tol at k={k}"
                )
            return om, val
        # both inside or both outside: shift the window the right way and widen it
        outside = fa > 0
        guess += direction * (w if not outside else -w)
        w *= 2.0
    raise LostTongueError(f"no edge crossing for tongue ({t.p},{t.j}) near Omega={guess} at k={k}")


def trace_tongue_boundary(
    t: TongueSpec,
    k_max: float,
    step: float,
    side: Side | str = Side.RIGHT,
    boundary_tol: float = DEFAULT_BOUNDARY_TOL,
    cfg: FinderConfig | None = None,
) -> BoundaryCurve:
    """March k upward from near the vertex, solving for the edge Omega at each level.

    Each level starts from a linear extrapolation of the previous two samples
    (the first-order edge for the first level).  ``LostTongueError`` is raised
    if no sign change is found in a window that grows to a quarter turn.
    """
    if not step > 0:
        raise ValidationError(f"step must be > 0, got {step}")
    if not k_max > 0:
        raise ValidationError(f"k_max must be > 0, got {k_max}")
    cfg = cfg or FinderConfig()
    side = Side(side)
    k0 = max(1e-4, step)
    if k0 > k_max:
        raise ValidationError(f"k_max={k_max} is below the first level {k0}")
    n_levels = int(math.floor((k_max - k0) / step + 1e-9)) + 1
    ks = [k0 + i * step for i in range(n_levels)]
    samples: list[tuple[float, float]] = []
    fvals: list[float] = []
    idx = 1 if side is Side.RIGHT else 0
    for k in ks:
        if len(samples) >= 2:
            (ka, oa), (kb, ob) = samples[-2], samples[-1]
            guess = ob + (ob - oa) * (k - kb) / (kb - ka)
            width = max(abs(ob - oa) * 0.05, 1e-9)
        elif samples:
            kb, ob = samples[-1]
            guess = ob + (ob - float(t.vertex_omega)) * (k - kb) / kb
            width = max(abs(guess - ob) * 0.1, 1e-9)
        else:
            guess = tongue_edges(t, k)[idx]
            width = max(k / (TWO_PI * math.sqrt(t.p)) * 0.05, 1e-9)
        om, val = _solve_edge_omega(t, k, guess, width, side, boundary_tol,
                                    cfg.grid_points, 0.25)
        samples.append((k, om))
        fvals.append(val)
    return BoundaryCurve(t, side, tuple(samples), tuple(fvals))


# ---------------------------------------------------------------------------
# following a symmetric orbit in k


def line_trace(theta0: float, p: int, params: MapParams, case: InvolutionCase) -> float:
    J0 = float(j0_from_case(theta0, params, case))
    thetas, _ = lifted_iterates(theta0, J0, params.k_tilde, params.omega, p)
    return monodromy_along(thetas[1:], params).trace


def track_root(
    theta_prev: float,
    p: int,
    j: int,
    params: MapParams,
    case: InvolutionCase,
    cfg: FinderConfig,
    w0: float = 1e-6,
    w_max: float = 0.2,
) -> float | None:
    """The common zero nearest ``theta_prev``, found in a window grown by doubling."""

    def f(x):
        return f_j_scalar(x, p, j, params, case)

    w = w0
    while w < w_max:
        a, b = theta_prev - w, theta_prev + w
        fa = f(a)
        if fa * f(b) < 0:
            return polish_line_root(a, b, p, j, params, case, cfg, f_lo=fa,
                                    match_tol=max(cfg.match_tol, 1e-7))
        w *= 2.0
    return None


@dataclass(frozen=True)
class CrossingPoint:
    k: float
    theta0: float
    trace: float


def follow_to_doubling(
    theta0: float,
    p: int,
    j: int,
    k: float,
    omega: float,
    case: InvolutionCase,
    cfg: FinderConfig | None = None,
    k_step: float = 1e-3,
    max_step: float = 0.02,
    k_limit: float | None = None,
    bisect_iters: int = 60,
) -> CrossingPoint:
    """Continue the stable orbit through ``theta0`` until its trace falls below -2.

    The step is halved whenever the root cannot be followed and grows by half
    otherwise, capped at ``max_step``.  The crossing is then bisected in k,
    keeping the stable side, so the returned trace is just above -2.
    """
    cfg = cfg or FinderConfig()
    case = InvolutionCase(case)
    base = MapParams(k, omega, case)
    if line_trace(theta0, p, base, case) < -2.0:
        raise NumericalError("orbit is already past its period doubling")
    k_limit = k + 50.0 if k_limit is None else k_limit
    while True:
        if k > k_limit:
            raise LostTongueError(f"no period doubling below k={k_limit}")
        k2 = k + k_step
        r = track_root(theta0, p, j, base.replace(k_tilde=k2), case, cfg)
        if r is None or abs(r - theta0) > 2.5 * max(k_step, 1e-3):
            k_step *= 0.5
            if k_step < 1e-13:
                raise LostTongueError(f"cannot continue the period-{p} orbit beyond k={k}")
            continue
        tr = line_trace(r, p, base.replace(k_tilde=k2), case)
        if tr < -2.0:
            break
        k, theta0 = k2, r
        k_step = min(k_step * 1.5, max_step)
    k_lo, th_lo, k_hi = k, theta0, k2
    for _ in range(bisect_iters):
        km = 0.5 * (k_lo + k_hi)
        if km in (k_lo, k_hi):
            break
        rm = track_root(th_lo, p, j, base.replace(k_tilde=km), case, cfg)
        if rm is None:
            raise LostTongueError(f"orbit lost while bisecting near k={km}")
        if line_trace(rm, p, base.replace(k_tilde=km), case) > -2.0:
            k_lo, th_lo = km, rm
        else:
            k_hi = km
    return CrossingPoint(k_lo, th_lo, line_trace(th_lo, p, base.replace(k_tilde=k_lo), case))


# ---------------------------------------------------------------------------
# stability borders


def _first_stable(t, omega, k_start, step, k_limit, cfg):
    k = k_start
    while k <= k_limit:
        params = MapParams(k, omega)
        try:
            orbits = find_involution_orbits(t, params, cfg)
        except DegenerateResidualError:
            orbits = []
        stable = [o for o in orbits if o.stability is Stability.STABLE]
        if stable:
            return k, stable[0]
        k += step
    raise NoStableOrbitError(
        f"no stable period-{t.p} orbit of tongue ({t.p},{t.j}) at Omega={omega} for k <= {k_limit}"
    )


def stability_border_at(
    t: TongueSpec,
    omega: float,
    step: float = 0.05,
    cfg: FinderConfig | None = None,
    border_tol: float = DEFAULT_BORDER_TOL,
    k_limit: float = 20.0,
) -> CrossingPoint:
    """k at which the stable orbit of ``t`` at ``omega`` loses stability by doubling."""
    cfg = cfg or FinderConfig()
    k_edge = TWO_PI * math.sqrt(t.p) * abs(omega - float(t.vertex_omega))
    k0, orbit = _first_stable(t, omega, max(step, 0.5 * k_edge), step, k_limit, cfg)
    c = follow_to_doubling(orbit.points[0].theta, t.p, t.j, k0, omega, orbit.case, cfg,
                           k_step=min(step, 0.02), k_limit=k_limit)
    if abs(c.trace + 2.0) > border_tol:
        raise NumericalError(f"border trace {c.trace!r} misses -2 by more than {border_tol}")
    return c


def coalescence_border_at(
    t: TongueSpec, omega: float, k_hi: float, cfg: FinderConfig | None = None
) -> CrossingPoint:
    """The +2 crossing at ``omega``: the k where stable and unstable orbits merge.

    It is the tongue edge solved in k.  The trace is evaluated at the merged
    root, where it equals 2 up to the square-root sensitivity of the saddle-node,
    so its tolerance is looser than for the -2 crossing.
    """
    cfg = cfg or FinderConfig()
    side = Side.RIGHT if omega > float(t.vertex_omega) else Side.LEFT

    def f(k):
        return edge_function(t, k, omega, side, cfg.grid_points)

    if f(k_hi) >= 0:
        raise NoStableOrbitError(f"Omega={omega} is outside tongue ({t.p},{t.j}) at k={k_hi}")
    k_lo = max(1e-6, 0.5 * TWO_PI * math.sqrt(t.p) * abs(omega - float(t.vertex_omega)))
    while f(k_lo) < 0:
        k_lo *= 0.5
        if k_lo < 1e-12:
            raise NumericalError("could not bracket the coalescence point")
    k = brentq(f, k_lo, k_hi, xtol=1e-15, rtol=1e-15, maxiter=_BISECT_MAX)
    kind = "min" if side is Side.RIGHT else "max"
    best = None
    for c in boundary_cases(t):
        params = MapParams(k, omega, c)
        th, val = global_extremum(t, params, c, kind, cfg.grid_points)
        if best is None or abs(val) < abs(best[1]):
            best = (th, val, c)
    th, _, c = best
    return CrossingPoint(k, th, line_trace(th, t.p, MapParams(k, omega, c), c))


def trace_stability_border(
    t: TongueSpec,
    omega_range: Sequence[float] | tuple[float, float, int],
    step: float = 0.05,
    cfg: FinderConfig | None = None,
    border_tol: float = DEFAULT_BORDER_TOL,
    crossing: str = "minus",
    k_limit: float = 20.0,
) -> BorderCurve:
    """Border samples over a grid of Omega values.

    ``omega_range`` is either an explicit sequence or ``(lo, hi, n)``.
    ``crossing='minus'`` gives the period-doubling border (trace -2);
    ``'plus'`` the coalescence curve (trace +2).
    """
    if not step > 0:
        raise ValidationError(f"step must be > 0, got {step}")
    omegas = _omega_grid(omega_range)
    samples = []
    if crossing == "minus":
        for om in omegas:
            c = stability_border_at(t, om, step, cfg, border_tol, k_limit)
            samples.append((c.k, om, c.trace))
        return BorderCurve(t, tuple(samples), -2.0)
    if crossing == "plus":
        for om in omegas:
            c = coalescence_border_at(t, om, k_limit, cfg)
            samples.append((c.k, om, c.trace))
        return BorderCurve(t, tuple(samples), 2.0)
    raise ValidationError(f"crossing must be 'minus' or 'plus', got {crossing!r}")


def _omega_grid(omega_range) -> list[float]:
    if (isinstance(omega_range, tuple) and len(omega_range) == 3
            and isinstance(omega_range[2], int)):
        lo, hi, n = omega_range
        if n < 1:
            raise ValidationError("Omega grid needs n >= 1")
        return [float(x) for x in np.linspace(lo, hi, n)]
    return [float(x) for x in omega_range]


# ---------------------------------------------------------------------------
# census


def windings_in_reach(p: int, k: float, omega: float) -> range:
    """Momentum windings j for which F_J can vanish: |Omega p - j| <= k p / (2 pi)."""
    half = k * p / TWO_PI
    return range(math.ceil(omega * p - half - 1e-12), math.floor(omega * p + half + 1e-12) + 1)


def _census_cell(cell, k, omega, p_max, cfg):
    out = []
    params = MapParams(k, omega)
    for p in range(1, p_max + 1):
        for j in windings_in_reach(p, k, omega):
            t = TongueSpec(p, j)
            try:
                orbits = find_involution_orbits(t, params, cfg)
            except DegenerateResidualError:
                continue
            if not orbits:
                continue
            out.append(CensusEntry(
                cell=cell, k=k, omega=omega, p=p, j=j,
                n_orbits=len(orbits),
                n_stable=sum(o.stability is Stability.STABLE for o in orbits),
                stabilities=tuple(o.stability.value for o in orbits),
                traces=tuple(o.trace for o in orbits),
            ))
    return out


def census(
    k_range: tuple[float, float],
    omega_range: tuple[float, float],
    p_max: int,
    grid: tuple[int, int] = (4, 4),
    cfg: FinderConfig | None = None,
    threads: int | None = None,
) -> list[CensusEntry]:
    """Orbit inventory at the centres of an ``grid[0] x grid[1]`` lattice of cells.

    Entries come back sorted by (cell, p, j) whatever the thread count.
    """
    if not 1 <= p_max <= 16:
        raise ValidationError(f"p_max must lie in [1, 16], got {p_max}")
    nk, nw = grid
    if nk < 1 or nw < 1:
        raise ValidationError("grid needs at least one cell per axis")
    (k_lo, k_hi), (w_lo, w_hi) = k_range, omega_range
    if k_lo < 0 or k_hi < k_lo or w_hi < w_lo:
        raise ValidationError("invalid census rectangle")
    cfg = cfg or FinderConfig()
    cells = []
    for a in range(nk):
        for b in range(nw):
            k = k_lo + (a + 0.5) * (k_hi - k_lo) / nk
            w = w_lo + (b + 0.5) * (w_hi - w_lo) / nw
            cells.append(((a, b), k, w))
    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        parts = list(pool.map(lambda c: _census_cell(c[0], c[1], c[2], p_max, cfg), cells))
    entries = [e for part in parts for e in part]
    entries.sort(key=lambda e: (e.cell, e.p, e.j))
    return entries
