"""Locating periodic orbits.

Two methods are provided.  The involution method puts ``points[0]`` on a fixed
line of one of the involutions, which leaves the single unknown ``theta0``; it
then asks for a common zero of

    F_J     = J_p - J_0 - 2 pi j
    F_theta = theta_p - theta_0 - 2 pi s

computed with unreduced coordinates.  Only ``sin(F_theta / 2)`` is used, so the
angle winding ``s`` never has to be guessed.  Orbits with no point on any fixed
line are found by damped Newton iteration on ``M^p(x) - x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConvergenceError,
    DegenerateResidualError,
    OrbitClosureError,
    SingularJacobianError,
    ValidationError,
)
from .mapcore import (
    DEFAULT_MARGINAL_TOL,
    TWO_PI,
    InvolutionCase,
    MapParams,
    OrbitRecord,
    TorusPoint,
    classify_stability,
    fixed_line_momentum,
    lifted_iterates,
    monodromy_along,
    symmetric_points,
    wrap_angle,
    wrap_signed,
)
from .perturbative import TongueSpec

# brentq refuses a relative tolerance below 4 * machine epsilon
_BRENT_RTOL = 1e-15


@dataclass(frozen=True)
class FinderConfig:
    grid_points: int = 4096
    root_tol: float = 1e-12
    match_tol: float = 1e-8
    max_iter: int = 100
    max_grid_points: int = 2**18
    closure_tol: float = 1e-9
    marginal_tol: float = DEFAULT_MARGINAL_TOL

    def __post_init__(self):
        if int(self.grid_points) != self.grid_points or self.grid_points < 64:
            raise ValidationError(f"grid_points must be an integer >= 64, got {self.grid_points!r}")
        if self.max_grid_points < self.grid_points:
            raise ValidationError("max_grid_points must be >= grid_points")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValidationError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        for name in ("root_tol", "match_tol", "closure_tol", "marginal_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive number, got {v!r}")


@dataclass(frozen=True)
class ResidualSample:
    theta0: float
    f_j: float
    sin_half_f_theta: float


# ---------------------------------------------------------------------------
# residuals


def j0_from_case(theta0, params: MapParams, case: InvolutionCase | None = None):
    """Starting momentum on the fixed line selected by ``case`` (default: ``params``)."""
    case = params.involution_case if case is None else case
    return fixed_line_momentum(theta0, params, case)


def _residual_arrays(theta0, p: int, j: int, params: MapParams, case, s: int = 0):
    theta0 = np.asarray(theta0, dtype=float)
    J0 = np.asarray(j0_from_case(theta0, params, case), dtype=float)
    thetas, Js = lifted_iterates(theta0, J0, params.k_tilde, params.omega, p)
    f_j = Js[p] - J0 - TWO_PI * j
    f_th = thetas[p] - theta0 - TWO_PI * s
    return f_j, np.sin(0.5 * f_th)


def residuals(
    theta0: float, t: TongueSpec, params: MapParams, s: int = 0
) -> ResidualSample:
    """Both residuals at ``theta0`` on the line ``params.involution_case``.

    ``s`` only flips the sign of the angle residual, so its zeros do not depend on it.
    """
    f_j, sh = _residual_arrays(theta0, t.p, t.j, params, params.involution_case, s)
    return ResidualSample(float(theta0), float(f_j), float(sh))


def f_j_scalar(theta0: float, p: int, j: int, params: MapParams, case) -> float:
    """F_J at a single angle, in plain floats (cheaper than the array path)."""
    J = float(j0_from_case(theta0, params, case))
    J0 = J
    th = theta0
    k = params.k_tilde
    kick = TWO_PI * params.omega
    for _ in range(p):
        th += J
        J += k * math.sin(th) + kick
    return J - J0 - TWO_PI * j


def sin_half_f_theta(theta0: float, p: int, params: MapParams, case) -> float:
    J = float(j0_from_case(theta0, params, case))
    th = theta0
    k = params.k_tilde
    kick = TWO_PI * params.omega
    for _ in range(p):
        th += J
        J += k * math.sin(th) + kick
    return math.sin(0.5 * (th - theta0))


def _check_degenerate(p: int, j: int, params: MapParams) -> None:
    if params.k_tilde == 0.0 and abs(params.omega * p - j) < 1e-14 * max(1, p):
        raise DegenerateResidualError(
            "F_J vanishes identically at the tongue vertex (k = 0, Omega = j/p)"
        )


# ---------------------------------------------------------------------------
# orbit assembly


def orbit_from_point(
    x: TorusPoint | tuple[float, float],
    p: int,
    params: MapParams,
    case: InvolutionCase | None = None,
    closure_tol: float | None = 1e-9,
    marginal_tol: float = DEFAULT_MARGINAL_TOL,
) -> OrbitRecord:
    """Build the record of the period-``p`` orbit through ``x``.

    Windings are read off the unreduced iterates of the start point taken in
    [0, 2 pi)^2, which is also ``points[0]``; the angle winding depends on that
    choice of lift.  With ``closure_tol`` set, a start point that does not
    return to itself raises ``OrbitClosureError``.  The allowance is scaled by
    the size of the monodromy matrix because a root known to ``root_tol`` in
    theta0 is only known to about ``|T_p| root_tol`` after p steps.
    """
    if p < 1:
        raise ValidationError(f"period must be >= 1, got {p}")
    th0, J0 = (x.theta, x.J) if isinstance(x, TorusPoint) else (float(x[0]), float(x[1]))
    th0, J0 = wrap_angle(th0), wrap_angle(J0)
    thetas, Js = lifted_iterates(th0, J0, params.k_tilde, params.omega, p)
    j = round((Js[p] - J0) / TWO_PI)
    s = round((thetas[p] - th0) / TWO_PI)
    mono = monodromy_along(thetas[1:], params)
    if closure_tol is not None:
        scale = 1.0 + max(abs(mono.a), abs(mono.b), abs(mono.c), abs(mono.d))
        err = max(abs(Js[p] - J0 - TWO_PI * j), abs(thetas[p] - th0 - TWO_PI * s))
        if err > closure_tol * scale:
            raise OrbitClosureError(
                f"period-{p} orbit does not close: lifted mismatch {err:.3e}"
            )
    points = tuple(TorusPoint(a, b) for a, b in zip(thetas[:p], Js[:p]))
    trace = mono.trace
    return OrbitRecord(
        points=points,
        period=p,
        winding_j=int(j),
        winding_s=int(s),
        trace=float(trace),
        stability=classify_stability(trace, marginal_tol),
        case=case,
        symmetric=symmetric_points(points, params),
    )


def is_primitive(orbit: OrbitRecord, tol: float = 1e-7) -> bool:
    """True if no proper divisor of the period already closes the orbit."""
    x0 = orbit.points[0]
    p = orbit.period
    return not any(p % d == 0 and orbit.points[d].distance(x0) < tol for d in range(1, p))


# ---------------------------------------------------------------------------
# involution method


def _sign_changes(f: np.ndarray) -> list[int]:
    """Cell indices i with a root in [x_i, x_{i+1}); exact zeros count once."""
    out = []
    for i in range(len(f) - 1):
        if f[i] == 0.0 or f[i] * f[i + 1] < 0.0:
            out.append(i)
    return out


def _crowded(cells: list[int], n_cells: int, periodic: bool) -> bool:
    if len(cells) < 2:
        return False
    gaps = [b - a for a, b in zip(cells, cells[1:])]
    if periodic:
        gaps.append(cells[0] + n_cells - cells[-1])
    return min(gaps) <= 4


def involution_roots(
    p: int,
    j: int,
    params: MapParams,
    case: InvolutionCase,
    cfg: FinderConfig,
    lo: float = 0.0,
    hi: float = TWO_PI,
    grid_points: int | None = None,
) -> list[float]:
    """Polished common zeros of F_J and sin(F_theta/2) on [lo, hi).

    The grid is doubled while any two sign changes of F_J sit within four cells,
    up to ``cfg.max_grid_points`` cells per 2 pi.
    """
    case = InvolutionCase(case)
    periodic = math.isclose(hi - lo, TWO_PI)
    span_frac = (hi - lo) / TWO_PI
    n = grid_points or max(64, int(math.ceil(cfg.grid_points * span_frac)))
    n_max = max(n, int(math.ceil(cfg.max_grid_points * span_frac)))
    while True:
        grid = np.linspace(lo, hi, n + 1)
        f, _ = _residual_arrays(grid, p, j, params, case)
        cells = _sign_changes(f)
        if not _crowded(cells, n, periodic) or 2 * n > n_max:
            break
        n *= 2

    roots = []
    for i in cells:
        r = polish_line_root(grid[i], grid[i + 1], p, j, params, case, cfg,
                             f_lo=float(f[i]))
        if r is not None:
            roots.append(r)
    return roots


def polish_line_root(
    a: float,
    b: float,
    p: int,
    j: int,
    params: MapParams,
    case: InvolutionCase,
    cfg: FinderConfig,
    f_lo: float | None = None,
    match_tol: float | None = None,
) -> float | None:
    """Common zero of both residuals inside a sign-change bracket [a, b] of F_J.

    Returns None when the F_J root is not an orbit.  Where the -1 eigenvector
    of the monodromy lies along the line, F_J has a flat (cubic) root and its
    zero is poorly located; the angle residual is then transversal, so the
    root is re-polished on it and accepted if F_J still vanishes there.
    """
    match_tol = cfg.match_tol if match_tol is None else match_tol

    def fj(t):
        return f_j_scalar(t, p, j, params, case)

    def fth(t):
        return sin_half_f_theta(t, p, params, case)

    if f_lo == 0.0:
        r = float(a)
    else:
        r = brentq(fj, a, b, xtol=cfg.root_tol, rtol=_BRENT_RTOL,
                   maxiter=max(cfg.max_iter, 200))
    g = fth(r)
    if abs(g) < match_tol:
        return r
    if abs(g) > 1e-3:
        return None
    w = 1e-9
    while w < 1e-3:
        lo, hi = r - w, r + w
        glo, ghi = fth(lo), fth(hi)
        if glo * ghi < 0:
            r2 = brentq(fth, lo, hi, xtol=cfg.root_tol, rtol=_BRENT_RTOL, maxiter=200)
            scale = 1.0 + params.k_tilde * p
            if abs(fj(r2)) < 1e3 * cfg.root_tol * scale:
                return r2
            return None
        w *= 4.0
    return None


def find_involution_orbits(
    t: TongueSpec,
    params: MapParams,
    cfg: FinderConfig | None = None,
    cases: Iterable[InvolutionCase] | None = None,
    window: tuple[float, float] | None = None,
    primitive_only: bool = True,
) -> list[OrbitRecord]:
    """All period-p orbits of tongue ``t`` with a point on an involution line.

    Scans line A for every p and both B lines as well for even p, unless
    ``cases`` says otherwise.  Orbits reached from several lines are reported
    once, under the first line in scan order.  The result is sorted by line and
    then by the angle of ``points[0]``, which is always the involution root.
    """
    cfg = cfg or FinderConfig()
    _check_degenerate(t.p, t.j, params)
    cases = t.cases() if cases is None else tuple(InvolutionCase(c) for c in cases)
    lo, hi = window if window is not None else (0.0, TWO_PI)
    found: list[OrbitRecord] = []
    for case in cases:
        line_params = params.replace(involution_case=case)
        for r in involution_roots(t.p, t.j, line_params, case, cfg, lo, hi):
            J0 = float(j0_from_case(r, line_params, case))
            orbit = orbit_from_point((r, J0), t.p, line_params, case,
                                     cfg.closure_tol, cfg.marginal_tol)
            if orbit.winding_j != t.j:
                continue
            if primitive_only and not is_primitive(orbit):
                continue
            if any(orbit.same_orbit(o) for o in found):
                continue
            found.append(orbit)
    order = {c: i for i, c in enumerate(InvolutionCase)}
    found.sort(key=lambda o: (order[o.case], o.points[0].theta, o.points[0].J))
    return found


# ---------------------------------------------------------------------------
# orbits off the involution lines


def zero_kick_momentum(p: int, j: int, s: int) -> float:
    """Momentum J_0 that closes a period-p orbit with windings (j, s) at k = 0."""
    return (TWO_PI * s - math.pi * j * (p - 1)) / p


def construct_zero_kick_orbit(p: int, j: int, s: int, theta0: float = 0.0) -> OrbitRecord:
    """The k = 0 orbit at Omega = j/p starting at (theta0, J_0).

    Its ``symmetric`` field lists any points lying on an involution line.
    """
    if p < 1:
        raise ValidationError(f"period must be >= 1, got {p}")
    params = MapParams(0.0, j / p)
    return orbit_from_point((theta0, zero_kick_momentum(p, j, s)), p, params,
                            closure_tol=1e-9)


def _lifted_displacement(theta, J0: float, p: int, j: int, params: MapParams):
    _, Js = lifted_iterates(theta, np.full_like(np.asarray(theta, dtype=float), J0),
                            params.k_tilde, params.omega, p)
    return Js[p] - J0 - TWO_PI * j


def zero_kick_seeds(
    p: int, j: int, s: int, params: MapParams, n_samples: int = 720
) -> list[TorusPoint]:
    """Seeds for Newton on the horizontal line J = J_0 of the k = 0 orbit.

    Along that line the momentum displacement of M^p changes sign where the line
    crosses its own p-th image; each crossing is refined with a bracketing solver.
    """
    if n_samples < 8:
        raise ValidationError("n_samples must be >= 8")
    J0 = zero_kick_momentum(p, j, s)
    grid = np.linspace(0.0, TWO_PI, n_samples + 1)
    d = _lifted_displacement(grid, J0, p, j, params)

    def g(t):
        return float(_lifted_displacement(np.array([t]), J0, p, j, params)[0])

    seeds = []
    for i in _sign_changes(d):
        r = float(grid[i]) if d[i] == 0.0 else brentq(g, grid[i], grid[i + 1], xtol=1e-13)
        seeds.append(TorusPoint(r, J0))
    return seeds


def _g_and_jacobian(theta: float, J: float, p: int, params: MapParams):
    thetas, Js = lifted_iterates(theta, J, params.k_tilde, params.omega, p)
    G = np.array([wrap_signed(float(thetas[p] - theta)), wrap_signed(float(Js[p] - J))])
    m = monodromy_along(thetas[1:], params)
    # monodromy rows/cols are (J, theta); Newton works in (theta, J)
    T = np.array([[m.d, m.c], [m.b, m.a]])
    return G, T


def newton_periodic_point(
    seed: TorusPoint, p: int, params: MapParams, cfg: FinderConfig | None = None
) -> tuple[TorusPoint, int]:
    """Damped Newton on G(x) = M^p(x) - x; returns the point and the evaluation count.

    Each step is halved, at most 40 times, until |G| decreases.
    """
    cfg = cfg or FinderConfig()
    th, J = seed.theta, seed.J
    for it in range(1, cfg.max_iter + 1):
        G, T = _g_and_jacobian(th, J, p, params)
        g = float(np.max(np.abs(G)))
        if g < cfg.root_tol:
            return TorusPoint(th, J), it
        A = T - np.eye(2)
        if abs(np.linalg.det(A)) < 1e-12:
            raise SingularJacobianError(
                f"det(T_p - 1) vanishes near ({th:.6g}, {J:.6g}); the orbit is parabolic"
            )
        dx = np.linalg.solve(A, -G)
        lam = 1.0
        for _ in range(40):
            G2, _ = _g_and_jacobian(th + lam * dx[0], J + lam * dx[1], p, params)
            if np.max(np.abs(G2)) < g:
                break
            lam *= 0.5
        th += lam * dx[0]
        J += lam * dx[1]
    raise ConvergenceError(f"Newton did not converge in {cfg.max_iter} iterations")


def find_non_involution_orbit(
    seed: TorusPoint, p: int, params: MapParams, cfg: FinderConfig | None = None
) -> OrbitRecord:
    cfg = cfg or FinderConfig()
    x, _ = newton_periodic_point(seed, p, params, cfg)
    # Newton stops on |G| < root_tol, so closure holds to that order
    tol = max(cfg.closure_tol, 10 * cfg.root_tol)
    return orbit_from_point(x, p, params, None, tol, cfg.marginal_tol)


def distinct_orbits(orbits: Sequence[OrbitRecord], tol: float = 1e-7) -> list[OrbitRecord]:
    out: list[OrbitRecord] = []
    for o in orbits:
        if not any(o.same_orbit(q, tol) for q in out):
            out.append(o)
    return out


def image_orbit(orbit: OrbitRecord, f) -> list[TorusPoint]:
    """Apply a point map ``f`` to every point of ``orbit``."""
    return [f(x) for x in orbit.points]


def involution_pairing(
    a: OrbitRecord, b: OrbitRecord, f, tol: float = 1e-7
) -> tuple[int, ...] | None:
    """Index map i -> m with f(a.points[i]) == b.points[m], or None if f(a) is not b."""
    if a.period != b.period:
        return None
    out = []
    for x in image_orbit(a, f):
        m = b.index_of(x, tol)
        if m is None:
            return None
        out.append(m)
    return tuple(out)
