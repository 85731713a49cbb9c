"""Command-line driver: ``tongue-atlas <command> [flags]``.

Exit status is 0 on success, 2 for invalid input and 3 when a numerical
method fails.  Values come from built-in defaults, then ``--config``, then the
command line, each overriding the one before.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import fields
from typing import Any, Callable

import numpy as np

from .cascade import follow_cascade
from .errors import NumericalError, ValidationError
from .mapcore import TWO_PI, InvolutionCase, MapParams
from .numtheory import WindingRatio, gauss_l, gauss_sum_direct, xi_phase_fraction
from .orbits import find_involution_orbits
from .perturbative import TongueSpec, resonance3_eta, tongue_edges
from .serialization import (
    RunConfig,
    emit,
    load_config_file,
    orbit_to_dict,
    render_csv,
    render_json,
)
from .tracer import Side, census, trace_stability_border, trace_tongue_boundary

# parameter name -> (type, default); a default of None marks a required value
_P = (int, None)
_J = (int, None)
COMMANDS: dict[str, dict[str, tuple[type, Any]]] = {
    "portrait": {"k": (float, None), "omega": (float, None), "n_seeds": (int, 64),
                 "n_iters": (int, 1000)},
    "orbits": {"p": _P, "j": _J, "k": (float, None), "omega": (float, None)},
    "edges": {"p": _P, "j": _J, "k_max": (float, None), "step": (float, 0.0)},
    "boundary": {"p": _P, "j": _J, "k_max": (float, None), "step": (float, 0.05)},
    "border": {"p": _P, "j": _J, "omega": (float, math.nan), "omega_min": (float, math.nan),
               "omega_max": (float, math.nan), "n_omega": (int, 11), "step": (float, 0.05),
               "crossing": (str, "minus"), "k_limit": (float, 20.0)},
    "cascade": {"p": _P, "j": _J, "omega": (float, None), "n_max": (int, 4)},
    "census": {"k_min": (float, None), "k_max": (float, None), "omega_min": (float, None),
               "omega_max": (float, None), "nk": (int, 4), "nomega": (int, 4),
               "p_max": (int, 4)},
    "gauss": {"p_max": (int, 50)},
    "resonance3": {},
}

_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tongue-atlas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, spec in COMMANDS.items():
        sp = sub.add_parser(name)
        for key, (typ, _) in spec.items():
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)
        sp.add_argument("--config", default=None, help="JSON file with default values")
        sp.add_argument("--out", dest="output_path", default=None, help="output file (stdout if absent)")
        sp.add_argument("--format", dest="output_format", choices=("csv", "json"), default=None)
    return parser


def resolve(command: str, ns: argparse.Namespace) -> tuple[dict[str, Any], RunConfig]:
    """Merge defaults, the config file and explicit flags for ``command``."""
    spec = COMMANDS[command]
    file_vals = load_config_file(ns.config) if ns.config else {}
    file_vals = dict(file_vals)
    # the config file may use the flag names for these two
    if "format" in file_vals:
        file_vals["output_format"] = file_vals.pop("format")
    if "out" in file_vals:
        file_vals["output_path"] = file_vals.pop("out")
    allowed = set(spec) | _CONFIG_FIELDS
    stray = set(file_vals) - allowed - {k for c in COMMANDS.values() for k in c}
    if stray:
        raise ValidationError(f"unknown config keys: {sorted(stray)}")

    args: dict[str, Any] = {}
    for key, (typ, default) in spec.items():
        value = getattr(ns, key)
        if value is None:
            value = file_vals.get(key, default)
        if value is None:
            raise ValidationError(f"--{key.replace('_', '-')} is required for '{command}'")
        try:
            args[key] = typ(value)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad value for {key}: {value!r}") from exc

    cfg_vals = {k: v for k, v in file_vals.items() if k in _CONFIG_FIELDS}
    for key in ("output_format", "output_path"):
        if getattr(ns, key) is not None:
            cfg_vals[key] = getattr(ns, key)
    return args, RunConfig.from_dict(cfg_vals)


def _tongue(a) -> TongueSpec:
    return TongueSpec(a["p"], a["j"])


def _params(a) -> MapParams:
    return MapParams(a["k"], a["omega"])


# ---------------------------------------------------------------------------
# commands: each returns (kind, json payload, csv header, csv rows)


def cmd_portrait(a, rc):
    n_seeds, n_iters = a["n_seeds"], a["n_iters"]
    if n_seeds < 1 or n_iters < 0:
        raise ValidationError("portrait needs n_seeds >= 1 and n_iters >= 0")
    params = _params(a)
    m = math.ceil(math.sqrt(n_seeds))
    idx = np.arange(n_seeds)
    theta = TWO_PI * (idx % m + 0.5) / m
    J = TWO_PI * (idx // m + 0.5) / m
    rows = []
    kick = TWO_PI * params.omega
    for it in range(n_iters + 1):
        for s in range(n_seeds):
            rows.append((s, it, float(theta[s]), float(J[s])))
        theta = np.mod(theta + J, TWO_PI)
        J = np.mod(J + params.k_tilde * np.sin(theta) + kick, TWO_PI)
    rows.sort(key=lambda r: (r[0], r[1]))
    payload = {"k": params.k_tilde, "omega": params.omega, "n_seeds": n_seeds,
               "n_iters": n_iters, "rows": [list(r) for r in rows]}
    return "portrait", payload, ("seed_id", "iter", "theta", "J"), rows


def cmd_orbits(a, rc):
    t, params = _tongue(a), _params(a)
    orbits = find_involution_orbits(t, params, rc.finder_config())
    rows = []
    for n, o in enumerate(orbits):
        for i, x in enumerate(o.points):
            rows.append((n, i, x.theta, x.J, o.period, o.winding_j, o.winding_s, o.trace,
                         o.stability.value, o.case.value))
    payload = {"p": t.p, "j": t.j, "k": params.k_tilde, "omega": params.omega,
               "orbits": [orbit_to_dict(o) for o in orbits]}
    header = ("orbit_id", "point_index", "theta", "J", "period", "winding_j", "winding_s",
              "trace", "stability", "case")
    return "orbits", payload, header, rows


def cmd_edges(a, rc):
    t = _tongue(a)
    k_max = a["k_max"]
    if k_max < 0:
        raise ValidationError("k_max must be >= 0")
    step = a["step"] or (k_max / 100 if k_max > 0 else 1.0)
    if step <= 0:
        raise ValidationError("step must be > 0")
    n = int(math.floor(k_max / step + 1e-9))
    rows = []
    for i in range(n + 1):
        k = i * step
        lo, hi = tongue_edges(t, k)
        rows.append((k, lo, hi))
    payload = {"p": t.p, "j": t.j, "edges": [list(r) for r in rows]}
    return "edges", payload, ("k", "omega_minus", "omega_plus"), rows


def cmd_boundary(a, rc):
    t = _tongue(a)
    curves = [trace_tongue_boundary(t, a["k_max"], a["step"], side, rc.boundary_tol,
                                    rc.finder_config())
              for side in (Side.LEFT, Side.RIGHT)]
    rows = [(c.side.value, k, om, f) for c in curves for (k, om), f in zip(c.samples, c.f_ext)]
    payload = {"p": t.p, "j": t.j,
               "curves": [{"side": c.side.value, "samples": [list(s) for s in c.samples],
                           "f_ext": list(c.f_ext)} for c in curves]}
    return "boundary", payload, ("side", "k", "omega", "f_ext"), rows


def cmd_border(a, rc):
    t = _tongue(a)
    if not math.isnan(a["omega"]):
        omegas = [a["omega"]]
    elif math.isnan(a["omega_min"]) or math.isnan(a["omega_max"]):
        raise ValidationError("border needs --omega or both --omega-min and --omega-max")
    else:
        omegas = (a["omega_min"], a["omega_max"], a["n_omega"])
    curve = trace_stability_border(t, omegas, a["step"], rc.finder_config(), rc.border_tol,
                                   a["crossing"], a["k_limit"])
    rows = list(curve.samples)
    payload = {"p": t.p, "j": t.j, "target_trace": curve.target,
               "samples": [list(s) for s in rows]}
    return "border", payload, ("k", "omega", "trace"), rows


def cmd_cascade(a, rc):
    t = _tongue(a)
    r = follow_cascade(t, a["omega"], rc.finder_config(), a["n_max"])
    first_gap = len(r.k_values) - len(r.dtheta_values)
    rows = []
    for n, (k, P, tr) in enumerate(zip(r.k_values, r.periods, r.traces)):
        gap = r.dtheta_values[n - first_gap] if n >= first_gap else math.nan
        rows.append((n, P, k, gap, tr))
    payload = {"p": t.p, "j": t.j, "omega": r.omega, "n_max": r.n_max,
               "k_values": r.k_values, "dtheta_values": r.dtheta_values,
               "periods": r.periods, "traces": r.traces,
               "delta_est": r.delta_est, "alpha_est": r.alpha_est, "k_infinity": r.k_infinity,
               "delta_ratios": r.delta_ratios, "alpha_ratios": r.alpha_ratios}
    return "cascade", payload, ("n", "period", "k", "dtheta", "trace"), rows


def cmd_census(a, rc):
    entries = census((a["k_min"], a["k_max"]), (a["omega_min"], a["omega_max"]), a["p_max"],
                     (a["nk"], a["nomega"]), rc.finder_config())
    rows = [(e.cell[0], e.cell[1], e.k, e.omega, e.p, e.j, e.n_orbits, e.n_stable,
             ";".join(e.stabilities)) for e in entries]
    header = ("cell_k", "cell_omega", "k", "omega", "p", "j", "n_orbits", "n_stable",
              "stabilities")
    return "census", {"entries": entries}, header, rows


def gauss_table(p_max: int) -> list[tuple]:
    """(p, j, case, l, |G|, xi, xi/pi, error) for all coprime 1 <= j <= p <= p_max."""
    if p_max < 1:
        raise ValidationError("p_max must be >= 1")
    rows = []
    for p in range(1, p_max + 1):
        cases = (InvolutionCase.A,) if p % 2 else (InvolutionCase.B_PLUS, InvolutionCase.B_MINUS)
        for j in range(1, p + 1):
            w = WindingRatio(j, p)
            if not w.coprime:
                continue
            for case in cases:
                l = gauss_l(w, case)
                g = gauss_sum_direct(w, l)
                frac = xi_phase_fraction(w, case)
                xi = float(frac) * math.pi
                err = max(abs(abs(g) - math.sqrt(p)),
                          abs(math.remainder(math.atan2(g.imag, g.real) - xi, TWO_PI)))
                rows.append((p, j, case.value, l, abs(g), xi, f"{frac.numerator}/{frac.denominator}", err))
    return rows


def cmd_gauss(a, rc):
    rows = gauss_table(a["p_max"])
    header = ("p", "j", "case", "l", "magnitude", "xi", "xi_over_pi", "direct_error")
    payload = {"p_max": a["p_max"], "rows": [dict(zip(header, r)) for r in rows]}
    return "gauss", payload, header, rows


def cmd_resonance3(a, rc):
    r = resonance3_eta()
    row = (r.eta, r.c_val, r.c_prime, r.a_val, r.a_prime, r.omega_freq)
    header = ("eta", "c_val", "c_prime", "a_val", "a_prime", "omega_freq")
    return "resonance3", {"resonance3": r}, header, [row]


HANDLERS: dict[str, Callable] = {
    "portrait": cmd_portrait,
    "orbits": cmd_orbits,
    "edges": cmd_edges,
    "boundary": cmd_boundary,
    "border": cmd_border,
    "cascade": cmd_cascade,
    "census": cmd_census,
    "gauss": cmd_gauss,
    "resonance3": cmd_resonance3,
}


def run(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        args, rc = resolve(ns.command, ns)
        kind, payload, header, rows = HANDLERS[ns.command](args, rc)
        if rc.output_format == "csv":
            text = render_csv(header, rows)
        else:
            text = render_json(kind, payload)
        emit(text, rc.output_path)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
