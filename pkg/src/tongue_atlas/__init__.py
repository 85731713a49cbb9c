"""Periodic orbits and Arnold tongues of the kicked accelerator map."""

from .cascade import CascadeReport, estimate_scaling, follow_cascade, universality_check
from .errors import (
    CascadeLostError,
    NumericalError,
    OutsideTongueError,
    TongueAtlasError,
    ValidationError,
)
from .mapcore import (
    InvolutionCase,
    Jacobian2x2,
    MapParams,
    OrbitRecord,
    Stability,
    TorusPoint,
    classify_stability,
    involution_A,
    involution_B,
    monodromy,
    reversor,
    step,
    step_inverse,
    tangent,
)
from .numtheory import (
    GaussSumResult,
    WindingRatio,
    gauss_sum_direct,
    jacobi,
    legendre,
    mod_inverse,
    totient,
    weighted_gauss_sum_direct,
    xi_phase,
)
from .orbits import (
    FinderConfig,
    ResidualSample,
    construct_zero_kick_orbit,
    find_involution_orbits,
    find_non_involution_orbit,
    involution_pairing,
    j0_from_case,
    residuals,
    zero_kick_seeds,
)
from .perturbative import (
    PerturbativeOrbit,
    Resonance3Params,
    TongueSpec,
    coalescence_gap,
    p1_boundary,
    p1_stability_border,
    perturbative_trace,
    resonance3_eta,
    solve_vartheta,
    tongue_edges,
    winding_s,
)
from .tracer import (
    BorderCurve,
    BoundaryCurve,
    Side,
    census,
    extremum_of_residual,
    trace_stability_border,
    trace_tongue_boundary,
)

__version__ = "0.1.0"
