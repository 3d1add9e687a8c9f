"""Piecewise-linear circle homeomorphisms: rotation numbers, conjugacy, scaling.

The package works with degree-one lifts of orientation-preserving PWL
circle maps, in either exact rational or float arithmetic:

- :mod:`pwlrotor.lift` — the :class:`PwlLift` value type and its algebra
  (composition, powers, inversion, canonical form, jump ratios).
- :mod:`pwlrotor.rotation` — Birkhoff rotation-number enclosures, exact
  rational rotation numbers via mediant search with certificates,
  periodic-point scans, and mode-locked interval measurement.
- :mod:`pwlrotor.conjugacy` — the periodic-break-orbit criterion for
  conjugacy to a rigid rotation, the conjugacy itself, invariant
  densities, and growth diagnostics.
- :mod:`pwlrotor.families` — built-in parametrised families and custom
  tabulated ones, with derivative data.
- :mod:`pwlrotor.scaling` — the linear scaling coefficient R1 at a
  conjugacy parameter, quadratic residuals, and pinch measurements.
- :mod:`pwlrotor.cli` — the ``pwl-rotor`` batch command.

Long iterations run on a small compiled kernel when the extension built;
``pwlrotor.kernel.IMPLEMENTATION`` says which one is active, and both
produce bit-identical orbits.
"""

from . import errors
from .backend import (
    FLOAT,
    RATIONAL,
    FloatBackend,
    RationalBackend,
    backend_from_tag,
    infer_backend,
)
from .conjugacy import (
    CancellationCheck,
    Conjugate,
    NotConjugate,
    NotPeriodic,
    OrbitPartition,
    PiecewiseConstantDensity,
    Undecided,
    break_count_growth,
    break_orbit_partition,
    build_conjugacy,
    check_trivial_cancellations,
    derivative_growth,
    invariant_density,
    is_conjugate_to_rigid,
    verify_invariance,
)
from .families import (
    FamilySpec,
    MarginReport,
    TwoParamFamilySpec,
    coelho,
    coelho_rho,
    custom_family,
    family_from_json,
    gmm_critical_beta,
    herman,
    herman_offset,
    herman_offset_family,
    herman_shifted,
    instantiate,
    monotonicity_margin,
    refraction,
    refraction_slice_alpha,
)
from .kernel import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .lift import (
    PwlLift,
    canonicalize,
    compose,
    frac,
    invert,
    jump,
    jump_product,
    lift_from_json,
    make_lift,
    power,
    rigid,
    sup_difference,
)
from .rotation import (
    ModeLockInterval,
    PeriodicPoint,
    PeriodicScan,
    RotationResult,
    birkhoff_enclosure,
    exact_rotation,
    mode_lock_interval,
    periodic_points,
)
from .scaling import (
    PinchReport,
    ResidualReport,
    ScalingReport,
    kappa,
    laminar_coeffs,
    orbit_landmarks,
    pinch_boundaries,
    r1,
    scaling_residual,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "FLOAT",
    "RATIONAL",
    "FloatBackend",
    "RationalBackend",
    "backend_from_tag",
    "infer_backend",
    "KERNEL_IMPLEMENTATION",
    "PwlLift",
    "make_lift",
    "lift_from_json",
    "rigid",
    "frac",
    "compose",
    "power",
    "invert",
    "canonicalize",
    "jump",
    "jump_product",
    "sup_difference",
    "RotationResult",
    "birkhoff_enclosure",
    "exact_rotation",
    "PeriodicPoint",
    "PeriodicScan",
    "periodic_points",
    "ModeLockInterval",
    "mode_lock_interval",
    "OrbitPartition",
    "NotPeriodic",
    "Conjugate",
    "NotConjugate",
    "Undecided",
    "CancellationCheck",
    "break_orbit_partition",
    "is_conjugate_to_rigid",
    "check_trivial_cancellations",
    "build_conjugacy",
    "PiecewiseConstantDensity",
    "invariant_density",
    "verify_invariance",
    "break_count_growth",
    "derivative_growth",
    "FamilySpec",
    "TwoParamFamilySpec",
    "MarginReport",
    "herman",
    "herman_shifted",
    "coelho",
    "coelho_rho",
    "refraction",
    "gmm_critical_beta",
    "refraction_slice_alpha",
    "herman_offset",
    "herman_offset_family",
    "custom_family",
    "family_from_json",
    "instantiate",
    "monotonicity_margin",
    "ScalingReport",
    "ResidualReport",
    "PinchReport",
    "orbit_landmarks",
    "laminar_coeffs",
    "kappa",
    "r1",
    "scaling_residual",
    "pinch_boundaries",
    "__version__",
]
