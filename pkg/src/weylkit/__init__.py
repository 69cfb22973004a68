"""weylkit: numerics for Weyl multipliers and Heisenberg-group multiplier experiments."""

__version__ = "0.1.0"

from . import errors
from .hermite import (
    HermiteContext,
    OperatorMatrix,
    annihilation,
    build_context,
    creation,
    dyadic_projection,
    hermite_operator,
    identity,
    interior_residual,
    projection,
    scaled_operators,
    spectral_function,
)
from .weyl import (
    GridSpec,
    PhaseGridFunction,
    WeylEngine,
    apply_multiplier,
    apply_right_multiplier,
    dilate,
    get_engine,
    inverse_weyl,
    polyradial_project,
    random_band_limited,
    rotate,
    special_hermite_fn,
    taper_window,
    twist_modulate,
    twisted_convolve,
    weyl_point_matrix,
    weyl_transform,
)

__all__ = [
    "errors",
    "HermiteContext",
    "OperatorMatrix",
    "annihilation",
    "build_context",
    "creation",
    "dyadic_projection",
    "hermite_operator",
    "identity",
    "interior_residual",
    "projection",
    "scaled_operators",
    "spectral_function",
    "GridSpec",
    "PhaseGridFunction",
    "WeylEngine",
    "apply_multiplier",
    "apply_right_multiplier",
    "dilate",
    "get_engine",
    "inverse_weyl",
    "polyradial_project",
    "random_band_limited",
    "rotate",
    "special_hermite_fn",
    "taper_window",
    "twist_modulate",
    "twisted_convolve",
    "weyl_point_matrix",
    "weyl_transform",
    "__version__",
]
