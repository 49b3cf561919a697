"""Morse, spectral and energy indices of explicit free boundary minimal surfaces."""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError, DegenerateFrame, DomainError, EigenFailure, FBIndexError, LabelError,
    NonConstant, NonConvergence, NotApplicable, ScalingError, SpecError,
)
from .surface_zoo import SurfaceSpec, jet2, solve_boundary_parameter  # noqa: E402
from .normal_frame import build_frame, hopf_constant, local_frame, special_section  # noqa: E402
from .steklov import spectral_index, steklov_spectrum  # noqa: E402
from .stability import (  # noqa: E402
    DiscretizationConfig, energy_index, inequality_report, morse_index, quadratic_form_eval,
)
from .claims import ClaimCheck, run_all, run_check  # noqa: E402

__all__ = [
    "ClaimCheck", "ConfigError", "DegenerateFrame", "DiscretizationConfig", "DomainError",
    "EigenFailure", "FBIndexError", "LabelError", "NonConstant", "NonConvergence",
    "NotApplicable", "ScalingError", "SpecError", "SurfaceSpec", "build_frame", "energy_index",
    "hopf_constant", "inequality_report", "jet2", "local_frame", "morse_index",
    "quadratic_form_eval", "run_all", "run_check", "solve_boundary_parameter",
    "special_section", "spectral_index", "steklov_spectrum",
]
