"""Controller synthesis and simulation for switched linear MIMO systems via
generalized homogeneity: homogenizing pre-feedback, LMI gain synthesis,
canonical homogeneous norms, dwell-time switching and closed-loop simulation.
"""

from .hnorm import DilationContext, canonical_norm, hnorm_gradient, projector
from .homogenize import HomogenizationResult, solve_homogenization
from .plant import DisturbanceSpec, SwitchedPlant, load_plant, make_plant, sinusoid
from .sim import Trajectory, integrate, settling_time
from .switching import SwitchingPolicy, fixed_sequence, min_dwell, periodic
from .synthesis import (Controller, load_controller, save_controller,
                        synthesize_common, synthesize_multiple)
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "DilationContext", "canonical_norm", "hnorm_gradient", "projector",
    "HomogenizationResult", "solve_homogenization",
    "DisturbanceSpec", "SwitchedPlant", "load_plant", "make_plant", "sinusoid",
    "Trajectory", "integrate", "settling_time",
    "SwitchingPolicy", "fixed_sequence", "min_dwell", "periodic",
    "Controller", "load_controller", "save_controller",
    "synthesize_common", "synthesize_multiple",
    "run_suite", "__version__",
]
