"""Zero-dissipation limit of 1-D compressible Navier-Stokes with a rarefaction-contact-rarefaction pattern.

Modules: ``gas`` (ideal gas), ``riemann`` (Euler Riemann solution),
``profiles`` (viscous contact and approximate rarefaction waves),
``solver`` (Lagrangian finite differences), ``harness`` (experiments),
``cli`` (command line).
"""

from .gas import GasParams, State
from .riemann import RiemannPattern, eval_exact, eval_exact_array, solve_pattern
from .profiles import WaveProfileSet, build_profile_set, residuals, superposition_eval
from .solver import Field, Grid1D, SolverConfig, integrate

__all__ = [
    "GasParams", "State", "RiemannPattern", "solve_pattern", "eval_exact", "eval_exact_array",
    "WaveProfileSet", "build_profile_set", "superposition_eval", "residuals",
    "Field", "Grid1D", "SolverConfig", "integrate",
]
__version__ = "0.1.0"
