"""srlab: semiclassical restriction laboratory.

Eigenfunctions of three model geometries (unit disc, round sphere, flat torus),
their Dirichlet and Neumann traces on curves, 2-microlocal window splits of
those traces, and the sweeps that measure how the pieces scale with h.
"""

__version__ = "0.1.0"

from .models import EigenfunctionSpec, FamilySpec, ModelId, disc_eigenfunction, sphere_highest_weight, torus_plane_wave
from .traces import Hypersurface, Trace, disc_circle, restrict, sphere_equator, sphere_meridian, torus_line
from .windows import exterior_mass, window_decompose
from .rellich import RellichReport, energy_balance, rellich_closure_disc
from .experiments import ScalingFit, SweepReport, fit_exponent

__all__ = [
    "__version__",
    "EigenfunctionSpec",
    "FamilySpec",
    "ModelId",
    "disc_eigenfunction",
    "sphere_highest_weight",
    "torus_plane_wave",
    "Hypersurface",
    "Trace",
    "disc_circle",
    "restrict",
    "sphere_equator",
    "sphere_meridian",
    "torus_line",
    "exterior_mass",
    "window_decompose",
    "RellichReport",
    "energy_balance",
    "rellich_closure_disc",
    "ScalingFit",
    "SweepReport",
    "fit_exponent",
]
