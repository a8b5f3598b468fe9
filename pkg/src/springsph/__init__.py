"""Pseudo-spring SPH: mesh-free simulation of dynamic fracture in 2D and 3D.

Particles interact through a cubic B-spline kernel restricted to their
initial immediate neighbourhood. Each initial pair carries a pseudo-spring
whose damage state scales the pair interaction; fully broken springs mark
the crack surface.
"""

__version__ = "0.1.0"

from springsph.kernel import KernelConfig
from springsph.material import Material
from springsph.bonds import BondNetwork, build_network
from springsph.dynamics import SimState

__all__ = [
    "__version__",
    "KernelConfig",
    "Material",
    "BondNetwork",
    "build_network",
    "SimState",
]
