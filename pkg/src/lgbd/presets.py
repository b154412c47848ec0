"""Reference parameter sets used by examples, tests and repro bundles."""

from .linear_analysis import Diffusivities
from .model import ModelParameters

# Non-spatial study: interior equilibrium at (10, 9.99), delay-destabilizable.
BASELINE = ModelParameters(
    r=1.0,
    K=100.0,
    omega=1.0,
    D=1.01,
    d=0.01,
    c=0.01,
    omega1=0.2,
    D1=10.0,
)

# Pattern study kinetics.  The published parameter list omits the carrying
# capacity; K = 100 is this package's documented choice (see the k-search
# CLI utility for locating other pattern-admitting values).
PATTERN = ModelParameters(
    r=0.11,
    K=100.0,
    omega=1.11,
    D=0.1,
    d=2.31,
    c=2.81,
    omega1=1.32,
    D1=0.09,
)

PATTERN_DIFF = Diffusivities(d1=1.0e-5, d2=1.0e-2)
