"""Spectral and extrinsic pinching toolkit for hypersurfaces of revolution."""

__version__ = "0.1.0"

from . import geometry, harmonic_poly, pinching, quadrature, spectral  # noqa: E402,F401
