"""Certified enclosure of transfer-operator spectra for analytic expanding circle maps.

The package certifies, with floating-point directed rounding, that all
Ruelle-Pollicott resonances of the transfer operator of an analytic expanding
circle map lie inside an explicit finite family of disks, and that the
operator's delta-pseudospectrum avoids the complement.  The chain of custody
runs: ball arithmetic -> certified annulus expansion -> rigorous Fourier
(Galerkin) matrix -> functional-analytic error budget -> certified Schur
factorization -> certified smallest singular values along contours ->
exclosure certificate.
"""

__version__ = "0.1.0"

from .ball import BallMatrix, BallScalar, BallVector  # noqa: F401
from .contour import Disk  # noqa: F401
from .pipeline import (  # noqa: F401
    EnclosureCertificate,
    RunConfig,
    load_config,
    run_certification,
)
