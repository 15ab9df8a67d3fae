"""Blind new-user detection for DS/CDMA over doubly-dispersive fading channels.

Simulator (waveform, codebook, channel, scenario), detector family (blind
determinant-ratio statistic with direct and fast LQ paths, CFAR variants,
genie benchmark), and a seeded Monte Carlo harness for threshold calibration
and detection-probability sweeps.
"""

from .core import (DegenerateCodeError, DegenerateDataError, NumericalDomainError,
                   ParameterError, SystemParams)

__all__ = [
    "SystemParams",
    "ParameterError",
    "NumericalDomainError",
    "DegenerateCodeError",
    "DegenerateDataError",
]

__version__ = "0.1.0"
