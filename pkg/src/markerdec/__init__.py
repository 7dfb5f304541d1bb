"""Serially concatenated marker-code transmission over deletion channels.

Outer LDPC or convolutional code, inner marker code, i.i.d. deletion /
substitution channel; detection either by an exact MAP recursion on the
drift lattice or by trained BI-GRU estimators.
"""
from .channel import ChannelParams, transmit, transmit_detailed
from .kernels import BACKEND
from .marker import Interleaver, MarkerConfig, make_interleaver, overall_rate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelParams",
    "Interleaver",
    "MarkerConfig",
    "__version__",
    "make_interleaver",
    "overall_rate",
    "transmit",
    "transmit_detailed",
]
