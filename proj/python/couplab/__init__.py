"""Coupling experiments for suprema of empirical, bootstrap and Gaussian processes."""

from ._couplab import *  # noqa: F401,F403
from ._couplab import __version__  # noqa: F401
