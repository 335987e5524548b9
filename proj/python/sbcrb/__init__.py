"""Cramer-Rao bounds for semi-blind massive MIMO channel estimation."""

from ._sbcrb import *  # noqa: F401,F403
from ._sbcrb import __doc__  # noqa: F401
