"""Sparse mean-CVaR portfolio selection.

Thin re-export of the compiled ``_core`` extension.
"""

from ._core import *  # noqa: F401,F403
from ._core import RNG_NAME, __doc__  # noqa: F401

__version__ = "0.1.0"
