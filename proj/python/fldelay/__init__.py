"""Delay-optimal resource allocation for federated learning over wireless.

Thin wrapper re-exporting the compiled extension module.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
