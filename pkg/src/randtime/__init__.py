"""Evolutions driven by inverse subordinators.

Densities of inverse subordinators, subordinated solutions of transport
problems, their long-time decay and Monte Carlo cross-checks.
"""

from __future__ import annotations

from .catalog import *  # noqa: F401,F403
from .cpp import *  # noqa: F401,F403
from .dynamics import *  # noqa: F401,F403
from .engine import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .inverse import *  # noqa: F401,F403
from .inversion import invert  # noqa: F401
from .observables import *  # noqa: F401,F403
from .special import *  # noqa: F401,F403
from .transport import *  # noqa: F401,F403

__version__ = "0.1.0"
