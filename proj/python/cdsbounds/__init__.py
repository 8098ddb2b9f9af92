"""No-arbitrage and good-deal bounds for illiquid CDS positions."""

from ._cdsbounds import *  # noqa: F401,F403
from ._cdsbounds import __doc__  # noqa: F401
