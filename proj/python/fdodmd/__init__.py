"""Ground-state energy estimation from noisy observable trajectories."""

from ._fdodmd import *  # noqa: F401,F403
from ._fdodmd import __doc__  # noqa: F401
