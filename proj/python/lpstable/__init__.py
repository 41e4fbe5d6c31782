"""Linear processes with innovations in the domain of attraction of a stable law."""

from ._core import *  # noqa: F401,F403

__version__ = "0.1.0"
