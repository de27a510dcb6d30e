"""LoRaWAN indoor propagation toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import LoraIndoorError, __version__  # noqa: F401
