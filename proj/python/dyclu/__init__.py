"""Python access to the dyclu C++ core."""

from ._core import *  # noqa: F401,F403
from ._core import DycluError, __doc__  # noqa: F401
