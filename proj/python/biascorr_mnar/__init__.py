"""Classifiers robust to non-random label missingness.

Thin wrapper around the compiled extension; everything useful lives there.
"""

from ._biascorr import *  # noqa: F401,F403
from ._biascorr import __doc__  # noqa: F401
