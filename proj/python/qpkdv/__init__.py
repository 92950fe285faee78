"""Quasi-periodic KdV toolkit (Python bindings)."""

import json

from ._core import *  # noqa: F401,F403
from ._core import bilinear_probe as _bilinear_probe


def bilinear_probe(*args, **kwargs):
    """Run a bilinear probe and return its summary as a dict."""
    return json.loads(_bilinear_probe(*args, **kwargs))
