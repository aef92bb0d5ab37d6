"""Kernel backend selection.

The compiled Cython kernel is preferred; the pure-Python twin is used when
the extension is unavailable or when ``NLSCOUPLE_PURE_PYTHON=1`` is set.
Both expose the same ``integrate_profile`` contract.
"""

import os

from . import shoot_py

if os.environ.get("NLSCOUPLE_PURE_PYTHON") == "1":
    _impl = shoot_py
    BACKEND = "python"
else:
    try:
        from . import shoot_cy as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = shoot_py
        BACKEND = "python"

integrate_profile = _impl.integrate_profile

FLAG_RAN_OUT = shoot_py.FLAG_RAN_OUT
FLAG_CROSSED_ZERO = shoot_py.FLAG_CROSSED_ZERO
FLAG_TURNED_UP = shoot_py.FLAG_TURNED_UP
