"""Quadrature backend selection.

The compiled engine is preferred; the pure-numpy twin is used when the
extension is unavailable or when STABLEKERN_PURE_PYTHON is set to a truthy
value.  Both expose the same four functions with identical semantics.
"""

import os

from . import _pykern

if os.environ.get("STABLEKERN_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pykern
else:
    try:
        from . import _ckern as _impl
    except ImportError:
        _impl = _pykern

backend_name = _impl.BACKEND_NAME
osc_transform = _impl.osc_transform
diff_transform = _impl.diff_transform
osc_transform_many = _impl.osc_transform_many
diff_transform_many = _impl.diff_transform_many


def get_backend(name=None):
    """Return the backend module by name ('cython'/'python'), or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykern
    if name == "cython":
        from . import _ckern

        return _ckern
    raise ValueError(f"unknown backend {name!r}")
