"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``LEXNET_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

try:
    from . import _kernel
except ImportError:  # extension not built
    _kernel = None

KERNELS = {"python": _fallback.advance}
if _kernel is not None:
    KERNELS["cython"] = _kernel.advance

if _kernel is not None and not os.environ.get("LEXNET_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

advance = KERNELS[BACKEND]


def get_kernel(name=None):
    if name is None:
        return advance
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"kernel {name!r} is not available (have {sorted(KERNELS)})") from None
