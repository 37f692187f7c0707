"""Backend selection for the hot kernels.

The compiled extension ``zerofpr._kernels`` is used when it imports; otherwise
the numpy implementations in ``zerofpr._fallback`` are used. Setting the
environment variable ``ZEROFPR_PURE_PYTHON=1`` forces the fallback.
"""

import logging
import os

from . import _fallback

logger = logging.getLogger(__name__)

_NAMES = ("prox_l_half", "hard_threshold", "box_l0_columns", "sphere_columns", "lbfgs_two_loop")


def _load_compiled():
    if os.environ.get("ZEROFPR_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _kernels
    except ImportError as exc:  # extension not built
        logger.debug("compiled kernels unavailable: %s", exc)
        return None
    return _kernels


_compiled = _load_compiled()
BACKEND = "cython" if _compiled is not None else "python"

_impl = _compiled if _compiled is not None else _fallback
prox_l_half = _impl.prox_l_half
hard_threshold = _impl.hard_threshold
box_l0_columns = _impl.box_l0_columns
sphere_columns = _impl.sphere_columns
lbfgs_two_loop = _impl.lbfgs_two_loop


def backends():
    """Return ``{name: module}`` for every kernel backend importable here."""
    out = {"python": _fallback}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _kernels
            out["cython"] = _kernels
        except ImportError:
            pass
    return out
