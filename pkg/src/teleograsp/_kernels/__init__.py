"""Kernel lane selection.

Two interchangeable implementations of the hot kinematics routines live here:
a compiled extension (_fast) and a pure NumPy fallback (_reference). The
TELEOGRASP_KERNELS environment variable picks the lane at import time:

  * "auto" (default): compiled lane when importable, fallback otherwise.
  * "fast": compiled lane, error if unavailable.
  * "reference": fallback, unconditionally.
"""

import os

from . import _reference

_choice = os.environ.get("TELEOGRASP_KERNELS", "auto").strip().lower()
if _choice not in ("auto", "fast", "reference"):
    raise RuntimeError(
        f"TELEOGRASP_KERNELS must be auto, fast, or reference; got {_choice!r}"
    )

backend_name = "reference"
fk_pose = _reference.fk_pose
jacobian = _reference.jacobian
ik_dls = _reference.ik_dls

if _choice in ("auto", "fast"):
    try:
        from . import _fast
    except ImportError:
        if _choice == "fast":
            raise RuntimeError(
                "TELEOGRASP_KERNELS=fast but the compiled extension is not available"
            ) from None
    else:
        backend_name = "fast"
        fk_pose = _fast.fk_pose
        jacobian = _fast.jacobian
        ik_dls = _fast.ik_dls

__all__ = ["backend_name", "fk_pose", "ik_dls", "jacobian"]
