"""Select the stepping kernel at import time.

The compiled extension is used when it was built; set ``PME_FOCUS_PURE=1`` to
force the numpy implementation.
"""

import os

if os.environ.get("PME_FOCUS_PURE", "") not in ("", "0"):
    from . import _kernel_py as kernel
    BACKEND = "python"
else:
    try:
        from . import _kernel as kernel
        BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _kernel_py as kernel
        BACKEND = "python"

__all__ = ["kernel", "BACKEND"]
