"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the scipy-based
fallback takes over.  Setting ``LINEPERC_BACKEND=python`` forces the
fallback.  ``BACKEND`` names the active choice.
"""

from __future__ import annotations

import os

from . import _fallback

compiled = None
if os.environ.get("LINEPERC_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else _fallback
BACKEND = "compiled" if compiled is not None else "python"

label_components = _impl.label_components
spans_axis = _impl.spans_axis
origin_reach3 = _impl.origin_reach3
