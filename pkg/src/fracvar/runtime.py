"""Process-level runtime knobs."""

from __future__ import annotations

import os
import warnings


def thread_cap() -> int:
    """Parallelism cap from FRACVAR_THREADS; 0 means automatic.

    All operators are pure, so any evaluation order is valid; the current
    implementation evaluates sequentially, which respects every cap.
    """
    raw = os.environ.get("FRACVAR_THREADS", "0")
    try:
        val = int(raw)
    except ValueError:
        val = -1
    if val < 0:
        warnings.warn(f"FRACVAR_THREADS={raw!r} is not a nonnegative integer; "
                      "falling back to automatic", RuntimeWarning)
        return 0
    return val
