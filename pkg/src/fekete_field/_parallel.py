"""Worker-count policy shared by the parallel loops."""
from __future__ import annotations

import os

ENV_THREADS = "FEKETE_FIELD_THREADS"


def worker_count() -> int:
    """Threads to use: ``$FEKETE_FIELD_THREADS`` if set, else the CPU count."""
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1
