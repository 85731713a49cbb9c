"""Thread-count resolution shared by the census and the CLI."""

from __future__ import annotations

import os

from .errors import ValidationError

THREADS_ENV = "TONGUE_ATLAS_THREADS"


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: an explicit request wins, then the environment, then the CPU count.

    Zero means "pick automatically" in both places.
    """
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError as exc:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if requested < 0:
        raise ValidationError(f"thread count must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested
