"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
reference implementation is used. WEATHERGAUGE_BACKEND=reference|compiled
forces the choice (compiled raises if the extension is unavailable).
Both backends produce byte-identical rasters.
"""

from __future__ import annotations

import os

_requested = os.environ.get("WEATHERGAUGE_BACKEND", "").strip().lower()
if _requested not in ("", "compiled", "reference"):
    raise ImportError(
        f"WEATHERGAUGE_BACKEND must be 'compiled' or 'reference', got {_requested!r}"
    )

if _requested == "reference":
    from . import reference as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        from . import reference as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND

scale = _impl.scale
blend_const = _impl.blend_const
box_blur = _impl.box_blur
draw_streaks = _impl.draw_streaks
snow_whiten = _impl.snow_whiten
draw_discs = _impl.draw_discs
shade_quads = _impl.shade_quads
radial_flare = _impl.radial_flare

__all__ = [
    "BACKEND",
    "scale",
    "blend_const",
    "box_blur",
    "draw_streaks",
    "snow_whiten",
    "draw_discs",
    "shade_quads",
    "radial_flare",
]
