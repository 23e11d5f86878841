"""Stages the CMake-built extension so the package imports from the source tree.

Wheel builds place ``_core`` inside the package automatically; when testing
against a plain CMake build we copy the freshest built extension next to
``__init__.py`` and put ``python/`` first on sys.path.
"""

import shutil
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[2]
PACKAGE = REPO / "python" / "cfntree"


def _stage_extension():
    built = sorted(
        REPO.glob("build*/**/_core*.so"), key=lambda p: p.stat().st_mtime, reverse=True
    )
    if built:
        target = PACKAGE / built[0].name
        if not target.exists() or built[0].stat().st_mtime > target.stat().st_mtime:
            shutil.copy2(built[0], target)


_stage_extension()
sys.path.insert(0, str(REPO / "python"))
