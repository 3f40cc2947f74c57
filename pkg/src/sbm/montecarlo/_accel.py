"""Backend selection: numba when available unless SBM_NUMBA=0."""

from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def numba_enabled():
    return HAVE_NUMBA and os.environ.get("SBM_NUMBA", "1") != "0"


def backend_name():
    return "numba" if numba_enabled() else "numpy"
