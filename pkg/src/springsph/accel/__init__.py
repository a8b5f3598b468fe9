"""Backend selection for the hot per-bond kernels.

Two implementations with identical signatures and semantics:

* ``numba``: serial @njit loops over the bond list (default when numba
  imports cleanly). Serial accumulation in canonical bond order keeps
  results bit-reproducible for any thread count.
* ``numpy``: vectorized bond arrays with bincount scatters, also
  deterministic. Selected with SPRINGSPH_BACKEND=numpy or when numba is
  unavailable.

``springsph bench`` compares the two on the same scenario.
"""

from __future__ import annotations

import os

from springsph.accel import impl_numpy

_BACKENDS = {"numpy": impl_numpy}
_active_name = "numpy"

try:
    from springsph.accel import impl_numba

    _BACKENDS["numba"] = impl_numba
    _default = "numba"
except ImportError:  # pragma: no cover - exercised only without numba
    _default = "numpy"

_env = os.environ.get("SPRINGSPH_BACKEND", "").strip().lower()
if _env:
    if _env not in _BACKENDS:
        raise RuntimeError(
            f"SPRINGSPH_BACKEND={_env!r} not available; choose from {sorted(_BACKENDS)}"
        )
    _active_name = _env
else:
    _active_name = _default


def set_backend(name: str):
    """Switch the active backend; returns the implementation module."""
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_BACKENDS)}")
    _active_name = name
    return _BACKENDS[name]


def active():
    return _BACKENDS[_active_name]


def active_name() -> str:
    return _active_name


def available() -> list[str]:
    return sorted(_BACKENDS)
