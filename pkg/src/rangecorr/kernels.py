"""Backend selection for the path kernel.

The compiled ``_paths`` extension is used when importable; otherwise, or when
``RANGECORR_PURE_PYTHON`` is set to a non-empty value, the numpy
implementation in ``_paths_py`` is used. Both expose ``simulate_extremes`` with
the same signature and the same random-number layout.
"""

import os

from . import _paths_py

try:
    from . import _paths as _compiled
except ImportError:  # extension not built
    _compiled = None

PROCESS_BM = _paths_py.PROCESS_BM
PROCESS_VG = _paths_py.PROCESS_VG


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"compiled"``, ``"python"`` or None for the default)."""
    if name is None:
        return _paths_py if os.environ.get("RANGECORR_PURE_PYTHON") or _compiled is None else _compiled
    if name == "python":
        return _paths_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel rangecorr._paths is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def backend_name(module=None):
    module = module or get_backend()
    return "compiled" if module is _compiled and _compiled is not None else "python"


def simulate_extremes(base_key, start, n_paths, n_steps, process, rho, drift=0.0, kappa=0.5,
                      workers=1, backend=None):
    return get_backend(backend).simulate_extremes(
        base_key, start, n_paths, n_steps, process, rho, drift, kappa, workers
    )
