"""Select the E-step kernel at import: compiled if built, numpy otherwise.

Set MTADAPT_PURE_PYTHON=1 to force the numpy fallback (used by the benchmark
and by tests that check kernel agreement).
"""

import os

from . import _em_py

if os.environ.get("MTADAPT_PURE_PYTHON") == "1":
    em_sweep = _em_py.em_sweep
    KERNEL_NAME = "numpy"
else:
    try:
        from . import _em_cy
        em_sweep = _em_cy.em_sweep
        KERNEL_NAME = "cython"
    except ImportError:
        em_sweep = _em_py.em_sweep
        KERNEL_NAME = "numpy"


def available_kernels() -> dict:
    """Every kernel importable in this environment, by name."""
    kernels = {"numpy": _em_py.em_sweep}
    try:
        from . import _em_cy
        kernels["cython"] = _em_cy.em_sweep
    except ImportError:
        pass
    return kernels
