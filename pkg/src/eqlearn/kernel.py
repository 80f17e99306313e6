"""Backend selection: compiled trajectory kernel with pure-Python fallback.

Set EQLEARN_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the backend-parity tests).
"""

import os

if os.environ.get("EQLEARN_PURE_PYTHON") == "1":
    from . import _kernel_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernel_py as _impl

        BACKEND = "python"

MODE_PD = _impl.MODE_PD
MODE_PI = _impl.MODE_PI
MODE_FROZEN = _impl.MODE_FROZEN
KernelSolverError = _impl.KernelSolverError
simulate_trajectory = _impl.simulate_trajectory

from . import _kernel_py as pure_python  # noqa: E402  (explicit access for benchmarks)
