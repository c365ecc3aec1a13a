"""Deterministic MiniLang execution with interchangeable backends.

The hot evaluation loop exists twice: a Cython extension
(``_interp_cy``) and a pure-Python twin (``_interp_py``). The compiled
backend is preferred when importable; set MUTRACE_PURE=1 to force the
fallback. Both implement the contract documented in ``runner.ir`` and
must produce identical outcomes, so everything downstream is
backend-agnostic.
"""

import os
import sys

# The pure backend recurses once per interpreted construct; the caps in
# ir.MAX_CALL_DEPTH and the parser keep the true depth far below this.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

from . import _interp_py

_COMPILED = None
if not os.environ.get("MUTRACE_PURE"):
    try:
        from . import _interp_cy as _COMPILED
    except ImportError:
        _COMPILED = None

_SELECTED = _COMPILED if _COMPILED is not None else _interp_py
BACKEND = _SELECTED.BACKEND_NAME


def backend():
    """The evaluator module selected at import time."""
    return _SELECTED


def available_backends():
    out = {"pure": _interp_py}
    try:
        from . import _interp_cy

        out["compiled"] = _interp_cy
    except ImportError:
        pass
    return out


from .harness import (  # noqa: E402
    DEFAULT_STEP_BUDGET,
    FAIL,
    KILLED,
    LIVE,
    NO_COVERAGE,
    OTHER,
    PASS,
    RUN_ERROR_STATUS,
    TIMEOUT,
    ExecOutcome,
    InitialStatus,
    TestCase,
    kill_matrix,
    run_suite,
    run_test,
)
from .ir import MAX_CALL_DEPTH, lower  # noqa: E402

__all__ = [
    "BACKEND",
    "DEFAULT_STEP_BUDGET",
    "MAX_CALL_DEPTH",
    "ExecOutcome",
    "InitialStatus",
    "TestCase",
    "available_backends",
    "backend",
    "kill_matrix",
    "lower",
    "run_suite",
    "run_test",
]
