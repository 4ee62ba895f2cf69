"""Kernel dispatch: the compiled extension when importable, else pure Python.

Set ``ASBUCHI_PURE_PYTHON=1`` to force the fallback.
"""
import os

from ._kernels_py import BudgetExceeded

BACKEND = "python"

if os.environ.get("ASBUCHI_PURE_PYTHON", "") in ("", "0"):
    try:
        from ._kernels import chain_win_mask, enumerate_profiles, minimize_dfa
        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import chain_win_mask, enumerate_profiles, minimize_dfa

__all__ = ["BACKEND", "BudgetExceeded", "chain_win_mask", "enumerate_profiles", "minimize_dfa"]
