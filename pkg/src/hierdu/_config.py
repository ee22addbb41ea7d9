"""Runtime knobs: memory budget, tolerances and kernel backend selection."""

from __future__ import annotations

import os
import re

BUDGET_ENV = "HIERDU_MEMORY_BUDGET"
BACKEND_ENV = "HIERDU_BACKEND"

DEFAULT_BUDGET = 2 * 1024**3
TOL_UNIT = 1e-10
SCHMIDT_CUTOFF = 1e-8

_UNITS = {"": 1, "k": 1024, "kib": 1024, "m": 1024**2, "mib": 1024**2,
          "g": 1024**3, "gib": 1024**3, "kb": 1000, "mb": 1000**2, "gb": 1000**3}


class BudgetError(MemoryError):
    """Raised when a dense intermediate would exceed the memory budget."""


def parse_size(text: str) -> int:
    m = re.fullmatch(r"\s*([0-9.]+)\s*([a-zA-Z]*)\s*", text)
    if m is None or m.group(2).lower() not in _UNITS:
        raise ValueError(f"cannot parse memory size {text!r}")
    return int(float(m.group(1)) * _UNITS[m.group(2).lower()])


def memory_budget() -> int:
    """Budget in bytes; the environment variable overrides the 2 GiB default."""
    raw = os.environ.get(BUDGET_ENV)
    return DEFAULT_BUDGET if not raw else parse_size(raw)


def check_budget(entries: int | float, what: str, itemsize: int = 16) -> None:
    need = float(entries) * itemsize
    budget = memory_budget()
    if need > budget:
        raise BudgetError(
            f"{what} needs {need / 1024**2:.1f} MiB, budget is {budget / 1024**2:.1f} MiB "
            f"(set {BUDGET_ENV} to raise it)")


def backend() -> str:
    """'numba' unless the environment asks for the pure numpy path or numba is missing."""
    choice = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba":
        try:
            import numba  # noqa: F401
        except ImportError:
            return "numpy"
    return choice
