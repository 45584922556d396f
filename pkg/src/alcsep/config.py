"""Search and enumeration budgets.

Every exponential search in the package is capped.  Hitting a cap raises
`BudgetError` with the offending counts; it is never treated as an answer.
Environment variables mirror the CLI flags so batch runs can override them
without editing invocations.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

_ENV_PREFIX = "ALCSEP_"


@dataclass(frozen=True)
class Budgets:
    mosaic_cap: int = 1 << 16     # max mosaics materialized in a universe
    cand_cap: int = 1 << 14       # max witness candidates per requirement
    node_cap: int = 1 << 16       # node budget for partition search (counting dialect)
    sat_cand_cap: int = 1 << 18   # max saturated-assignment space per satisfiability call
    sat_call_cap: int = 1 << 22   # max satisfiability fixpoints per process

    def override_from_env(self) -> "Budgets":
        values = {}
        for field in ("mosaic_cap", "cand_cap", "node_cap", "sat_cand_cap", "sat_call_cap"):
            raw = os.environ.get(_ENV_PREFIX + field.upper())
            if raw is not None:
                values[field] = int(raw)
        if not values:
            return self
        return Budgets(**{**self.__dict__, **values})


DEFAULT_BUDGETS = Budgets()
