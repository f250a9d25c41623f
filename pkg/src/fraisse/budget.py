from __future__ import annotations

import time

from .errors import BudgetExceeded


class Budget:
    """Node and wall-clock allowance shared by a search."""

    def __init__(self, nodes: int | None = None, seconds: float | None = None):
        self.limit = nodes
        self.deadline = None if seconds is None else time.monotonic() + seconds
        self.nodes = 0

    def tick(self, k: int = 1):
        self.nodes += k
        if self.limit is not None and self.nodes > self.limit:
            raise BudgetExceeded(f"node budget of {self.limit} exhausted", partial=self.nodes)
        if self.deadline is not None and (self.nodes & 255) == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded("time budget exhausted", partial=self.nodes)



def ensure(budget: Budget | None) -> Budget:
    return budget if budget is not None else Budget()
