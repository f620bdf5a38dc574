"""Engine knobs shared by the solver, the game oracle and the CLI."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EngineConfig:
    max_nodes: int = 100_000
    max_branch: int = 2_000
    max_coverings: int = 64
    max_env_space: int = 65_536
    heuristic: str = "weakest"  # 'weakest' | 'declared'
    prune_siblings: bool = False
    simplify: str = "subsume"  # 'subsume' | 'none'
    oracle_budget: int = 500_000
    horizon: int | None = None  # None: 2 * (depth + 2)
    debug_closure: bool = False  # assert every label stays inside the closure

    def __post_init__(self):
        for name in ("max_nodes", "max_branch", "max_coverings", "max_env_space", "oracle_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.heuristic not in ("weakest", "declared"):
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.simplify not in ("subsume", "none"):
            raise ValueError(f"unknown simplify mode {self.simplify!r}")
