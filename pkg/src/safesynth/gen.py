"""Seeded random specification generator for cross-validation runs."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .formula import (
    Formula,
    VarDecl,
    Vocabulary,
    always,
    eventually,
    iff,
    implies,
    land,
    lit,
    lnot,
    lor,
    nxt,
)
from .parser import SpecFile


@dataclass(frozen=True)
class GenConfig:
    max_env_vars: int = 2
    max_sys_vars: int = 2
    max_interval: int = 4
    max_size: int = 12
    max_depth: int = 4
    enum_prob: float = 0.0  # chance a variable gets a small enumerated domain


def random_spec(rng: random.Random, cfg: GenConfig | None = None) -> SpecFile:
    cfg = cfg or GenConfig()
    n_env = rng.randint(1, cfg.max_env_vars)
    n_sys = rng.randint(1, cfg.max_sys_vars)

    def domain():
        if rng.random() >= cfg.enum_prob:
            return None
        return tuple(f"K{i}" for i in range(rng.randint(2, 3)))

    decls = [VarDecl(f"e{i}", "env", domain()) for i in range(n_env)]
    decls += [VarDecl(f"s{i}", "sys", domain()) for i in range(n_sys)]
    vocab = Vocabulary(decls)
    names = [d.name for d in decls]

    state = {"size": 0}

    def atom() -> Formula:
        state["size"] += 1
        d = vocab.by_name[rng.choice(names)]
        if d.domain is None:
            f = lit(d.name)
        else:
            f = lit(d.name, True, rng.choice(d.domain))
        return lnot(f) if rng.random() < 0.5 else f

    def formula(budget: int, depth_left: int) -> Formula:
        state["size"] += 1
        if budget <= 1 or state["size"] >= cfg.max_size:
            return atom()
        roll = rng.random()
        if roll < 0.22 and depth_left >= 1:
            return nxt(1, formula(budget - 1, depth_left - 1))
        if roll < 0.40 and depth_left >= 1:
            lo = rng.randint(0, 1)
            hi = rng.randint(lo, min(cfg.max_interval, lo + depth_left))
            op = always if roll < 0.31 else eventually
            return op(lo, hi, formula(budget - 1, depth_left - max(hi, 1)))
        if roll < 0.60:
            return land([formula(budget // 2, depth_left), formula(budget // 2, depth_left)])
        if roll < 0.80:
            return lor([formula(budget // 2, depth_left), formula(budget // 2, depth_left)])
        if roll < 0.92:
            return implies(atom(), formula(budget - 2, depth_left))
        return iff(atom(), formula(budget - 2, depth_left))

    safety = formula(cfg.max_size, cfg.max_depth)
    init_roll = rng.random()
    if init_roll < 0.6:
        initial: Formula = land([])
    else:
        initial = atom()
    return SpecFile(vocab, initial, safety)


def spec_text(spec: SpecFile) -> str:
    """Round-trippable source for a generated specification."""
    from .parser import render

    lines = [f"{d.owner} {d.name};" for d in spec.vocabulary.decls]
    lines.append(f"init: {render(spec.initial)};")
    lines.append(f"safety: {render(spec.safety)};")
    return "\n".join(lines) + "\n"
