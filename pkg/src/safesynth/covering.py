"""Environment coverings: which move sets leave the environment no escape.

Each move of a terse-normal-form disjunction constrains the environment
variables to a cell of valuations; a covering is a move set whose cells
exhaust every environment valuation, and a minimal covering (no removable
move) encodes one system strategy step.
"""
from __future__ import annotations

from typing import Iterable, Iterator

from .formula import Lit, Valuation, VarDecl, Vocabulary
from .tnf import SeparatedMove, TnfFormula


class CoveringLimitExceeded(Exception):
    def __init__(self, limit: int):
        super().__init__(f"more than {limit} minimal coverings")
        self.limit = limit


class EnvSpaceExceeded(Exception):
    def __init__(self, size: int, limit: int):
        super().__init__(f"environment valuation space {size} exceeds limit {limit}")
        self.size = size
        self.limit = limit


def val_of(lits: Iterable[Lit], decls: tuple[VarDecl, ...], vocab: Vocabulary) -> list[Valuation]:
    """Valuations over `decls` agreeing with every literal on those variables.

    Variables not mentioned range freely; literals over other variables are
    ignored.
    """
    names = {d.name for d in decls}
    relevant = [l for l in lits if l.var in names]
    out = []
    for v in vocab.valuations(decls):
        if all(_sat(v, l) for l in relevant):
            out.append(v)
    return out


def _sat(v: Valuation, l: Lit) -> bool:
    val = v[l.var]
    sat = bool(val) if l.const is None else val == l.const
    return sat if l.positive else not sat


def env_cell(move: SeparatedMove, vocab: Vocabulary) -> frozenset:
    return frozenset(val_of(move.literals, vocab.env_vars, vocab))


def guard_env_space(vocab: Vocabulary, limit: int) -> None:
    size = vocab.env_space_size()
    if size > limit:
        raise EnvSpaceExceeded(size, limit)


def is_x_covering(t: TnfFormula, vocab: Vocabulary) -> bool:
    space = set(vocab.env_valuations())
    covered: set = set()
    for m in t.moves:
        covered |= env_cell(m, vocab)
    return covered == space


def iter_minimal_x_coverings(
    t: TnfFormula,
    vocab: Vocabulary,
    move_order: list[int] | None = None,
) -> Iterator[frozenset]:
    """All minimal coverings as index sets, without duplicates.

    Branches on the first uncovered environment valuation; every move whose
    cell contains it spawns a branch (candidates tried in `move_order`).
    Covers that end up redundant are filtered, so each yielded set is minimal;
    every minimal cover is reachable because at each branch point it contains
    some candidate for the uncovered valuation.
    """
    space = vocab.env_valuations()
    cells = [env_cell(m, vocab) for m in t.moves]
    order = move_order if move_order is not None else list(range(len(t.moves)))
    seen: set[frozenset] = set()

    def recurse(chosen: tuple, covered: frozenset):
        missing = next((v for v in space if v not in covered), None)
        if missing is None:
            cover = frozenset(chosen)
            if cover in seen:
                return
            if _irredundant(cover, cells, space):
                seen.add(cover)
                yield cover
            return
        for i in order:
            if i in chosen or missing not in cells[i]:
                continue
            yield from recurse(chosen + (i,), covered | cells[i])

    if all(any(v in c for c in cells) for v in space):
        yield from recurse((), frozenset())


def _irredundant(cover: frozenset, cells: list, space: list) -> bool:
    for i in cover:
        rest: set = set()
        for j in cover:
            if j != i:
                rest |= cells[j]
        if all(v in rest for v in space):
            return False
    return True


def minimal_x_coverings(
    t: TnfFormula, vocab: Vocabulary, limit: int = 64
) -> list[frozenset]:
    """Exhaustive list of minimal coverings, deterministic order.

    Aborts (rather than truncating) past `limit`: downstream reasoning over
    the disjunction of coverings is only sound when the list is complete.
    """
    out = []
    for cover in iter_minimal_x_coverings(t, vocab):
        out.append(cover)
        if len(out) > limit:
            raise CoveringLimitExceeded(limit)
    return sorted(out, key=lambda c: (len(c), sorted(c)))
