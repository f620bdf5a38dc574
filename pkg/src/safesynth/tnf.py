"""Terse normal form: separated moves with pairwise-clashing literal sets.

A *move* is a consistent literal set plus an optional strict-future part (a
marked disjunction of conjunctions of from-next formulas).  `tnf` turns any
NNF safety formula into a disjunction of moves in which any two moves
contradict each other on at least one literal, so the moves partition the
valuation space and each move exposes exactly the future obligations that
remain open after taking it.

Also here: the elementary form of a strict future (every conjunct guarded by
`X`) and the one-step `step_down` used by the next-state jump.
"""
from __future__ import annotations

from dataclasses import dataclass

from .formula import (
    FALSE,
    TRUE,
    And,
    Always,
    DOr,
    Eventually,
    Formula,
    Lit,
    Next,
    Or,
    Vocabulary,
    always,
    eventually,
    is_from_next,
    is_nnf,
    land,
    lit,
    lor,
    neg_lit,
    nxt,
    sort_key,
)

ConjSet = frozenset  # frozenset[Formula], one marked-disjunction alternative


class TnfError(Exception):
    pass


@dataclass(frozen=True)
class SeparatedMove:
    """Literal set L plus strict-future part F (None means no obligation)."""

    literals: frozenset
    future: Formula | None

    def formula(self) -> Formula:
        """Surface view; the disjunction marking is engine-internal."""
        parts = sorted(self.literals, key=sort_key)
        if self.future is not None:
            parts.append(unmark(self.future))
        return land(parts)

    def future_disjuncts(self) -> tuple[ConjSet, ...]:
        if self.future is None:
            return (frozenset(),)
        return disjunct_sets(self.future)


@dataclass(frozen=True)
class TnfFormula:
    moves: tuple[SeparatedMove, ...]

    def formula(self) -> Formula:
        return lor([m.formula() for m in self.moves])

    def is_false(self) -> bool:
        return not self.moves


def unmark(f: Formula) -> Formula:
    """Replace marked disjunctions by plain ones (for display and parsing)."""
    if isinstance(f, DOr):
        return lor([unmark(c) for c in f.children])
    if isinstance(f, And):
        return land([unmark(c) for c in f.children])
    if isinstance(f, Or):
        return lor([unmark(c) for c in f.children])
    return f


# ---------------------------------------------------------------------------
# Literal-set utilities

def lits_consistent(lits: frozenset) -> bool:
    for l in lits:
        if neg_lit(l) in lits:
            return False
    eq: dict[str, str] = {}
    for l in lits:
        if l.const is not None and l.positive:
            if eq.setdefault(l.var, l.const) != l.const:
                return False
    return True


def saturate_enum_lits(lits: frozenset, vocab: Vocabulary) -> frozenset | None:
    """Close a literal set under enumerated-domain reasoning.

    `x = c` adds `!(x = d)` for the other constants; excluding all constants
    but one forces the equation.  Returns None when the set is contradictory
    (including a fully excluded domain).  Keeping sets closed this way makes
    the clash test for distinct enum values purely syntactic.
    """
    if not lits_consistent(lits):
        return None
    out = set(lits)
    changed = True
    while changed:
        changed = False
        by_var: dict[str, set] = {}
        for l in out:
            if l.const is not None:
                by_var.setdefault(l.var, set()).add(l)
        for var, ls in by_var.items():
            domain = vocab.by_name[var].domain
            chosen = [l for l in ls if l.positive]
            if chosen:
                c = chosen[0].const
                for d in domain:
                    if d != c:
                        l2 = lit(var, False, d)
                        if l2 not in out:
                            out.add(l2)
                            changed = True
            excluded = {l.const for l in ls if not l.positive}
            remaining = [d for d in domain if d not in excluded]
            if not remaining:
                return None
            if len(remaining) == 1 and not chosen:
                l2 = lit(var, True, remaining[0])
                if l2 not in out:
                    out.add(l2)
                    changed = True
    fs = frozenset(out)
    return fs if lits_consistent(fs) else None


def clash(a: frozenset, b: frozenset) -> bool:
    """Some literal appears positively in one set and negated in the other."""
    return any(neg_lit(l) in b for l in a)


# ---------------------------------------------------------------------------
# Conjunct-set utilities (marked-disjunction alternatives)

def disjunct_sets(f: Formula) -> tuple[ConjSet, ...]:
    """View a strict-future formula as alternatives of conjunct sets."""
    if isinstance(f, DOr):
        return tuple(_conjuncts(c) for c in f.children)
    return (_conjuncts(f),)


def _conjuncts(f: Formula) -> ConjSet:
    if isinstance(f, And):
        return frozenset(f.children)
    return frozenset([f])


def from_disjunct_sets(ds) -> Formula | None:
    """Rebuild a strict-future formula; empty conjunct set means no obligation.

    The result always carries the disjunction marking, even for a single
    alternative: marked futures travel through saturation as one formula, so
    the system never has to commit to an alternative before the environment
    has moved.
    """
    ds = list(ds)
    if any(not d for d in ds):
        return None
    if not ds:
        return _mark([nxt(1, FALSE)])  # dead: holds only when the trace ends now
    seen = set()
    items = []
    for f in sorted((land(sorted(d, key=sort_key)) for d in ds), key=sort_key):
        if f is not FALSE and f not in seen:
            seen.add(f)
            items.append(f)
    if not items:
        return FALSE
    return _mark(items)


def _mark(items: list) -> Formula:
    from .formula import _make  # single-alternative marking is intentional

    return _make(DOr, tuple(items))


def _conj_subsume_insert(conj: set, f: Formula) -> None:
    """Insert into a conjunct set, dropping whatever is implied."""
    from .tableau import subsumes

    for g in list(conj):
        if subsumes(g, f):
            return
        if subsumes(f, g):
            conj.discard(g)
    conj.add(f)


def conj_set_stronger(a: ConjSet, b: ConjSet) -> bool:
    """Every obligation in `b` is implied by something in `a`."""
    from .tableau import subsumes

    return all(any(subsumes(x, y) for x in a) for y in b)


def _conj_set_consistent(conj: ConjSet) -> bool:
    from .tableau import inconsistent

    return not inconsistent(conj)


def dedup_disjuncts(ds: list[ConjSet]) -> list[ConjSet]:
    """Drop inconsistent or stronger-than-another alternatives.

    Every from-next formula is vacuously true on one-state traces, so removing
    an inconsistent alternative from a nonempty disjunction preserves the
    finite-trace semantics.
    """
    key = lambda d: tuple(sorted(sort_key(f) for f in d))
    alive = sorted({d for d in ds if _conj_set_consistent(d)}, key=key)
    out: list[ConjSet] = []
    for i, d in enumerate(alive):
        absorbed = False
        for j, e in enumerate(alive):
            if i == j:
                continue
            if conj_set_stronger(d, e) and not (conj_set_stronger(e, d) and j > i):
                absorbed = True
                break
        if not absorbed:
            out.append(d)
    return out


# ---------------------------------------------------------------------------
# DNF expansion

def dnf_expand(f: Formula, vocab: Vocabulary) -> list[SeparatedMove]:
    """Pre-terse expansion: split into separated disjuncts.

    From-now temporal operators unfold one step so only literals and
    from-next conjuncts remain; the pairwise clash property is not yet
    enforced.
    """
    if not is_nnf(f):
        raise TnfError("input must be in negation normal form")
    moves = []
    for lits, fut in _expand(f, vocab):
        moves.append(SeparatedMove(lits, from_disjunct_sets([fut]) if fut else None))
    return moves


def _expand(f: Formula, vocab: Vocabulary) -> list[tuple[frozenset, ConjSet]]:
    raw = _expand_raw(f, vocab)
    out = []
    seen = set()
    for lits, fut in raw:
        key = (lits, fut)
        if key not in seen:
            seen.add(key)
            out.append((lits, fut))
    return out


def _expand_raw(f: Formula, vocab: Vocabulary) -> list[tuple[frozenset, ConjSet]]:
    if f is TRUE:
        return [(frozenset(), frozenset())]
    if f is FALSE:
        return []
    if isinstance(f, Lit):
        sat = saturate_enum_lits(frozenset([f]), vocab)
        return [] if sat is None else [(sat, frozenset())]
    if is_from_next(f):
        return [(frozenset(), frozenset([f]))]
    if isinstance(f, (Or, DOr)):
        out = []
        for c in f.children:
            out.extend(_expand_raw(c, vocab))
        return out
    if isinstance(f, And):
        combos = [(frozenset(), frozenset())]
        for c in f.children:
            parts = _expand_raw(c, vocab)
            nxt_combos = []
            for lits, fut in combos:
                for l2, f2 in parts:
                    merged = saturate_enum_lits(lits | l2, vocab)
                    if merged is None:
                        continue
                    conj = set(fut)
                    for g in f2:
                        _conj_subsume_insert(conj, g)
                    nxt_combos.append((merged, frozenset(conj)))
            combos = nxt_combos
            if not combos:
                break
        return combos
    if isinstance(f, Always):  # lo == 0 here; from-next handled above
        return _expand_raw(
            land([f.sub, nxt(1, always(0, f.hi - 1, f.sub))]), vocab
        )
    if isinstance(f, Eventually):
        return _expand_raw(
            lor([f.sub, nxt(1, eventually(0, f.hi - 1, f.sub))]), vocab
        )
    if isinstance(f, Next):  # count >= 1: from-next, unreachable
        return [(frozenset(), frozenset([f]))]
    raise TnfError(f"cannot expand {type(f).__name__}")


# ---------------------------------------------------------------------------
# Terse normal form

def tnf(f: Formula, vocab: Vocabulary, simplify: str = "subsume") -> TnfFormula:
    """Terse normal form of an NNF safety formula.

    Returns the empty-move form when every disjunct is contradictory; callers
    treat that as logical falsehood.
    """
    pre = [(lits, set(ds)) for lits, ds in _grouped(f, vocab)]
    if simplify == "subsume":
        pre = _absorb_moves(pre)
    moves = _enforce_clash(pre, vocab)
    if simplify == "subsume":
        moves = _absorb_moves(moves)
    packed = []
    for lits, ds in sorted(
        moves, key=lambda m: tuple(sorted(sort_key(l) for l in m[0]))
    ):
        packed.append(SeparatedMove(frozenset(lits), from_disjunct_sets(ds)))
    return TnfFormula(tuple(packed))


def _grouped(f: Formula, vocab: Vocabulary):
    """Group the raw expansion by literal set, merging futures."""
    by_lits: dict[frozenset, list[ConjSet]] = {}
    order: list[frozenset] = []
    for lits, fut in _expand(f, vocab):
        if lits not in by_lits:
            by_lits[lits] = []
            order.append(lits)
        by_lits[lits].append(fut)
    out = []
    for lits in order:
        ds = dedup_disjuncts(by_lits[lits])
        if not ds and by_lits[lits]:
            # every alternative died; obligation satisfiable only at trace end
            ds = [frozenset([nxt(1, FALSE)])]
        if ds:
            out.append((lits, ds))
    return out


def _future_stronger(a: list[ConjSet], b: list[ConjSet]) -> bool:
    """Disjunction `a` implies disjunction `b` (per-alternative subsumption)."""
    return all(any(conj_set_stronger(d, e) for e in b) for d in a)


def _absorb_moves(pre: list) -> list:
    """Drop a disjunct entailed by another (superset literals, stronger future)."""
    out = []
    for i, (lits, ds) in enumerate(pre):
        absorbed = False
        for j, (l2, ds2) in enumerate(pre):
            if i == j or not l2 <= lits:
                continue
            if l2 == lits and j > i:
                continue
            if _future_stronger(_tl(ds), _tl(ds2)):
                absorbed = True
                break
        if not absorbed:
            out.append((lits, ds))
    return out


def _tl(ds) -> list:
    return list(ds) if not isinstance(ds, list) else ds


def _enforce_clash(pre: list, vocab: Vocabulary) -> list:
    """Pairwise transformation until any two moves clash on a literal.

    Each rewrite replaces two non-clashing disjuncts by disjuncts with
    strictly larger literal sets (the overlap keeps both futures), so the
    process terminates over the finite literal universe.
    """
    work = [(lits, list(ds)) for lits, ds in pre]
    guard = 0
    while True:
        guard += 1
        if guard > 200000:
            raise TnfError("terse-normal-form rewrite did not converge")
        # merge identical literal sets
        merged: dict[frozenset, list[ConjSet]] = {}
        order = []
        for lits, ds in work:
            if lits not in merged:
                merged[lits] = []
                order.append(lits)
            merged[lits].extend(ds)
        work = []
        for lits in order:
            ds = dedup_disjuncts(merged[lits])
            if not ds:
                ds = [frozenset([nxt(1, FALSE)])]
            if frozenset() in ds:
                ds = [frozenset()]  # no remaining obligation
            work.append((lits, ds))
        pair = _find_nonclashing(work)
        if pair is None:
            return work
        i, j = pair
        li, di = work[i]
        lj, dj = work[j]
        rest = [w for k, w in enumerate(work) if k not in (i, j)]
        delta1 = li - lj
        delta2 = lj - li
        both = saturate_enum_lits(li | lj, vocab)
        if both is not None:
            rest.append((both, dedup_disjuncts(di + dj) or [frozenset([nxt(1, FALSE)])]))
        for l in sorted(delta2, key=sort_key):
            split = saturate_enum_lits(li | {neg_lit(l)}, vocab)
            if split is not None:
                rest.append((split, list(di)))
        for l in sorted(delta1, key=sort_key):
            split = saturate_enum_lits(lj | {neg_lit(l)}, vocab)
            if split is not None:
                rest.append((split, list(dj)))
        work = rest


def _find_nonclashing(work: list):
    idx = sorted(range(len(work)), key=lambda k: (len(work[k][0]), k))
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            i, j = idx[a], idx[b]
            if not clash(work[i][0], work[j][0]):
                return (i, j) if i < j else (j, i)
    return None


def tnf_of_conjunction(formulas, body: Formula, vocab: Vocabulary, simplify: str = "subsume") -> TnfFormula:
    """TNF of a node label conjoined with the safety body."""
    return tnf(land(list(formulas) + [body]), vocab, simplify)


# ---------------------------------------------------------------------------
# Elementary form and the next-state step

def elementary(future: Formula) -> Formula:
    """Equivalent strict future whose every conjunct starts with `X`."""
    ds = [set(d) for d in disjunct_sets(future)]
    out: list[ConjSet] = []
    while ds:
        d = ds.pop()
        item = next((g for g in d if not isinstance(g, Next)), None)
        if item is None:
            out.append(frozenset(d))
            continue
        d.discard(item)
        if isinstance(item, Always):
            if item.lo < 1:
                raise TnfError("not a strict-future conjunct")
            d2 = set(d)
            _conj_subsume_insert(d2, nxt(item.lo, item.sub))
            _conj_subsume_insert(d2, nxt(1, always(item.lo, item.hi - 1, item.sub)))
            ds.append(d2)
        elif isinstance(item, Eventually):
            if item.lo < 1:
                raise TnfError("not a strict-future conjunct")
            d2, d3 = set(d), set(d)
            _conj_subsume_insert(d2, nxt(item.lo, item.sub))
            _conj_subsume_insert(d3, nxt(1, eventually(item.lo, item.hi - 1, item.sub)))
            ds.append(d2)
            ds.append(d3)
        elif isinstance(item, And):
            d2 = set(d)
            for c in item.children:
                _conj_subsume_insert(d2, c)
            ds.append(d2)
        elif isinstance(item, (Or, DOr)):
            for c in item.children:
                d2 = set(d)
                _conj_subsume_insert(d2, c)
                ds.append(d2)
        else:
            raise TnfError(f"cannot make {type(item).__name__} elementary")
    result = from_disjunct_sets(dedup_disjuncts(out))
    return TRUE if result is None else result


def step_down(future: Formula) -> Formula:
    """Strip one `X` from every conjunct of an elementary strict future.

    A single remaining alternative loses its marking: past the state jump its
    conjuncts are plain obligations of the new state.
    """
    ds = disjunct_sets(future)
    stripped = []
    for d in ds:
        conj = set()
        for g in d:
            if not isinstance(g, Next):
                raise TnfError("step_down requires an elementary strict future")
            _conj_subsume_insert(conj, nxt(g.count - 1, g.sub))
        stripped.append(frozenset(conj))
    if any(not d for d in stripped):
        return TRUE
    if len(stripped) == 1:
        return land(sorted(stripped[0], key=sort_key))
    result = from_disjunct_sets(stripped)
    return TRUE if result is None else result
