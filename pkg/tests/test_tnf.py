"""Terse normal form, elementary futures, and the next-state step."""
import random

import pytest

from safesynth.formula import (
    FALSE,
    VarDecl,
    Vocabulary,
    always,
    dor,
    eventually,
    holds_fin,
    iff,
    implies,
    land,
    lit,
    lor,
    nxt,
    to_nnf,
)
from safesynth.tnf import (
    TnfError,
    clash,
    dnf_expand,
    disjunct_sets,
    elementary,
    step_down,
    tnf,
)

from conftest import bool_vocab, fin_equivalent, traces_upto

p = lit("p")
np_ = lit("p", positive=False)
a = lit("a")
na = lit("a", positive=False)
c = lit("c")
nc = lit("c", positive=False)
s = lit("s")
ns = lit("s", positive=False)

VPS = bool_vocab(["p"], ["s"])
VPC = bool_vocab(["p"], ["c"])
VPAC = bool_vocab(["p"], ["a", "c"])


def lits(move):
    return frozenset(move.literals)


def fut(move):
    return None if move.future is None else set(disjunct_sets(move.future))


# ---------------------------------------------------------------------------
# dnf_expand

def test_expand_unfolds_from_now_eventually_one_step():
    moves = dnf_expand(eventually(0, 2, a), VPAC)
    by_lits = {lits(m): fut(m) for m in moves}
    assert by_lits[frozenset([a])] is None
    assert by_lits[frozenset()] == {frozenset([nxt(1, eventually(0, 1, a))])}


def test_expand_keeps_separated_input():
    moves = dnf_expand(land([a, nxt(1, c)]), VPAC)
    assert len(moves) == 1
    assert lits(moves[0]) == frozenset([a])
    assert fut(moves[0]) == {frozenset([nxt(1, c)])}


def test_expand_of_worked_body_matches_two_move_shape():
    # c & (!p -> G[0,9] c) & (G[0,9] c | F[0,2] !c) splits into the two
    # literal groups {p, c} and {!p, c} once inconsistent branches die
    body = to_nnf(
        land([c, implies(np_, always(0, 9, c)), lor([always(0, 9, c), eventually(0, 2, nc)])])
    )
    groups = {lits(m) for m in dnf_expand(body, VPC)}
    assert groups == {frozenset([p, c]), frozenset([c])}


def test_expand_requires_nnf():
    with pytest.raises(TnfError):
        dnf_expand(implies(a, c), VPAC)


def test_two_group_shape_of_conditional_eventualities():
    # (a -> c) & (X p -> F[1,2] a) & (X !p -> F[1,10] !c) pre-expands into
    # exactly two literal groups, each carrying both conditioned
    # eventualities as unsplit alternatives
    body = to_nnf(
        land(
            [
                implies(a, c),
                implies(nxt(1, p), eventually(1, 2, a)),
                implies(nxt(1, np_), eventually(1, 10, nc)),
            ]
        )
    )
    groups = {}
    for m in dnf_expand(body, VPAC):
        groups.setdefault(lits(m), set()).update(fut(m))
    assert set(groups) == {frozenset([na]), frozenset([c])}
    for alts in groups.values():
        assert frozenset([nxt(1, np_), eventually(1, 10, nc)]) in alts
        assert frozenset([nxt(1, p), eventually(1, 2, a)]) in alts
    # the terse form refines the groups into clashing cubes, same meaning
    t = tnf(body, VPAC)
    assert fin_equivalent(t.formula(), body, VPAC)


# ---------------------------------------------------------------------------
# tnf: worked examples

def test_tnf_biconditional_now_next():
    t = tnf(to_nnf(iff(p, nxt(1, s))), VPS)
    by_lits = {lits(m): fut(m) for m in t.moves}
    assert by_lits == {
        frozenset([p]): {frozenset([nxt(1, s)])},
        frozenset([np_]): {frozenset([nxt(1, ns)])},
    }


def test_tnf_biconditional_next_next_single_move():
    t = tnf(to_nnf(iff(nxt(1, p), nxt(1, s))), VPS)
    assert len(t.moves) == 1
    assert lits(t.moves[0]) == frozenset()
    assert set(disjunct_sets(t.moves[0].future)) == {
        frozenset([nxt(1, p), nxt(1, s)]),
        frozenset([nxt(1, np_), nxt(1, ns)]),
    }


def test_tnf_worked_body_exact_moves():
    body = to_nnf(
        land([c, implies(np_, always(0, 9, c)), lor([always(0, 9, c), eventually(0, 2, nc)])])
    )
    t = tnf(body, VPC)
    by_lits = {lits(m): fut(m) for m in t.moves}
    assert by_lits == {
        frozenset([p, c]): {
            frozenset([nxt(1, always(0, 8, c))]),
            frozenset([nxt(1, eventually(0, 1, nc))]),
        },
        frozenset([np_, c]): {frozenset([nxt(1, always(0, 8, c))])},
    }


def test_tnf_clash_property_structural():
    rng = random.Random(99)
    for _ in range(60):
        f = _random_body(rng)
        t = tnf(f, VPAC)
        for i, m1 in enumerate(t.moves):
            for m2 in t.moves[i + 1 :]:
                assert clash(m1.literals, m2.literals), (m1, m2)


def test_tnf_equivalence_and_exactly_one_move():
    rng = random.Random(7)
    for _ in range(25):
        f = _random_body(rng, max_interval=2)
        t = tnf(f, VPAC)
        g = t.formula()
        assert fin_equivalent(f, g, VPAC)
        for tr in traces_upto(VPAC, 3):
            sat = [m for m in t.moves if holds_fin(tr, m.formula())]
            assert holds_fin(tr, f) == (len(sat) == 1)
            assert len(sat) <= 1


def test_tnf_first_state_commits_to_move_future():
    # a valuation satisfying the whole body and a move's literals must also
    # satisfy that move's strict future
    rng = random.Random(17)
    for _ in range(20):
        f = _random_body(rng, max_interval=2)
        t = tnf(f, VPAC)
        d = min(_depth(f) + 1, 4)
        for tr in traces_upto(VPAC, max(d, 1)):
            if not holds_fin(tr, f):
                continue
            for m in t.moves:
                if m.future is None:
                    continue
                if holds_fin(tr, land(sorted(m.literals, key=lambda l: l.sort_key()))):
                    assert holds_fin(tr, m.future)


def test_tnf_of_contradiction_is_empty():
    t = tnf(land([a, na]), VPAC)
    assert t.is_false()
    assert t.formula() is FALSE


def test_tnf_enum_domains_clash_syntactically():
    vocab = Vocabulary([VarDecl("e", "env"), VarDecl("m", "sys", ("A", "B", "C"))])
    f = lor([lit("m", True, "A"), lit("m", False, "A")])
    t = tnf(f, vocab)
    assert len(t.moves) == 2
    for i, m1 in enumerate(t.moves):
        for m2 in t.moves[i + 1 :]:
            assert clash(m1.literals, m2.literals)


def test_tnf_subsume_flag_drops_absorbed_move():
    f = lor([land([p, nxt(1, s)]), nxt(1, s)])
    assert len(tnf(f, VPS, simplify="subsume").moves) == 1
    both = tnf(f, VPS, simplify="none")
    assert fin_equivalent(both.formula(), nxt(1, s), VPS)


def _depth(f):
    from safesynth.formula import depth

    return depth(f)


def _random_body(rng, max_interval=3):
    pool = [p, np_, a, na, c, nc]

    def go(fuel):
        if fuel <= 0 or rng.random() < 0.35:
            return rng.choice(pool)
        roll = rng.random()
        if roll < 0.2:
            return nxt(rng.randint(1, 2), go(fuel - 1))
        if roll < 0.4:
            lo = rng.randint(0, 1)
            hi = lo + rng.randint(0, max_interval)
            op = always if roll < 0.3 else eventually
            return op(lo, hi, go(fuel - 1))
        if roll < 0.7:
            return land([go(fuel - 1), go(fuel - 1)])
        return lor([go(fuel - 1), go(fuel - 1)])

    return to_nnf(go(3))


# ---------------------------------------------------------------------------
# elementary form

def test_elementary_worked_example():
    f = dor([eventually(1, 2, a), always(1, 3, c)])
    e = elementary(f)
    assert set(disjunct_sets(e)) == {
        frozenset([nxt(1, a)]),
        frozenset([nxt(2, a)]),  # the deferred alternative, one next deeper
        frozenset([nxt(1, c), nxt(1, always(1, 2, c))]),
    }
    assert fin_equivalent(f, e, VPAC)


def test_elementary_fixpoint_on_next_formulas():
    f = nxt(1, a)
    e = elementary(f)
    assert disjunct_sets(e) == (frozenset([f]),)
    assert elementary(e) is e


def test_elementary_point_eventually():
    f = dor([nxt(1, always(2, 9, nc)), eventually(1, 1, a)])
    e = elementary(f)
    assert set(disjunct_sets(e)) == {
        frozenset([nxt(1, always(2, 9, nc))]),
        frozenset([nxt(1, a)]),
    }
    for tr in traces_upto(VPAC, 4):
        assert holds_fin(tr, f) == holds_fin(tr, e)


def test_elementary_rejects_from_now_conjunct():
    with pytest.raises(TnfError):
        elementary(dor([land([a, nxt(1, c)])]))


# ---------------------------------------------------------------------------
# step_down

def test_step_down_worked_example():
    e = elementary(dor([eventually(1, 2, a), always(1, 3, c)]))
    d = step_down(e)
    assert set(disjunct_sets(d)) == {
        frozenset([a]),
        frozenset([nxt(1, a)]),
        frozenset([c, always(1, 2, c)]),
    }


def test_step_down_single_next():
    assert step_down(nxt(1, always(0, 4, c))) is always(0, 4, c)
    assert step_down(nxt(3, c)) is nxt(2, c)


def test_step_down_requires_elementary():
    with pytest.raises(TnfError):
        step_down(dor([eventually(1, 2, a)]))


def test_elementary_step_down_compose_is_one_state_shift():
    rng = random.Random(23)
    futures = [
        dor([eventually(1, 2, a), always(1, 3, c)]),
        dor([land([nxt(1, a), eventually(1, 2, nc)]), nxt(2, c)]),
        always(1, 2, lor([a, c])),
        eventually(2, 3, land([a, c])),
    ]
    for f in futures:
        shifted = step_down(elementary(f))
        for tr in traces_upto(VPAC, 4):
            if len(tr) == 1:
                assert holds_fin(tr, f)
            else:
                assert holds_fin(tr, f) == holds_fin(tr[1:], shifted)
