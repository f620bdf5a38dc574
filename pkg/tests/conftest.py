"""Shared fixtures and independent checking helpers for the test suite."""
from __future__ import annotations

import os

import pytest

from safesynth.formula import (
    VarDecl,
    Vocabulary,
    all_traces,
    holds_fin,
    progress,
    vacuously_true,
)
from safesynth.parser import parse

SPEC_DIR = os.path.join(os.path.dirname(__file__), "specs")

GOLDEN_VERDICTS = {
    "mirror.sltl": "open",
    "clairvoyant.sltl": "closed",
    "next_mirror.sltl": "open",
    "vent_or_hold.sltl": "open",
    "prompted_release.sltl": "open",
    "pressure_cycle.sltl": "open",
    "forced_blackout.sltl": "closed",
    "arbiter.sltl": "open",
}


def load_spec(name: str):
    with open(os.path.join(SPEC_DIR, name), encoding="utf-8") as fh:
        return parse(fh.read())


@pytest.fixture
def spec_dir():
    return SPEC_DIR


def bool_vocab(env_names, sys_names) -> Vocabulary:
    decls = [VarDecl(n, "env") for n in env_names]
    decls += [VarDecl(n, "sys") for n in sys_names]
    return Vocabulary(decls)


def traces(vocab: Vocabulary, length: int):
    return all_traces(vocab.decls, length)


def traces_upto(vocab: Vocabulary, max_length: int):
    for n in range(1, max_length + 1):
        yield from traces(vocab, n)


# ---------------------------------------------------------------------------
# Exact finite-trace comparison by residual product walk.
#
# holds_fin(prefix, f) equals the vacuous value of the obligation left after
# consuming the prefix, so walking all reachable residual pairs compares the
# two formulas on EVERY finite trace, not just short ones.  The residual
# space is finite for this fragment.

def fin_compare(f, g, vocab: Vocabulary, relation: str = "equiv", cap: int = 200_000):
    states = vocab.all_valuations()
    start = (f, g)
    seen = {start}
    frontier = [start]
    steps = 0
    while frontier:
        a, b = frontier.pop()
        for u in states:
            steps += 1
            assert steps <= cap, "residual product did not close"
            ra, rb = progress(a, u), progress(b, u)
            va, vb = vacuously_true(ra), vacuously_true(rb)
            if relation == "equiv" and va != vb:
                return False
            if relation == "implies" and va and not vb:
                return False
            pair = (ra, rb)
            if pair not in seen:
                seen.add(pair)
                frontier.append(pair)
    return True


def fin_equivalent(f, g, vocab: Vocabulary) -> bool:
    return fin_compare(f, g, vocab, "equiv")


def fin_implies(f, g, vocab: Vocabulary) -> bool:
    return fin_compare(f, g, vocab, "implies")


def assert_equiv_on_traces(f, g, vocab: Vocabulary, max_length: int):
    """Brute-force comparison on every trace up to a length bound."""
    for tr in traces_upto(vocab, max_length):
        assert holds_fin(tr, f) == holds_fin(tr, g), (tr, f, g)
