"""Witness checking and the explicit safety-game oracle."""
import random

import pytest

from safesynth.config import EngineConfig
from safesynth.formula import Valuation, depth
from safesynth.game import (
    OracleBudgetExceeded,
    is_pre_witness,
    is_witness,
    solve,
    strategy_machine,
)
from safesynth.parser import parse
from safesynth.tableau import Verdict, decide

from conftest import GOLDEN_VERDICTS, load_spec


def v(**kv):
    return Valuation.make(kv)


# ---------------------------------------------------------------------------
# pre-witness / witness

def test_alternating_prefix_is_pre_witness_for_next_biconditional():
    spec = load_spec("next_mirror.sltl")
    tr = (v(e=True, s=True), v(e=False, s=False))
    assert is_pre_witness(tr, spec)


def test_initial_violation_is_not_a_pre_witness():
    spec = load_spec("pressure_cycle.sltl")  # initial formula requires a
    tr = (v(p=False, a=False, c=False),)
    assert not is_pre_witness(tr, spec)


def test_visible_suffix_violation_is_caught():
    spec = parse("env e; sys s; init: true; safety: !s & X s;")
    # second state satisfies the next-obligation of the first but breaks !s
    tr = (v(e=False, s=False), v(e=False, s=True))
    assert not is_pre_witness(tr, spec)
    assert is_pre_witness(tr[:1], spec)


def test_constant_loop_is_a_witness_for_mirroring():
    spec = load_spec("mirror.sltl")
    tr = (v(e=True, s=True),)
    assert is_witness(tr, spec)


def test_witness_needs_a_consistent_lasso():
    spec = parse("env e; sys s; init: true; safety: !s & F[0,2] s;")
    tr = (v(e=False, s=False),)
    # the prefix is fine, but no periodic extension can deliver s while !s holds
    assert is_pre_witness(tr, spec)
    assert not is_witness(tr, spec)


def test_machine_run_yields_witness_on_loop():
    spec = load_spec("pressure_cycle.sltl")
    state = v(p=False, a=True, c=True)
    tr = (state, state)
    assert is_witness(tr, spec)  # lasso at the first state models the spec


# ---------------------------------------------------------------------------
# solve

@pytest.mark.parametrize("name,want", sorted(GOLDEN_VERDICTS.items()))
def test_oracle_verdicts_match_goldens(name, want):
    result = solve(load_spec(name))
    assert result.realizable == (want == "open")


def test_mirroring_strategy_exists():
    result = solve(load_spec("mirror.sltl"))
    assert result.realizable
    # every answer the table picks mirrors the input
    for (state, env), (out, _) in result.strategy.choices.items():
        assert out["s"] == env["e"]


def test_clairvoyance_is_unrealizable():
    assert not solve(load_spec("clairvoyant.sltl")).realizable


def test_oracle_strategy_plays_are_pre_witnesses():
    rng = random.Random(3)
    for name, want in sorted(GOLDEN_VERDICTS.items()):
        if want != "open":
            continue
        spec = load_spec(name)
        result = solve(spec)
        machine = strategy_machine(result.strategy, spec)
        horizon = min(2 * (depth(spec.safety_nnf) + 2), 10)
        envs = spec.vocabulary.env_valuations()
        for _ in range(25):
            state = machine.initial
            trace = []
            for _ in range(rng.randint(1, horizon)):
                env = rng.choice(envs)
                out, state = machine.step(state, env)
                trace.append(env.combine(out))
                assert is_pre_witness(tuple(trace), spec)


def test_oracle_budget_exceeded_raises():
    spec = load_spec("pressure_cycle.sltl")
    with pytest.raises(OracleBudgetExceeded):
        solve(spec, EngineConfig(oracle_budget=5))


def test_oracle_agreement_on_goldens_and_randoms():
    from safesynth.gen import random_spec

    cfg = EngineConfig(max_coverings=100_000)
    for name in GOLDEN_VERDICTS:
        spec = load_spec(name)
        verdict, _ = decide(spec, cfg)
        assert solve(spec, cfg).realizable == (verdict is Verdict.OPEN)
    rng = random.Random(4242)
    for _ in range(60):
        spec = random_spec(rng)
        verdict, _ = decide(spec, cfg)
        assert verdict is not Verdict.UNKNOWN
        assert solve(spec, cfg).realizable == (verdict is Verdict.OPEN)
