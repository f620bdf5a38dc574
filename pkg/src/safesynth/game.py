"""Explicit-state safety game for cross-validating the tableau engine.

Conceptually the game state is the last `depth(safety)+1` moves plus a
latched violation flag: every violation of the safety body becomes visible
within its depth, so that window is a sufficient statistic.  The solver
works on an exact quotient of the windows, the set of obligations still
pending after the moves seen so far (one-state residuation of the safety
body from every past position); two windows with equal residuals admit the
same futures, and the residual space stays linear in the interval bounds
where raw windows blow up exponentially.  The environment proposes an input
valuation, the system answers; the environment wins by reaching a state
where some input admits no non-violating answer.

Only the shared finite-trace semantics (`holds_fin` / `progress`) is used
here; nothing from the tableau machinery.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import EngineConfig
from .formula import (
    FALSE,
    TRUE,
    Always,
    And,
    Eventually,
    Formula,
    Next,
    Trace,
    Valuation,
    depth,
    holds_fin,
    progress,
)
from .parser import SpecFile


def _interval_view(f: Formula):
    """Leading next-chain folded into interval offsets, or None."""
    k = 0
    if isinstance(f, Next):
        k, f = f.count, f.sub
    if isinstance(f, Always):
        return "G", f.sub, k + f.lo, k + f.hi
    if isinstance(f, Eventually):
        return "F", f.sub, k + f.lo, k + f.hi
    return "X", f, k, k


def _entails(a: Formula, b: Formula) -> bool:
    """Interval-shape implication, sound for the finite-trace semantics.

    A box obligation implies every point/box inside its interval and any
    diamond it intersects; tighter diamonds imply looser ones.  Used only to
    drop redundant pending obligations, so incompleteness merely costs
    states.
    """
    if a is b:
        return True
    ca, sa, la, ha = _interval_view(a)
    cb, sb, lb, hb = _interval_view(b)
    if sa is not sb:
        return False
    if ca == "G":
        if cb == "G" or cb == "X":
            return la <= lb and hb <= ha
        return la <= hb and lb <= ha  # intervals intersect
    if ca == "X":
        return (cb == "X" and la == lb) or (cb == "F" and lb <= la <= hb)
    if ca == "F":
        return cb == "F" and lb <= la and ha <= hb
    return False


def _reduce_residuals(residual: set) -> tuple:
    """Canonical pending-obligation state with implied members dropped."""
    kept: list = []
    for f in sorted(residual, key=lambda g: g.sort_key()):
        if any(_entails(g, f) for g in kept):
            continue
        kept = [g for g in kept if not _entails(f, g)]
        kept.append(f)
    return tuple(sorted(kept, key=lambda g: g.sort_key()))


class OracleBudgetExceeded(Exception):
    def __init__(self, limit: int):
        super().__init__(f"oracle state budget {limit} exhausted")
        self.limit = limit


# ---------------------------------------------------------------------------
# Witness checking

def is_pre_witness(trace: Trace, spec: SpecFile) -> bool:
    """No violation is visible in the trace.

    The first state satisfies the initial constraint and every suffix
    satisfies the safety body under the finite-trace semantics (obligations
    past the end stay open rather than failing).
    """
    if not trace:
        return False
    if not holds_fin(trace, spec.initial_nnf):
        return False
    body = spec.safety_nnf
    return all(holds_fin(trace[i:], body) for i in range(len(trace)))


def is_witness(trace: Trace, spec: SpecFile) -> bool:
    """Some lasso point extends the trace to an ultimately periodic model."""
    if not is_pre_witness(trace, spec):
        return False
    d = len(trace)
    m = depth(spec.safety_nnf)
    for j in range(d):
        loop = trace[j:]
        unrolled = list(trace)
        while len(unrolled) < d + m + 1:
            unrolled.extend(loop)
        if _lasso_models(tuple(unrolled), d, len(loop), spec):
            return True
    return False


def _lasso_models(unrolled: Trace, prefix_len: int, period: int, spec: SpecFile) -> bool:
    """Check the periodic trace against the specification.

    Windows of length depth+1 decide the safety body exactly; window starts
    repeat with the loop period once inside the loop, so checking one period
    past the prefix suffices.
    """
    if not holds_fin(unrolled, spec.initial_nnf):
        return False
    body = spec.safety_nnf
    m = depth(body)
    for i in range(prefix_len + period):
        window = unrolled[i : i + m + 1]
        if len(window) < m + 1:
            window = unrolled[i:]
        if not holds_fin(window, body):
            return False
    return True


# ---------------------------------------------------------------------------
# Game construction and attractor solving

_INIT = ("init",)


@dataclass(frozen=True)
class StrategyTable:
    """Memory-less winning choices: (game state, env input) -> sys output."""

    choices: dict  # (state, env Valuation) -> (sys Valuation, next state)
    initial: tuple = _INIT


@dataclass
class OracleResult:
    realizable: bool
    strategy: StrategyTable | None
    states: int


def solve(spec: SpecFile, cfg: EngineConfig | None = None) -> OracleResult:
    """Decide realizability by backward attractor computation.

    Builds the reachable non-violated state graph, computes the set of
    states from which the environment can force a violation, and checks the
    initial state.  When the system wins, returns a memory-less strategy
    picking the first non-attractor answer per input.
    """
    cfg = cfg or EngineConfig()
    vocab = spec.vocabulary
    body = spec.safety_nnf
    env_vals = vocab.env_valuations()
    sys_vals = vocab.sys_valuations()

    def extend(state: tuple, u: Valuation) -> tuple | None:
        """Next residual state, or None when the move shows a violation."""
        if state == _INIT and not holds_fin((u,), spec.initial_nnf):
            return None
        pending = set() if state == _INIT else set(state)
        pending.add(body)
        residual: set = set()
        for f in pending:
            r = progress(f, u)
            if r is FALSE:
                return None
            if r is not TRUE:
                for part in r.children if isinstance(r, And) else (r,):
                    residual.add(part)
        return _reduce_residuals(residual)

    # forward reachable construction
    succs: dict = {}
    frontier = [_INIT]
    seen = {_INIT}
    while frontier:
        state = frontier.pop()
        table = {}
        for v in env_vals:
            answers = []
            for w in sys_vals:
                u = v.combine(w)
                nxt_state = extend(state, u)
                answers.append((w, nxt_state))
                if nxt_state is not None and nxt_state not in seen:
                    if len(seen) >= cfg.oracle_budget:
                        raise OracleBudgetExceeded(cfg.oracle_budget)
                    seen.add(nxt_state)
                    frontier.append(nxt_state)
            table[v] = answers
        succs[state] = table

    # environment attractor to the violation sink (None); grows monotonically
    # and therefore closes within one sweep per state
    attractor: set = set()
    sweeps = 0
    changed = True
    while changed:
        sweeps += 1
        assert sweeps <= len(succs) + 1
        changed = False
        for state, table in succs.items():
            if state in attractor:
                continue
            if any(
                all(n is None or n in attractor for _, n in answers)
                for answers in table.values()
            ):
                attractor.add(state)
                changed = True

    if _INIT in attractor:
        return OracleResult(False, None, len(seen))

    choices = {}
    for state, table in succs.items():
        if state in attractor:
            continue
        for v, answers in table.items():
            w, nxt_state = next(
                (w, n) for w, n in answers if n is not None and n not in attractor
            )
            choices[(state, v)] = (w, nxt_state)
    return OracleResult(True, StrategyTable(choices), len(seen))


def strategy_machine(strategy: StrategyTable, spec: SpecFile):
    """View a winning strategy table as a transducer (for cross-checks)."""
    from .synthesis import MealyMachine

    vocab = spec.vocabulary
    states: dict[tuple, str] = {}

    def name(state: tuple) -> str:
        if state not in states:
            states[state] = f"w{len(states)}"
        return states[state]

    transitions = {}
    frontier = [strategy.initial]
    name(strategy.initial)
    while frontier:
        state = frontier.pop()
        for v in vocab.env_valuations():
            w, nxt_state = strategy.choices[(state, v)]
            fresh = nxt_state not in states
            transitions[(name(state), v)] = (w, name(nxt_state))
            if fresh:
                frontier.append(nxt_state)
    return MealyMachine(
        vocabulary=vocab,
        states=tuple(states.values()),
        initial=states[strategy.initial],
        transitions=transitions,
    )
