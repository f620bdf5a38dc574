"""Winning-strategy extraction from an open tableau, plus machine checking.

Machine states are the expanded always-turn nodes of the committed winning
bunch; each AND-move contributes one transition per environment valuation in
its cell, answering with the move's system literals (free system variables
default to false / the first constant).  Success loops become transitions to
the loop target's state: the target's subtree satisfies a label that entails
the leaf's, so replaying it there stays winning.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .covering import env_cell
from .formula import (
    FALSE,
    TRUE,
    And,
    Valuation,
    Vocabulary,
    depth,
    holds_fin,
    progress,
)
from .parser import SpecFile
from .tableau import Chi, Kind, Tableau, Verdict, label_insert


class NotOpen(Exception):
    pass


@dataclass(frozen=True)
class MealyMachine:
    vocabulary: Vocabulary
    states: tuple[str, ...]
    initial: str
    transitions: dict  # (state, env Valuation) -> (sys Valuation, state)

    def step(self, state: str, env: Valuation) -> tuple[Valuation, str]:
        return self.transitions[(state, env)]

    def input_total(self) -> bool:
        envs = self.vocabulary.env_valuations()
        return all((s, v) in self.transitions for s in self.states for v in envs)

    def reachable_states(self) -> tuple[str, ...]:
        seen = {self.initial}
        frontier = [self.initial]
        envs = self.vocabulary.env_valuations()
        while frontier:
            s = frontier.pop()
            for v in envs:
                _, t = self.transitions[(s, v)]
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        return tuple(sorted(seen))


# ---------------------------------------------------------------------------
# Extraction

def extract(tab: Tableau, spec: SpecFile) -> MealyMachine:
    """Build the strategy machine from the committed open bunch."""
    if tab.verdict is not Verdict.OPEN or tab.root is None:
        raise NotOpen("strategy extraction needs an open tableau")
    vocab = spec.vocabulary
    root_state = _state_node(tab, tab.root)
    states: dict[int, str] = {}
    transitions: dict = {}
    frontier = [root_state]
    _state_name(states, root_state)
    while frontier:
        nid = frontier.pop()
        node = tab.node(nid)
        block = _and_block_of(tab, nid)
        assigned: set[Valuation] = set()
        for move, child_id in block:
            out = _default_completion(move.literals, vocab)
            succ = _successor_state(tab, child_id)
            fresh = succ not in states
            succ_name = _state_name(states, succ)
            for env in sorted(env_cell(move, vocab), key=lambda v: v.items):
                if env in assigned:
                    continue
                assigned.add(env)
                transitions[(states[nid], env)] = (out, succ_name)
            if fresh:
                frontier.append(succ)
    names = tuple(states[k] for k in sorted(states, key=lambda n: int(states[n][1:])))
    return MealyMachine(vocab, names, states[root_state], transitions)


def _state_name(states: dict, nid: int) -> str:
    if nid not in states:
        states[nid] = f"n{len(states)}"
    return states[nid]


def _state_node(tab: Tableau, nid: int) -> int:
    """Resolve a node to the always-turn node whose AND-block acts for it."""
    node = tab.node(nid)
    if node.kind is Kind.SUCCESS:
        return _state_node(tab, node.loop_target)
    if node.kind is Kind.AND:
        return nid
    if node.kind is Kind.OR:
        for c in node.children:
            child = tab.node(c)
            if child.is_open:
                return _state_node(tab, c)
    raise NotOpen(f"node n{nid} has no open expansion")


def _and_block_of(tab: Tableau, nid: int):
    node = tab.node(nid)
    assert node.kind is Kind.AND and node.moves is not None
    return list(zip(node.moves, node.children))


def _successor_state(tab: Tableau, nid: int) -> int:
    """Follow the committed open path from an AND-child to the next state."""
    node = tab.node(nid)
    if node.kind is Kind.REUSED:
        return _successor_state(tab, node.reused_from)
    if node.chi is Chi.ALWAYS:
        return _state_node(tab, nid)
    for c in node.children:
        child = tab.node(c)
        if child.is_open:
            return _successor_state(tab, c)
    raise NotOpen(f"node n{nid} has no open child")


def _default_completion(literals, vocab: Vocabulary) -> Valuation:
    """System output satisfying the move's system literals; rest defaulted."""
    fixed: dict = {}
    excluded: dict[str, set] = {}
    for l in literals:
        decl = vocab.by_name[l.var]
        if decl.owner != "sys":
            continue
        if l.const is None:
            fixed[l.var] = l.positive
        elif l.positive:
            fixed[l.var] = l.const
        else:
            excluded.setdefault(l.var, set()).add(l.const)
    out = {}
    for d in vocab.sys_vars:
        if d.name in fixed:
            out[d.name] = fixed[d.name]
        elif d.is_bool:
            out[d.name] = False
        else:
            banned = excluded.get(d.name, set())
            out[d.name] = next(c for c in d.domain if c not in banned)
    return Valuation.make(out)


# ---------------------------------------------------------------------------
# Verification by exhaustive driving

def verify(
    machine: MealyMachine,
    spec: SpecFile,
    horizon: int,
    collect_lassos: bool = False,
):
    """Drive the machine against every environment sequence up to `horizon`.

    Equivalent prefixes are merged: the pair (machine state, pending
    obligation residual) determines all future checks, so the search is
    exhaustive over env sequences while visiting each pair once.  Returns
    (True, None) or (False, offending env sequence).  With `collect_lassos`,
    also returns traces that closed a (machine state, window) loop.
    """
    vocab = spec.vocabulary
    body = spec.safety_nnf
    m = depth(body) + 1
    envs = vocab.env_valuations()
    lassos: list = []
    seen_pairs: set = set()
    seen_windows: set = set()
    # entries: (machine state, residual obligations, window, env history, trace)
    start = (machine.initial, frozenset(), (), (), ())
    queue = [start]
    while queue:
        state, residual, window, history, trace = queue.pop()
        if len(history) >= horizon:
            continue
        for env in envs:
            try:
                out, nxt_state = machine.step(state, env)
            except KeyError:
                return _fail(history + (env,), lassos, collect_lassos)
            u = env.combine(out)
            if not history and not holds_fin((u,), spec.initial_nnf):
                return _fail(history + (env,), lassos, collect_lassos)
            new_res: set = set()
            dead = False
            for f in set(residual) | {body}:
                r = progress(f, u)
                if r is FALSE:
                    dead = True
                    break
                if r is not TRUE:
                    for part in r.children if isinstance(r, And) else (r,):
                        label_insert(new_res, part)
            if dead:
                return _fail(history + (env,), lassos, collect_lassos)
            res = frozenset(new_res)
            new_window = (window + (u,))[-m:]
            new_trace = trace + (u,)
            if collect_lassos:
                wkey = (nxt_state, new_window)
                if wkey in seen_windows and len(new_trace) <= 3 * m:
                    lassos.append(new_trace)
                seen_windows.add(wkey)
            pair = (nxt_state, res, new_window if collect_lassos else None)
            if pair in seen_pairs:
                continue
            seen_pairs.add(pair)
            queue.append((nxt_state, res, new_window, history + (env,), new_trace))
    return (True, None, lassos) if collect_lassos else (True, None)


def _fail(history, lassos, collect_lassos):
    return (False, history, lassos) if collect_lassos else (False, history)


def drive(machine: MealyMachine, env_seq) -> tuple:
    """The trace produced by feeding an environment sequence to the machine."""
    state = machine.initial
    trace = []
    for env in env_seq:
        out, state = machine.step(state, env)
        trace.append(env.combine(out))
    return tuple(trace)


def default_horizon(spec: SpecFile) -> int:
    return 2 * (depth(spec.safety_nnf) + 2)


# ---------------------------------------------------------------------------
# Serialization

def machine_to_json(machine: MealyMachine) -> str:
    def val_obj(v: Valuation) -> dict:
        return {k: val for k, val in v.items}

    transitions = []
    for (state, env), (out, nxt_state) in sorted(
        machine.transitions.items(), key=lambda kv: (kv[0][0], kv[0][1].items)
    ):
        transitions.append(
            {"from": state, "env": val_obj(env), "sys": val_obj(out), "to": nxt_state}
        )
    doc = {
        "states": list(machine.states),
        "initial": machine.initial,
        "transitions": transitions,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def machine_from_json(text: str, vocab: Vocabulary) -> MealyMachine:
    doc = json.loads(text)
    transitions = {}
    for t in doc["transitions"]:
        env = Valuation.make(t["env"])
        out = Valuation.make(t["sys"])
        transitions[(t["from"], env)] = (out, t["to"])
    return MealyMachine(vocab, tuple(doc["states"]), doc["initial"], transitions)


def machine_to_dot(machine: MealyMachine) -> str:
    """Transducer rendering: `env / sys` edge labels, `!` for negation."""
    def lit_text(v: Valuation) -> str:
        parts = []
        for var, val in v.items:
            if isinstance(val, bool):
                parts.append(var if val else f"!{var}")
            else:
                parts.append(f"{var}={val}")
        return " ".join(parts)

    lines = ["digraph strategy {", "  rankdir=LR;", "  node [shape=circle];"]
    lines.append(f'  __init [shape=point, label=""];')
    lines.append(f"  __init -> {machine.initial};")
    grouped: dict = {}
    for (state, env), (out, nxt_state) in machine.transitions.items():
        grouped.setdefault((state, nxt_state), []).append((env, out))
    for (state, nxt_state), pairs in sorted(grouped.items()):
        pairs.sort(key=lambda p: p[0].items)
        label = "\\n".join(f"{lit_text(e)} / {lit_text(o)}" for e, o in pairs)
        lines.append(f'  {state} -> {nxt_state} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
