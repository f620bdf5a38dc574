"""The tableau decision engine.

An AND-OR tree over node labels (canonical formula sets plus a marker for
whose turn the label represents).  A branch fails on a syntactically
inconsistent label and succeeds when an earlier label on the branch entails
the current one, in which case the play can loop.  The tree is built
depth-first with the short-circuit discipline of the driving algorithm:
AND-blocks stop at the first closed child, OR-blocks at the first open one.
"""
from __future__ import annotations

import enum
import sys
from dataclasses import dataclass, field
from typing import Iterable

from .config import EngineConfig
from .covering import (
    CoveringLimitExceeded,
    EnvSpaceExceeded,
    guard_env_space,
    is_x_covering,
    iter_minimal_x_coverings,
)
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
    is_literal,
    nnf_neg,
    nxt,
    sort_key,
)
from .parser import SpecFile, render
from .tnf import (
    SeparatedMove,
    TnfFormula,
    conj_set_stronger,
    disjunct_sets,
    elementary,
    from_disjunct_sets,
    step_down,
    tnf_of_conjunction,
)


class ResourceExceeded(Exception):
    """A configured budget ran out; the verdict is unknown, never guessed."""


# ---------------------------------------------------------------------------
# Subsumption

_SUBSUME_CACHE: dict = {}


def subsumes(beta: Formula, gamma: Formula) -> bool:
    """beta entails gamma by the syntactic subsumption rules."""
    if beta is gamma or beta is FALSE or gamma is TRUE:
        return True
    key = (beta, gamma)
    hit = _SUBSUME_CACHE.get(key)
    if hit is None:
        hit = _subsumes_raw(beta, gamma)
        _SUBSUME_CACHE[key] = hit
    return hit


def _subsumes_raw(beta: Formula, gamma: Formula) -> bool:
    # marked disjunctions compare alternative-wise
    if isinstance(beta, DOr) or isinstance(gamma, DOr):
        gs = disjunct_sets(gamma)
        return all(
            any(conj_set_stronger(db, dg) for dg in gs)
            for db in disjunct_sets(beta)
        )
    if isinstance(gamma, Or):
        return any(subsumes(beta, g) for g in gamma.children)
    if isinstance(beta, And):
        return any(subsumes(b, gamma) for b in beta.children)
    if isinstance(beta, Lit) and isinstance(gamma, Lit):
        # x = c entails x != d for the other constants
        return (
            beta.var == gamma.var
            and beta.const is not None
            and gamma.const is not None
            and beta.positive
            and not gamma.positive
            and beta.const != gamma.const
        )
    if isinstance(beta, (Next, Always, Eventually)) or isinstance(
        gamma, (Next, Always, Eventually)
    ):
        # a bare formula is its own zero-offset next (X^0 b == b)
        cb, sb, lb, hb = _view(beta)
        cg, sg, lg, hg = _view(gamma)
        if cb == "X" and cg == "X":
            if sb is beta and sg is gamma:
                return False  # neither side unwrapped: nothing new to try
            return lb == lg and subsumes(sb, sg)
        if sb is not sg:
            return False
        if cb == "G" and cg == "G":
            return lb <= lg and hg <= hb
        if cb == "G" and cg == "X":
            return lb <= lg <= hb
        if cb == "G" and cg == "F":
            return lg <= lb and hb <= hg
        if cb == "X" and cg == "F":
            return lg <= lb and hb <= hg  # lb == hb here
        if cb == "F" and cg == "F":
            return lg <= lb and hb <= hg
    return False


def _view(f: Formula) -> tuple:
    """Normalize a leading next-chain into interval offsets."""
    k = 0
    if isinstance(f, Next):
        k, f = f.count, f.sub
    if isinstance(f, Always):
        return "G", f.sub, k + f.lo, k + f.hi
    if isinstance(f, Eventually):
        return "F", f.sub, k + f.lo, k + f.hi
    return "X", f, k, k


# ---------------------------------------------------------------------------
# Inconsistency and label order

def inconsistent(formulas: Iterable[Formula], vocab: Vocabulary | None = None) -> bool:
    """Syntactic inconsistency of a formula set.

    Fires on falsehood, on a pair beta/~gamma with beta entailing gamma, on
    two equations binding one variable to different constants, and (when the
    vocabulary is known) on a variable with its whole domain excluded.
    """
    fs = list(formulas)
    if FALSE in fs:
        return True
    eqs: dict[str, str] = {}
    excluded: dict[str, set] = {}
    for f in fs:
        if isinstance(f, Lit) and f.const is not None:
            if f.positive:
                if eqs.setdefault(f.var, f.const) != f.const:
                    return True
            else:
                excluded.setdefault(f.var, set()).add(f.const)
    if vocab is not None:
        for var, consts in excluded.items():
            if consts >= set(vocab.by_name[var].domain or ()):
                return True
    for b in fs:
        for g in fs:
            if subsumes(b, nnf_neg(g)):
                return True
    return False


def label_leq(anc: Iterable[Formula], leaf: Iterable[Formula]) -> bool:
    """Every leaf formula is entailed by some ancestor formula.

    An open subtree for the ancestor label then over-satisfies the leaf, so
    the branch may loop back (the companion markers must match; callers check
    that).
    """
    anc = list(anc)
    return all(any(subsumes(b, g) for b in anc) for g in leaf)


def label_insert(fs: set, f: Formula) -> None:
    """Insert keeping the set subsumption-free (weaker members dropped)."""
    if f is TRUE:
        return
    for g in fs:
        if subsumes(g, f):
            return
    for g in [g for g in fs if subsumes(f, g)]:
        fs.discard(g)
    fs.add(f)


def make_label(formulas: Iterable[Formula]) -> frozenset:
    out: set = set()
    for f in formulas:
        label_insert(out, f)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Saturation

def _dor_elementary(f: DOr) -> bool:
    return all(isinstance(g, Next) for d in disjunct_sets(f) for g in d)


def _split_label(fs: Iterable[Formula]):
    lits, nexts, dors, others = [], [], [], []
    for f in sorted(fs, key=sort_key):
        if is_literal(f):
            lits.append(f)
        elif isinstance(f, Next):
            nexts.append(f)
        elif isinstance(f, DOr) and _dor_elementary(f):
            dors.append(f)
        else:
            others.append(f)
    return lits, nexts, dors, others


def is_elementary(fs: Iterable[Formula]) -> bool:
    """Literals plus next-guarded obligations only: ready for the state jump."""
    return not _split_label(fs)[3]


def _saturation_step(fs: frozenset) -> tuple[str, list[frozenset]] | None:
    """One saturation rule application, or None if already saturated.

    Non-branching rules go first; the marked disjunction folds to its
    elementary form in one step, keeping its alternatives unsplit.
    """
    ordered = sorted(fs, key=sort_key)
    for f in ordered:
        if isinstance(f, And):
            rest = set(fs - {f})
            for c in f.children:
                label_insert(rest, c)
            return "(&)", [frozenset(rest)]
    for f in ordered:
        if isinstance(f, Always):
            rest = set(fs - {f})
            label_insert(rest, nxt(f.lo, f.sub))
            label_insert(rest, nxt(1, always(f.lo, f.hi - 1, f.sub)))
            return "(G<)", [frozenset(rest)]
    for f in ordered:
        if isinstance(f, DOr) and not _dor_elementary(f):
            rest = set(fs - {f})
            label_insert(rest, elementary(f))
            return "(dE)", [frozenset(rest)]
    for f in ordered:
        if isinstance(f, Eventually):
            rest = fs - {f}
            first, second = set(rest), set(rest)
            label_insert(first, nxt(f.lo, f.sub))
            label_insert(second, nxt(1, eventually(f.lo, f.hi - 1, f.sub)))
            return "(F<)", [frozenset(first), frozenset(second)]
    for f in ordered:
        if isinstance(f, Or):
            out = []
            for c in f.children:
                branch = set(fs - {f})
                label_insert(branch, c)
                out.append(frozenset(branch))
            return "(|)", out
    return None


def saturate(fs: Iterable[Formula]) -> list[frozenset]:
    """All fully saturated refinements of a label, in deterministic order."""
    out: list[frozenset] = []
    seen: set[frozenset] = set()
    stack = [make_label(fs)]
    while stack:
        cur = stack.pop()
        step = _saturation_step(cur)
        if step is None:
            if cur not in seen:
                seen.add(cur)
                out.append(cur)
        else:
            stack.extend(reversed(step[1]))
    return out


# ---------------------------------------------------------------------------
# Tableau data model

class Chi(enum.Enum):
    ALWAYS = "G"  # the label still owes the safety body now
    NEXT = "X"  # the label owes it from the next state on


class Verdict(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"
    UNKNOWN = "unknown"


class Kind(enum.Enum):
    OR = "or"
    AND = "and"
    SUCCESS = "success"
    FAILURE = "failure"
    REUSED = "reused"
    PENDING = "pending"


@dataclass
class TableauNode:
    id: int
    formulas: frozenset
    chi: Chi
    rule_in: str
    depth: int
    kind: Kind = Kind.PENDING
    children: list[int] = field(default_factory=list)
    expected_children: int | None = None
    loop_target: int | None = None
    is_open: bool | None = None
    moves: tuple[SeparatedMove, ...] | None = None  # AND-block moves, in child order
    reused_from: int | None = None


@dataclass
class Stats:
    nodes: int = 0
    max_depth: int = 0
    coverings: int = 0


class Tableau:
    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.nodes: dict[int, TableauNode] = {}
        self.root: int | None = None
        self.verdict: Verdict = Verdict.UNKNOWN
        self.stats = Stats()

    def node(self, nid: int) -> TableauNode:
        return self.nodes[nid]

    def recompute_verdict(self) -> Verdict:
        """Re-derive the verdict bottom-up from the stored tree."""
        if self.root is None:
            return Verdict.UNKNOWN
        ok = self._recompute(self.root)
        if ok is None:
            return Verdict.UNKNOWN
        return Verdict.OPEN if ok else Verdict.CLOSED

    def _recompute(self, nid: int) -> bool | None:
        n = self.nodes[nid]
        if n.kind is Kind.SUCCESS:
            return True
        if n.kind is Kind.FAILURE:
            return False
        if n.kind in (Kind.REUSED, Kind.PENDING):
            return n.is_open
        votes = [self._recompute(c) for c in n.children]
        if any(v is None for v in votes):
            return None
        if n.kind is Kind.AND:
            return all(votes) and len(votes) == (n.expected_children or len(votes))
        return any(votes)

    def to_dot(self) -> str:
        lines = ["digraph tableau {", "  node [shape=box, fontname=monospace];"]
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            if n.kind is Kind.FAILURE:
                body = "#"
            else:
                parts = [render(f) for f in sorted(n.formulas, key=sort_key)]
                parts.append("[next turn]" if n.chi is Chi.NEXT else "[always turn]")
                body = ", ".join(parts)
            shape = {
                Kind.SUCCESS: ", style=bold",
                Kind.FAILURE: ", color=red",
            }.get(n.kind, "")
            lines.append(f'  n{nid} [label="n{nid}: {_dot_escape(body)}"{shape}];')
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            style = ' [style=solid, label="&"]' if n.kind is Kind.AND else ""
            for c in n.children:
                rule = self.nodes[c].rule_in
                label = f' [label="{_dot_escape(rule)}"]' if n.kind is not Kind.AND else (
                    f' [label="& {_dot_escape(rule)}"]'
                )
                lines.append(f"  n{nid} -> n{c}{label};")
            if n.kind is Kind.SUCCESS and n.loop_target is not None:
                lines.append(
                    f"  n{nid} -> n{n.loop_target} [style=dashed, color=gray, constraint=false];"
                )
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


# ---------------------------------------------------------------------------
# The engine

def decide(spec: SpecFile, cfg: EngineConfig | None = None) -> tuple[Verdict, Tableau]:
    """Run the full decision procedure on a specification.

    Returns the completed tableau and its verdict; budget exhaustion yields
    UNKNOWN with the partial tree.
    """
    cfg = cfg or EngineConfig()
    engine = _Engine(spec, cfg)
    return engine.run()


class _Engine:
    def __init__(self, spec: SpecFile, cfg: EngineConfig):
        self.cfg = cfg
        self.vocab = spec.vocabulary
        self.body = spec.safety_nnf
        self.initial = spec.initial_nnf
        self.tab = Tableau(self.vocab)
        self.closure_base = spec.closure() if cfg.debug_closure else None

    def run(self) -> tuple[Verdict, Tableau]:
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20 * self.cfg.max_branch + 1000))
        try:
            guard_env_space(self.vocab, self.cfg.max_env_space)
            root_formulas = make_label([self.initial])
            rid = self._tab(root_formulas, Chi.ALWAYS, (), "", 0)
            self.tab.root = rid
            open_ = self.tab.node(rid).is_open
            self.tab.verdict = Verdict.OPEN if open_ else Verdict.CLOSED
        except (ResourceExceeded, EnvSpaceExceeded, CoveringLimitExceeded):
            self.tab.verdict = Verdict.UNKNOWN
        finally:
            sys.setrecursionlimit(limit)
        return self.tab.verdict, self.tab

    # -- node bookkeeping

    def _new_node(self, formulas: frozenset, chi: Chi, rule_in: str, depth: int) -> TableauNode:
        if len(self.tab.nodes) >= self.cfg.max_nodes:
            raise ResourceExceeded(f"node budget {self.cfg.max_nodes} exhausted")
        if depth > self.cfg.max_branch:
            raise ResourceExceeded(f"branch budget {self.cfg.max_branch} exhausted")
        nid = len(self.tab.nodes)
        node = TableauNode(nid, formulas, chi, rule_in, depth)
        self.tab.nodes[nid] = node
        self.tab.stats.nodes += 1
        self.tab.stats.max_depth = max(self.tab.stats.max_depth, depth)
        if self.closure_base is not None:
            for f in formulas:
                # literal sets are closed under enum-domain saturation, so
                # literals over declared variables are always admissible
                assert _in_closure_or_literal(f, self.closure_base), (
                    f"label member escapes the closure: {render(f)}"
                )
        return node

    # -- main recursion; returns the node id, verdict stored on the node

    def _tab(self, formulas: frozenset, chi: Chi, branch: tuple, rule_in: str, depth: int) -> int:
        node = self._new_node(formulas, chi, rule_in, depth)
        if inconsistent(formulas, self.vocab):
            node.kind = Kind.FAILURE
            node.is_open = False
            return node.id
        if chi is Chi.ALWAYS:
            self._expand_always(node, branch)
        else:
            self._expand_next(node, branch)
        return node.id

    # -- chi = ALWAYS: loop check, then covering analysis

    def _expand_always(self, node: TableauNode, branch: tuple) -> None:
        for anc_id in branch:
            anc = self.tab.node(anc_id)
            if anc.chi is Chi.ALWAYS and label_leq(anc.formulas, node.formulas):
                node.kind = Kind.SUCCESS
                node.loop_target = anc_id
                node.is_open = True
                return
        t = tnf_of_conjunction(node.formulas, self.body, self.vocab, self.cfg.simplify)
        self._covering_split(node, t, branch)

    def _covering_split(self, node: TableauNode, t: TnfFormula, branch: tuple) -> None:
        if not is_x_covering(t, self.vocab):
            node.kind = Kind.OR
            cid = self._tab(
                frozenset([FALSE]), Chi.ALWAYS, branch + (node.id,), "(GF)", node.depth + 1
            )
            node.children.append(cid)
            node.is_open = False
            return
        order = self._move_order(t)
        full = frozenset(range(len(t.moves)))
        move_cache: dict = {}
        if _irredundant_cover(t, self.vocab, full):
            self._and_block(node, t.moves, branch + (node.id,), move_cache)
            return
        node.kind = Kind.OR
        node.is_open = False
        explored = 0
        for cover in iter_minimal_x_coverings(t, self.vocab, order):
            if explored >= self.cfg.max_coverings:
                raise ResourceExceeded(
                    f"covering budget {self.cfg.max_coverings} exhausted"
                )
            explored += 1
            self.tab.stats.coverings += 1
            moves = tuple(t.moves[i] for i in sorted(cover))
            sub = TnfFormula(moves)
            # covering-restriction nodes never serve as loop targets, so the
            # subtree of a move is the same under every covering that uses it
            child = self._new_node(
                make_label([sub.formula()]), Chi.ALWAYS, "(G|)", node.depth + 1
            )
            node.children.append(child.id)
            if inconsistent(child.formulas, self.vocab):
                child.kind = Kind.FAILURE
                child.is_open = False
            else:
                looped = False
                for anc_id in branch + (node.id,):
                    anc = self.tab.node(anc_id)
                    if anc.chi is Chi.ALWAYS and label_leq(anc.formulas, child.formulas):
                        child.kind = Kind.SUCCESS
                        child.loop_target = anc_id
                        child.is_open = True
                        looped = True
                        break
                if not looped:
                    self._and_block(child, moves, branch + (node.id,), move_cache)
            if child.is_open:
                node.is_open = True
                return
        # generator exhausted: every minimal covering is closed

    def _move_order(self, t: TnfFormula) -> list[int]:
        idx = list(range(len(t.moves)))
        if self.cfg.heuristic == "weakest":
            idx.sort(key=lambda i: (_move_strength(t.moves[i]), i))
        return idx

    def _and_block(
        self, node: TableauNode, moves: tuple, branch: tuple, move_cache: dict | None = None
    ) -> None:
        """AND over the moves of one minimal covering, first closed child wins.

        A move's subtree is a function of its strict-future part alone: the
        literals are dropped by the next-state jump and cannot clash with
        from-next conjuncts, and all loop-relevant ancestors are shared.  So
        within one always-node expansion each distinct future is expanded
        once and re-offered to the other coverings.
        """
        node.kind = Kind.AND
        node.expected_children = len(moves)
        node.moves = moves
        node.is_open = True
        cache = move_cache if move_cache is not None else {}
        inner = branch  # callers pass the loop-eligible ancestors only
        for move in moves:
            fut = move.future
            reuse = cache.get(fut)
            if reuse is None and self.cfg.prune_siblings and fut is not None:
                for other_fut, (rep_id, rep_open) in cache.items():
                    if other_fut is None:
                        continue
                    if rep_open and _future_leq(other_fut, fut):
                        reuse = (rep_id, rep_open)
                        break
            if reuse is not None:
                child = self._new_node(
                    make_label(self._move_formulas(move)), Chi.NEXT, "(G&)", node.depth + 1
                )
                child.kind = Kind.REUSED
                child.reused_from = reuse[0]
                child.is_open = reuse[1]
            else:
                cid = self._tab(
                    make_label(self._move_formulas(move)),
                    Chi.NEXT,
                    inner,
                    "(G&)",
                    node.depth + 1,
                )
                child = self.tab.node(cid)
                cache[fut] = (child.id, bool(child.is_open))
            node.children.append(child.id)
            if not child.is_open:
                node.is_open = False
                return

    @staticmethod
    def _move_formulas(move: SeparatedMove) -> list[Formula]:
        out = list(move.literals)
        if move.future is not None:
            out.append(move.future)
        return out

    # -- chi = NEXT: saturate until elementary, then jump

    def _expand_next(self, node: TableauNode, branch: tuple) -> None:
        lits, nexts, dors, others = _split_label(node.formulas)
        if not others:
            node.kind = Kind.OR
            ds = [frozenset(nexts)]
            for d in dors:
                ds = [a | b for a in ds for b in disjunct_sets(d)]
            combined = from_disjunct_sets(ds)
            child_formulas: list[Formula] = []
            if combined is not None:
                stepped = step_down(combined)
                if isinstance(stepped, And):
                    child_formulas = list(stepped.children)
                elif stepped is not TRUE:
                    child_formulas = [stepped]
            cid = self._tab(
                make_label(child_formulas), Chi.ALWAYS, branch, "(X)", node.depth + 1
            )
            node.children.append(cid)
            node.is_open = self.tab.node(cid).is_open
            return
        step = _saturation_step(node.formulas)
        if step is None:  # NNF labels always admit a rule here
            raise AssertionError("unsaturated label without applicable rule")
        rule, alternatives = step
        node.kind = Kind.OR
        node.is_open = False
        for alt in alternatives:
            cid = self._tab(alt, Chi.NEXT, branch, rule, node.depth + 1)
            node.children.append(cid)
            if self.tab.node(cid).is_open:
                node.is_open = True
                return


def _in_closure_or_literal(f: Formula, base: set) -> bool:
    from .formula import in_closure

    if is_literal(f):
        return True
    if isinstance(f, Next) and f.sub is FALSE:
        return True  # dead-future marker for an all-inconsistent alternative set
    if isinstance(f, (And, Or, DOr)):
        return all(_in_closure_or_literal(c, base) for c in f.children)
    return in_closure(f, base)


def _irredundant_cover(t: TnfFormula, vocab: Vocabulary, cover: frozenset) -> bool:
    from .covering import _irredundant, env_cell

    cells = [env_cell(m, vocab) for m in t.moves]
    return _irredundant(cover, cells, vocab.env_valuations())


def _future_leq(strong: Formula, weak: Formula) -> bool:
    """The strong strict future entails the weak one, alternative-wise."""
    ws = disjunct_sets(weak)
    return all(
        any(conj_set_stronger(d, w) for w in ws) for d in disjunct_sets(strong)
    )


def _move_strength(move: SeparatedMove):
    """Heuristic order key: weaker strict futures sort first."""
    if move.future is None:
        return ((0,),)
    keys = []
    for d in disjunct_sets(move.future):
        for f in d:
            c, _, lo, hi = _view(f)
            if c == "F":
                keys.append((2, lo, -hi))
            elif c == "G":
                keys.append((3, hi - lo, lo))
            else:
                keys.append((1, lo, 0))
    return tuple(sorted(keys))
