"""Core syntax and finite-trace semantics for the bounded safety fragment.

Formulas are built from boolean/enumerated literals with `&`, `|`, a marked
disjunction `DOr` (kept unsplit by the tableau engine), counted next `X^k`,
and the bounded temporal operators `G[n,m]` / `F[n,m]`.  `Not`, `Implies` and
`Iff` exist only as surface connectives and are removed by `to_nnf`.

All formula objects are interned: structural equality coincides with object
identity, which makes the heavy set/dict traffic in the solver cheap.  Always
construct through the factory functions (`lit`, `land`, `lor`, `dor`, `nxt`,
`always`, `eventually`, ...), never by instantiating the node classes
directly.  The factories canonicalize:

* `And`/`Or`/`DOr` children are flattened, deduplicated and sorted by a total
  structural order; boolean constants are absorbed.
* point intervals collapse: `G[n,n] f == F[n,n] f == X^n f`, and `X^0 f == f`.
* `X` of `X` merges into a single counted node.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator


# ---------------------------------------------------------------------------
# Variables and valuations


@dataclass(frozen=True)
class VarDecl:
    """A declared variable: boolean (domain None) or enumerated."""

    name: str
    owner: str  # 'env' | 'sys'
    domain: tuple[str, ...] | None = None

    @property
    def is_bool(self) -> bool:
        return self.domain is None

    def values(self) -> tuple:
        return (False, True) if self.domain is None else self.domain


class Vocabulary:
    """The declared variables, split into environment (X) and system (Y)."""

    def __init__(self, decls: Iterable[VarDecl]):
        self.decls: tuple[VarDecl, ...] = tuple(decls)
        names = [d.name for d in self.decls]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable declaration")
        self.by_name: dict[str, VarDecl] = {d.name: d for d in self.decls}
        self.env_vars = tuple(d for d in self.decls if d.owner == "env")
        self.sys_vars = tuple(d for d in self.decls if d.owner == "sys")

    def __contains__(self, name: str) -> bool:
        return name in self.by_name

    def env_space_size(self) -> int:
        n = 1
        for d in self.env_vars:
            n *= len(d.values())
        return n

    def valuations(self, decls: tuple[VarDecl, ...]) -> list["Valuation"]:
        """All valuations over `decls`, in a deterministic order."""
        combos = itertools.product(*(d.values() for d in decls))
        return [
            Valuation(tuple(zip((d.name for d in decls), vals)))
            for vals in combos
        ]

    def env_valuations(self) -> list["Valuation"]:
        return self.valuations(self.env_vars)

    def sys_valuations(self) -> list["Valuation"]:
        return self.valuations(self.sys_vars)

    def all_valuations(self) -> list["Valuation"]:
        return self.valuations(self.decls)


@dataclass(frozen=True)
class Valuation:
    """An assignment of values to variables (bool or enum constant name)."""

    items: tuple[tuple[str, object], ...]

    @staticmethod
    def make(mapping: dict) -> "Valuation":
        return Valuation(tuple(sorted(mapping.items())))

    def __getitem__(self, var: str):
        for k, v in self.items:
            if k == var:
                return v
        raise KeyError(var)

    def __contains__(self, var: str) -> bool:
        return any(k == var for k, _ in self.items)

    def as_dict(self) -> dict:
        return dict(self.items)

    def restrict(self, names: Iterable[str]) -> "Valuation":
        wanted = set(names)
        return Valuation(tuple((k, v) for k, v in self.items if k in wanted))

    def combine(self, other: "Valuation") -> "Valuation":
        merged = dict(self.items)
        for k, v in other.items:
            if k in merged and merged[k] != v:
                raise ValueError(f"conflicting values for {k}")
            merged[k] = v
        return Valuation.make(merged)


Trace = tuple  # tuple[Valuation, ...], length >= 1


# ---------------------------------------------------------------------------
# Formula nodes (interned; equality is identity)

_INTERN: dict = {}


def _make(cls, *args):
    key = (cls, args)
    f = _INTERN.get(key)
    if f is None:
        f = cls(*args)
        _INTERN[key] = f
    return f


class Formula:
    __slots__ = ("_key",)

    def __repr__(self):  # pragma: no cover - debugging aid
        from .parser import render

        return render(self)

    def sort_key(self) -> str:
        try:
            return self._key
        except AttributeError:
            k = self._build_key()
            object.__setattr__(self, "_key", k)
            return k

    def _build_key(self) -> str:
        raise NotImplementedError


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def _build_key(self):
        return "0t" if self.value else "0f"


class Lit(Formula):
    __slots__ = ("var", "const", "positive")

    def __init__(self, var: str, const: str | None, positive: bool):
        self.var = var
        self.const = const
        self.positive = positive

    def _build_key(self):
        c = self.const if self.const is not None else ""
        return f"1{self.var};{c};{'+' if self.positive else '-'}"


class And(Formula):
    __slots__ = ("children",)

    def __init__(self, children: tuple):
        self.children = children

    def _build_key(self):
        return "5&(" + ",".join(c.sort_key() for c in self.children) + ")"


class Or(Formula):
    __slots__ = ("children",)

    def __init__(self, children: tuple):
        self.children = children

    def _build_key(self):
        return "6|(" + ",".join(c.sort_key() for c in self.children) + ")"


class DOr(Formula):
    """Marked disjunction of strict-future alternatives (semantically `Or`)."""

    __slots__ = ("children",)

    def __init__(self, children: tuple):
        self.children = children

    def _build_key(self):
        return "7v(" + ",".join(c.sort_key() for c in self.children) + ")"


class Next(Formula):
    __slots__ = ("count", "sub")

    def __init__(self, count: int, sub: Formula):
        self.count = count
        self.sub = sub

    def _build_key(self):
        return f"2X{self.count:06d}({self.sub.sort_key()})"


class Always(Formula):
    __slots__ = ("lo", "hi", "sub")

    def __init__(self, lo: int, hi: int, sub: Formula):
        self.lo = lo
        self.hi = hi
        self.sub = sub

    def _build_key(self):
        return f"3G{self.lo:06d},{self.hi:06d}({self.sub.sort_key()})"


class Eventually(Formula):
    __slots__ = ("lo", "hi", "sub")

    def __init__(self, lo: int, hi: int, sub: Formula):
        self.lo = lo
        self.hi = hi
        self.sub = sub

    def _build_key(self):
        return f"4F{self.lo:06d},{self.hi:06d}({self.sub.sort_key()})"


class Not(Formula):
    __slots__ = ("sub",)

    def __init__(self, sub: Formula):
        self.sub = sub

    def _build_key(self):
        return f"8!({self.sub.sort_key()})"


class Implies(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right

    def _build_key(self):
        return f"9>({self.left.sort_key()},{self.right.sort_key()})"


class Iff(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right

    def _build_key(self):
        return f"9=({self.left.sort_key()},{self.right.sort_key()})"


TRUE: Const = _make(Const, True)
FALSE: Const = _make(Const, False)


def sort_key(f: Formula) -> str:
    return f.sort_key()


# ---------------------------------------------------------------------------
# Factories


def lit(var: str, positive: bool = True, const: str | None = None) -> Lit:
    return _make(Lit, var, const, positive)


def neg_lit(l: Lit) -> Lit:
    return _make(Lit, l.var, l.const, not l.positive)


def _flat_sorted(cls, items) -> tuple:
    out = []
    for f in items:
        if isinstance(f, cls):
            out.extend(f.children)
        else:
            out.append(f)
    seen = set()
    uniq = []
    for f in sorted(out, key=sort_key):
        if f not in seen:
            seen.add(f)
            uniq.append(f)
    return tuple(uniq)


def land(items: Iterable[Formula]) -> Formula:
    cs = _flat_sorted(And, items)
    if FALSE in cs:
        return FALSE
    cs = tuple(c for c in cs if c is not TRUE)
    if not cs:
        return TRUE
    if len(cs) == 1:
        return cs[0]
    return _make(And, cs)


def lor(items: Iterable[Formula]) -> Formula:
    cs = _flat_sorted(Or, items)
    if TRUE in cs:
        return TRUE
    cs = tuple(c for c in cs if c is not FALSE)
    if not cs:
        return FALSE
    if len(cs) == 1:
        return cs[0]
    return _make(Or, cs)


def dor(items: Iterable[Formula]) -> Formula:
    cs = _flat_sorted(DOr, items)
    if TRUE in cs:
        return TRUE
    cs = tuple(c for c in cs if c is not FALSE)
    if not cs:
        return FALSE
    if len(cs) == 1:
        return cs[0]
    return _make(DOr, cs)


def nxt(count: int, sub: Formula) -> Formula:
    if count < 0:
        raise ValueError("negative next count")
    if isinstance(sub, Next):
        count += sub.count
        sub = sub.sub
    if count == 0:
        return sub
    if sub is TRUE:
        return TRUE
    return _make(Next, count, sub)


def always(lo: int, hi: int, sub: Formula) -> Formula:
    if not 0 <= lo <= hi:
        raise ValueError(f"bad interval [{lo},{hi}]")
    if sub is TRUE:
        return TRUE
    if sub is FALSE:
        return nxt(lo, FALSE)
    if lo == hi:
        return nxt(lo, sub)
    return _make(Always, lo, hi, sub)


def eventually(lo: int, hi: int, sub: Formula) -> Formula:
    if not 0 <= lo <= hi:
        raise ValueError(f"bad interval [{lo},{hi}]")
    if sub is TRUE:
        return TRUE
    if sub is FALSE:
        return nxt(hi, FALSE)
    if lo == hi:
        return nxt(lo, sub)
    return _make(Eventually, lo, hi, sub)


def lnot(sub: Formula) -> Formula:
    if isinstance(sub, Const):
        return FALSE if sub.value else TRUE
    if isinstance(sub, Lit):
        return neg_lit(sub)
    if isinstance(sub, Not):
        return sub.sub
    return _make(Not, sub)


def implies(left: Formula, right: Formula) -> Formula:
    return _make(Implies, left, right)


def iff(left: Formula, right: Formula) -> Formula:
    return _make(Iff, left, right)


# ---------------------------------------------------------------------------
# Negation normal form


def to_nnf(f: Formula) -> Formula:
    """Push negations to literals and expand `->` / `<->`."""
    return _nnf(f, False)


_NNF_CACHE: dict = {}


def _nnf(f: Formula, neg: bool) -> Formula:
    key = (f, neg)
    out = _NNF_CACHE.get(key)
    if out is None:
        out = _nnf_raw(f, neg)
        _NNF_CACHE[key] = out
    return out


def _nnf_raw(f: Formula, neg: bool) -> Formula:
    if isinstance(f, Const):
        return (FALSE if f.value else TRUE) if neg else f
    if isinstance(f, Lit):
        return neg_lit(f) if neg else f
    if isinstance(f, Not):
        return _nnf(f.sub, not neg)
    if isinstance(f, And):
        kids = [_nnf(c, neg) for c in f.children]
        return lor(kids) if neg else land(kids)
    if isinstance(f, Or):
        kids = [_nnf(c, neg) for c in f.children]
        return land(kids) if neg else lor(kids)
    if isinstance(f, DOr):
        kids = [_nnf(c, neg) for c in f.children]
        return land(kids) if neg else dor(kids)
    if isinstance(f, Next):
        return nxt(f.count, _nnf(f.sub, neg))
    if isinstance(f, Always):
        if neg:
            return eventually(f.lo, f.hi, _nnf(f.sub, True))
        return always(f.lo, f.hi, _nnf(f.sub, False))
    if isinstance(f, Eventually):
        if neg:
            return always(f.lo, f.hi, _nnf(f.sub, True))
        return eventually(f.lo, f.hi, _nnf(f.sub, False))
    if isinstance(f, Implies):
        if neg:
            return land([_nnf(f.left, False), _nnf(f.right, True)])
        return lor([_nnf(f.left, True), _nnf(f.right, False)])
    if isinstance(f, Iff):
        a, b = f.left, f.right
        if neg:
            return lor([
                land([_nnf(a, False), _nnf(b, True)]),
                land([_nnf(a, True), _nnf(b, False)]),
            ])
        return land([
            lor([_nnf(a, True), _nnf(b, False)]),
            lor([_nnf(b, True), _nnf(a, False)]),
        ])
    raise TypeError(f"unknown formula node {type(f).__name__}")


def nnf_neg(f: Formula) -> Formula:
    """NNF of the negation; the `~` used by the inconsistency check."""
    return _nnf(f, True)


def is_nnf(f: Formula) -> bool:
    if isinstance(f, (Not, Implies, Iff)):
        return False
    if isinstance(f, (And, Or, DOr)):
        return all(is_nnf(c) for c in f.children)
    if isinstance(f, (Next, Always, Eventually)):
        return is_nnf(f.sub)
    return True


# ---------------------------------------------------------------------------
# Classification and measures


def is_literal(f: Formula) -> bool:
    return isinstance(f, (Lit, Const))


def is_from_next(f: Formula) -> bool:
    """Formulas that constrain only strictly-future states."""
    if isinstance(f, Next):
        return True
    return isinstance(f, (Always, Eventually)) and f.lo >= 1


def is_next_formula(f: Formula) -> bool:
    return isinstance(f, Next)


def depth(f: Formula) -> int:
    """Maximum lookahead in states (nested-next count after full expansion)."""
    if isinstance(f, (Lit, Const)):
        return 0
    if isinstance(f, (And, Or, DOr)):
        return max((depth(c) for c in f.children), default=0)
    if isinstance(f, Next):
        return f.count + depth(f.sub)
    if isinstance(f, (Always, Eventually)):
        return f.hi + depth(f.sub)
    if isinstance(f, Not):
        return depth(f.sub)
    if isinstance(f, (Implies, Iff)):
        return max(depth(f.left), depth(f.right))
    raise TypeError(type(f).__name__)


def variables(f: Formula) -> set[str]:
    if isinstance(f, Lit):
        return {f.var}
    if isinstance(f, Const):
        return set()
    if isinstance(f, (And, Or, DOr)):
        out: set[str] = set()
        for c in f.children:
            out |= variables(c)
        return out
    if isinstance(f, (Next, Always, Eventually, Not)):
        return variables(f.sub)
    return variables(f.left) | variables(f.right)


# ---------------------------------------------------------------------------
# Finite-trace satisfaction

def holds_fin(trace: Trace, f: Formula) -> bool:
    """Satisfaction over a finite trace.

    Obligations that reach past the end of the trace are vacuously true for
    `X` and for `F[n,m]` whose full interval does not fit; `G[n,m]` checks
    exactly the suffixes that exist.  `Not`/`Implies`/`Iff` are evaluated via
    their NNF expansion (the finite semantics is defined on NNF).
    """
    if not trace:
        raise ValueError("traces have length >= 1")
    d = len(trace)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Lit):
        return _lit_holds(trace[0], f)
    if isinstance(f, And):
        return all(holds_fin(trace, c) for c in f.children)
    if isinstance(f, (Or, DOr)):
        return any(holds_fin(trace, c) for c in f.children)
    if isinstance(f, Next):
        if d <= f.count:
            return True
        return holds_fin(trace[f.count:], f.sub)
    if isinstance(f, Always):
        top = min(f.hi, d - 1)
        return all(holds_fin(trace[j:], f.sub) for j in range(f.lo, top + 1))
    if isinstance(f, Eventually):
        if f.hi >= d:
            return True
        return any(holds_fin(trace[j:], f.sub) for j in range(f.lo, f.hi + 1))
    if isinstance(f, (Not, Implies, Iff)):
        return holds_fin(trace, to_nnf(f))
    raise TypeError(type(f).__name__)


def _lit_holds(v: Valuation, l: Lit) -> bool:
    val = v[l.var]
    if l.const is None:
        sat = bool(val)
    else:
        sat = val == l.const
    return sat if l.positive else not sat


# ---------------------------------------------------------------------------
# One-state residuation (progression)

def progress(f: Formula, v: Valuation) -> Formula:
    """The obligation left for the rest of the trace after one state `v`.

    For every finite trace `u . rest` (rest nonempty):
    ``holds_fin((u, *rest), f) == holds_fin(rest, progress(f, u))``
    and for the one-state trace ``holds_fin((u,), f) ==
    vacuously_true(progress(f, u))``.
    """
    if isinstance(f, Const):
        return f
    if isinstance(f, Lit):
        return TRUE if _lit_holds(v, f) else FALSE
    if isinstance(f, And):
        return land([progress(c, v) for c in f.children])
    if isinstance(f, (Or, DOr)):
        return lor([progress(c, v) for c in f.children])
    if isinstance(f, Next):
        return nxt(f.count - 1, f.sub)
    if isinstance(f, Always):
        if f.lo >= 1:
            return always(f.lo - 1, f.hi - 1, f.sub)
        rest = always(0, f.hi - 1, f.sub) if f.hi >= 1 else TRUE
        return land([progress(f.sub, v), rest])
    if isinstance(f, Eventually):
        if f.lo >= 1:
            return eventually(f.lo - 1, f.hi - 1, f.sub)
        rest = eventually(0, f.hi - 1, f.sub) if f.hi >= 1 else FALSE
        return lor([progress(f.sub, v), rest])
    return progress(to_nnf(f), v)


def vacuously_true(f: Formula) -> bool:
    """Truth value of a residual obligation when the trace ends here.

    Everything that still awaits a state (literals stripped off a next,
    temporal operators) is vacuously satisfied; only an explicit falsehood
    refutes.
    """
    if isinstance(f, Const):
        return f.value
    if isinstance(f, And):
        return all(vacuously_true(c) for c in f.children)
    if isinstance(f, (Or, DOr)):
        return any(vacuously_true(c) for c in f.children)
    return True


# ---------------------------------------------------------------------------
# Subformulas and closure

def subformulas(f: Formula) -> set[Formula]:
    """All subformulas; a counted next contributes every intermediate offset."""
    out: set[Formula] = set()
    _subs(f, out)
    return out


def _subs(f: Formula, out: set[Formula]) -> None:
    if f in out:
        return
    out.add(f)
    if isinstance(f, (And, Or, DOr)):
        for c in f.children:
            _subs(c, out)
    elif isinstance(f, Next):
        for j in range(1, f.count):
            out.add(nxt(j, f.sub))
        _subs(f.sub, out)
    elif isinstance(f, (Always, Eventually, Not)):
        _subs(f.sub, out)
    elif isinstance(f, (Implies, Iff)):
        _subs(f.left, out)
        _subs(f.right, out)


def variants(body: Formula) -> set[Formula]:
    """Interval/offset variants the solver can generate from the body."""
    out: set[Formula] = set()
    for g in subformulas(body):
        if isinstance(g, (Always, Eventually)):
            mk = always if isinstance(g, Always) else eventually
            for m in range(g.lo, g.hi):
                v = mk(g.lo, m, g.sub)
                out.add(v)
                out.add(nxt(1, v))
            for i in range(g.lo + 1):
                out |= subformulas(nxt(i, g.sub))
    return out


def closure(initial: Formula, body: Formula) -> set[Formula]:
    """Generator set for every formula a node label can mention.

    Marked-disjunction recombinations of these generators are left implicit;
    use `in_closure` to check a label member against the set.
    """
    return subformulas(land([initial, body])) | variants(body)


def in_closure(f: Formula, base: set[Formula]) -> bool:
    if f in base or f is TRUE or f is FALSE:
        return True
    if isinstance(f, (And, Or, DOr)):
        return all(in_closure(c, base) for c in f.children)
    return False


# ---------------------------------------------------------------------------
# Trace enumeration helper (test oracles, witness checks)

def all_traces(decls: tuple[VarDecl, ...], length: int) -> Iterator[Trace]:
    vocab = Vocabulary(decls)
    states = vocab.all_valuations()
    for combo in itertools.product(states, repeat=length):
        yield tuple(combo)
