"""Text front-end for `.sltl` specification files.

A specification file declares variables with their owner, an initial boolean
constraint and a safety body::

    # request/grant toggle
    env r;
    sys g;
    sys mode : {IDLE, BUSY};

    init: !g & mode = IDLE;
    safety: (r -> F[0,3] g) & G[0,1] !(g & mode = IDLE);

Operators by binding strength, weakest first: `<->`, `->`, `|`, `&`, then the
prefix operators `!`, `X`, `G[lo,hi]`, `F[lo,hi]`.  `X` repeats for higher
offsets.  Comments run from `#` to end of line.
"""
from __future__ import annotations

from dataclasses import dataclass

from .formula import (
    FALSE,
    TRUE,
    And,
    Const,
    DOr,
    Eventually,
    Formula,
    Iff,
    Implies,
    Lit,
    Next,
    Not,
    Or,
    Always,
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
    to_nnf,
)

KEYWORDS = {"env", "sys", "init", "safety", "true", "false", "X", "G", "F"}


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class SpecFile:
    vocabulary: Vocabulary
    initial: Formula
    safety: Formula

    @property
    def initial_nnf(self) -> Formula:
        return to_nnf(self.initial)

    @property
    def safety_nnf(self) -> Formula:
        return to_nnf(self.safety)

    def closure(self) -> set:
        """Generator set for every formula the solver can put in a label."""
        from .formula import closure

        return closure(self.initial_nnf, self.safety_nnf)


@dataclass(frozen=True)
class Token:
    kind: str  # 'name' | 'num' | 'punct' | 'eof'
    text: str
    line: int
    col: int


_PUNCT = ("<->", "->", "|", "&", "!", "(", ")", "[", "]", "{", "}", ",", ";", ":", "=")


def _tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.vocab: Vocabulary | None = None

    # -- token plumbing

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def fail(self, msg: str, tok: Token | None = None):
        t = tok or self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- grammar

    def spec(self) -> SpecFile:
        decls: list[VarDecl] = []
        seen: set[str] = set()
        while self.peek().text in ("env", "sys"):
            owner = self.next().text
            name_tok = self.next()
            if name_tok.kind != "name" or name_tok.text in KEYWORDS:
                self.fail("expected variable name", name_tok)
            if name_tok.text in seen:
                self.fail(f"variable {name_tok.text!r} already declared", name_tok)
            seen.add(name_tok.text)
            domain = None
            if self.peek().text == ":":
                self.next()
                self.expect("{")
                consts = [self._const_name()]
                while self.peek().text == ",":
                    self.next()
                    consts.append(self._const_name())
                self.expect("}")
                if len(consts) < 2:
                    self.fail("enumerated domain needs at least two constants", name_tok)
                if len(set(consts)) != len(consts):
                    self.fail("duplicate constant in domain", name_tok)
                domain = tuple(consts)
            self.expect(";")
            decls.append(VarDecl(name_tok.text, owner, domain))
        self.vocab = Vocabulary(decls)

        init_tok = self.expect("init")
        self.expect(":")
        initial = self.formula()
        self.expect(";")
        if _has_temporal(initial):
            self.fail("temporal operator in initial formula", init_tok)

        self.expect("safety")
        self.expect(":")
        safety = self.formula()
        self.expect(";")
        t = self.peek()
        if t.kind != "eof":
            self.fail(f"trailing input {t.text!r}")
        return SpecFile(self.vocab, initial, safety)

    def _const_name(self) -> str:
        t = self.next()
        if t.kind != "name" or t.text in KEYWORDS:
            self.fail("expected constant name", t)
        return t.text

    def formula(self) -> Formula:
        return self._iff()

    def _iff(self) -> Formula:
        f = self._impl()
        while self.peek().text == "<->":
            self.next()
            f = iff(f, self._impl())
        return f

    def _impl(self) -> Formula:
        f = self._or()
        if self.peek().text == "->":
            self.next()
            return implies(f, self._impl())
        return f

    def _or(self) -> Formula:
        f = self._and()
        items = [f]
        while self.peek().text == "|":
            self.next()
            items.append(self._and())
        return lor(items) if len(items) > 1 else f

    def _and(self) -> Formula:
        f = self._unary()
        items = [f]
        while self.peek().text == "&":
            self.next()
            items.append(self._unary())
        return land(items) if len(items) > 1 else f

    def _unary(self) -> Formula:
        t = self.peek()
        if t.text == "!":
            self.next()
            return lnot(self._unary())
        if t.text == "X":
            self.next()
            return nxt(1, self._unary())
        if t.text in ("G", "F"):
            self.next()
            lo, hi = self._interval(t)
            sub = self._unary()
            return always(lo, hi, sub) if t.text == "G" else eventually(lo, hi, sub)
        return self._atom()

    def _interval(self, op_tok: Token) -> tuple[int, int]:
        self.expect("[")
        lo = self._number()
        self.expect(",")
        hi = self._number()
        close = self.expect("]")
        if lo > hi:
            raise ParseError(f"empty interval [{lo},{hi}]", op_tok.line, op_tok.col)
        return lo, hi

    def _number(self) -> int:
        t = self.next()
        if t.kind != "num":
            self.fail("expected number", t)
        return int(t.text)

    def _atom(self) -> Formula:
        t = self.next()
        if t.text == "(":
            f = self.formula()
            self.expect(")")
            return f
        if t.text == "true":
            return TRUE
        if t.text == "false":
            return FALSE
        if t.kind == "name" and t.text not in KEYWORDS:
            decl = self.vocab.by_name.get(t.text) if self.vocab else None
            if decl is None:
                self.fail(f"undeclared variable {t.text!r}", t)
            if self.peek().text == "=":
                self.next()
                c = self.next()
                if c.kind != "name" or c.text in KEYWORDS:
                    self.fail("expected constant name", c)
                if decl.is_bool:
                    self.fail(f"{t.text!r} is boolean, not enumerated", t)
                if c.text not in decl.domain:
                    self.fail(f"constant {c.text!r} not in domain of {t.text!r}", c)
                return lit(t.text, True, c.text)
            if not decl.is_bool:
                self.fail(f"enumerated variable {t.text!r} needs '= constant'", t)
            return lit(t.text)
        self.fail(f"expected formula, found {t.text or 'end of input'!r}", t)


def _has_temporal(f: Formula) -> bool:
    if isinstance(f, (Next, Always, Eventually)):
        return True
    if isinstance(f, (And, Or, DOr)):
        return any(_has_temporal(c) for c in f.children)
    if isinstance(f, Not):
        return _has_temporal(f.sub)
    if isinstance(f, (Implies, Iff)):
        return _has_temporal(f.left) or _has_temporal(f.right)
    return False


def parse(text: str) -> SpecFile:
    return _Parser(text).spec()


def parse_formula(text: str, vocab: Vocabulary) -> Formula:
    """Parse a bare formula against an existing vocabulary (tests, tooling)."""
    p = _Parser(text)
    p.vocab = vocab
    f = p.formula()
    t = p.peek()
    if t.kind != "eof":
        p.fail(f"trailing input {t.text!r}")
    return f


# ---------------------------------------------------------------------------
# Rendering

_LEVEL_IFF, _LEVEL_IMPL, _LEVEL_OR, _LEVEL_AND, _LEVEL_UNARY, _LEVEL_ATOM = range(6)


def render(f: Formula) -> str:
    """Surface syntax; `parse_formula(render(f))` gives back canonical `f`.

    The marked disjunction renders as plain `|` (they are semantically equal;
    the marking is internal to the solver).
    """
    return _render(f, 0)


def _render(f: Formula, outer: int) -> str:
    text, level = _render_level(f)
    if level < outer:
        return f"({text})"
    return text


def _render_level(f: Formula) -> tuple[str, int]:
    if isinstance(f, Const):
        return ("true" if f.value else "false"), _LEVEL_ATOM
    if isinstance(f, Lit):
        if f.const is None:
            return (f.var if f.positive else f"!{f.var}"), _LEVEL_UNARY if not f.positive else _LEVEL_ATOM
        eq = f"{f.var} = {f.const}"
        return (eq, _LEVEL_ATOM) if f.positive else (f"!({eq})", _LEVEL_UNARY)
    if isinstance(f, And):
        return " & ".join(_render(c, _LEVEL_AND + 1) for c in f.children), _LEVEL_AND
    if isinstance(f, (Or, DOr)):
        return " | ".join(_render(c, _LEVEL_OR + 1) for c in f.children), _LEVEL_OR
    if isinstance(f, Next):
        return "X " * f.count + _render(f.sub, _LEVEL_UNARY), _LEVEL_UNARY
    if isinstance(f, Always):
        return f"G[{f.lo},{f.hi}] " + _render(f.sub, _LEVEL_UNARY), _LEVEL_UNARY
    if isinstance(f, Eventually):
        return f"F[{f.lo},{f.hi}] " + _render(f.sub, _LEVEL_UNARY), _LEVEL_UNARY
    if isinstance(f, Not):
        return "!" + _render(f.sub, _LEVEL_UNARY), _LEVEL_UNARY
    if isinstance(f, Implies):
        return f"{_render(f.left, _LEVEL_IMPL + 1)} -> {_render(f.right, _LEVEL_IMPL)}", _LEVEL_IMPL
    if isinstance(f, Iff):
        return f"{_render(f.left, _LEVEL_IFF + 1)} <-> {_render(f.right, _LEVEL_IFF + 1)}", _LEVEL_IFF
    raise TypeError(type(f).__name__)
