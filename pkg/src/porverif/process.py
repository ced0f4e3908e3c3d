"""Basic and simple processes, the .spv protocol format and initiality."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from . import terms as T
from .frames import Frame
from .terms import CONSTRUCTORS, DESTRUCTORS


class Null(NamedTuple):
    def __str__(self):
        return "0"


class In(NamedTuple):
    ch: str
    x: T.Term
    cont: object

    def __str__(self):
        return f"in({self.ch},{self.x}); {self.cont}"


class Out(NamedTuple):
    ch: str
    u: T.Term
    cont: object

    def __str__(self):
        return f"out({self.ch},{self.u}); {self.cont}"


class If(NamedTuple):
    u: T.Term
    v: T.Term
    then: object
    else_: object

    def __str__(self):
        return f"if {self.u} = {self.v} then ({self.then}) else ({self.else_})"


NIL = Null()


def is_null(p):
    return type(p) is Null


def channel(p):
    if type(p) in (In, Out):
        return p.ch
    if type(p) is If:
        return channel(p.then) or channel(p.else_)
    return None


def channels_of(p):
    if type(p) in (In, Out):
        return {p.ch} | channels_of(p.cont)
    if type(p) is If:
        return channels_of(p.then) | channels_of(p.else_)
    return set()


def subst(p, s):
    """Apply a first-order substitution; bound input variables shadow it."""
    if not s:
        return p
    t = type(p)
    if t is Null:
        return p
    if t is In:
        inner = {k: v for k, v in s.items() if k != p.x}
        x = p.x
        if any(T.occurs(x, v) for v in inner.values()):
            # rename the binder to avoid capturing a substituted variable
            taken = set().union(*(T.collect(v, T.VAR) for v in inner.values())) | _all_vars(p.cont)
            while x in taken:
                x = T.var(x.name + "'")
            inner[p.x] = x
        return In(p.ch, x, subst(p.cont, inner))
    if t is Out:
        return Out(p.ch, T.apply(s, p.u), subst(p.cont, s))
    return If(T.apply(s, p.u), T.apply(s, p.v), subst(p.then, s), subst(p.else_, s))


def free_vars(p):
    t = type(p)
    if t is Null:
        return set()
    if t is In:
        return free_vars(p.cont) - {p.x}
    if t is Out:
        return T.collect(p.u, T.VAR) | free_vars(p.cont)
    return T.collect(p.u, T.VAR) | T.collect(p.v, T.VAR) | free_vars(p.then) | free_vars(p.else_)


def action_count(p):
    t = type(p)
    if t in (In, Out):
        return 1 + action_count(p.cont)
    if t is If:
        return max(action_count(p.then), action_count(p.else_))
    return 0


class ExtendedProcess(NamedTuple):
    procs: tuple  # basic processes sorted by channel, no Null members
    frame: Frame

    @staticmethod
    def make(procs, frame=Frame()):
        return ExtendedProcess(normal_procs(procs), frame)

    def __str__(self):
        return "{" + " | ".join(str(p) for p in self.procs) + "} " + str(self.frame)


def normal_procs(procs):
    live = [p for p in procs if not is_null(p)]
    chans = [channel(p) for p in live]
    if len(set(chans)) != len(chans):
        raise ValueError("two members use the same channel")
    return tuple(sorted(live, key=channel))


# -- initiality ----------------------------------------------------------------

def _compliant(p):
    t = type(p)
    if t is Null or t is In:
        return True
    if t is Out:
        return T.is_ground(p.u) and not T.is_valid(p.u)
    return False


def is_initial(a):
    return all(_compliant(p) for p in a.procs)


def wrap_initial(a, start="start"):
    procs = []
    for p in a.procs:
        if _compliant(p):
            procs.append(p)
            continue
        used = {v.name for v in _all_vars(p)}
        z = "z"
        i = 0
        while z in used:
            i += 1
            z = f"z{i}"
        zv = T.var(z)
        procs.append(In(channel(p), zv, If(zv, T.const(start), p, NIL)))
    return ExtendedProcess(tuple(procs), a.frame)


def _all_vars(p):
    t = type(p)
    if t is Null:
        return set()
    if t is In:
        return {p.x} | _all_vars(p.cont)
    if t is Out:
        return T.collect(p.u, T.VAR) | _all_vars(p.cont)
    return T.collect(p.u, T.VAR) | T.collect(p.v, T.VAR) | _all_vars(p.then) | _all_vars(p.else_)


# -- protocol files ------------------------------------------------------------

MODES = ("reference", "compressed", "reduced")


class ParseError(Exception):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg, self.line, self.col = msg, line, col


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple
    body: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Query:
    mode: str
    left: tuple
    left_frame: str
    right: tuple
    right_frame: str
    line: int = field(default=0, compare=False)

    def __str__(self):
        l = " | ".join(str(c) for c in self.left)
        r = " | ".join(str(c) for c in self.right)
        return f"{{ {l} }} {self.left_frame} ~ {{ {r} }} {self.right_frame}"


@dataclass
class ProtocolFile:
    consts: tuple = ()
    names: tuple = ()
    frames: dict = field(default_factory=dict)
    defs: dict = field(default_factory=dict)
    queries: list = field(default_factory=list)

    def instantiate(self, calls, frame_name):
        procs = []
        for c in calls:
            d = self.defs[c.name]
            procs.append(subst(d.body, dict(zip(d.params, c.args))))
        return ExtendedProcess.make(procs, self.frames[frame_name])

    def sides(self, q):
        return self.instantiate(q.left, q.left_frame), self.instantiate(q.right, q.right_frame)


_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<id>[A-Za-z_][A-Za-z0-9_']*|0)|(?P<op>->|[()\[\]{},;.=|~])")


class _Tokens:
    def __init__(self, src):
        self.toks = []
        line, start = 1, 0
        pos = 0
        while pos < len(src):
            m = _TOKEN.match(src, pos)
            if not m:
                raise ParseError(f"unexpected character {src[pos]!r}", line, pos - start + 1)
            text = m.group(0)
            if m.lastgroup:
                self.toks.append((text, line, pos - start + 1))
            for i, ch in enumerate(text):
                if ch == "\n":
                    line, start = line + 1, pos + i + 1
            pos = m.end()
        self.i = 0
        self.eof = (None, line, pos - start + 1)

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else self.eof

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text):
        t = self.next()
        if t[0] != text:
            raise ParseError(f"expected {text!r}, found {t[0]!r}" if t[0] else f"expected {text!r} at end of input", t[1], t[2])
        return t

    def ident(self, what="identifier"):
        t = self.next()
        if t[0] is None or not (t[0][0].isalpha() or t[0][0] == "_"):
            raise ParseError(f"expected {what}, found {t[0]!r}", t[1], t[2])
        return t


class _Parser:
    def __init__(self, src):
        self.tk = _Tokens(src)
        self.pf = ProtocolFile()

    def run(self):
        consts, names = [], []
        while self.tk.peek()[0] is not None:
            kw = self.tk.ident("declaration")
            if kw[0] in ("consts", "names"):
                target = consts if kw[0] == "consts" else names
                while True:
                    t = self.tk.ident()
                    self._fresh(t, consts, names)
                    target.append(t[0])
                    if self.tk.peek()[0] != ",":
                        break
                    self.tk.next()
                self.tk.expect(".")
                self.pf.consts, self.pf.names = tuple(consts), tuple(names)
            elif kw[0] == "frame":
                self._frame()
            elif kw[0] == "let":
                self._let()
            elif kw[0] == "query":
                self._query()
            else:
                raise ParseError(f"unknown declaration {kw[0]!r}", kw[1], kw[2])
        return self.pf

    def _fresh(self, t, *pools):
        if any(t[0] in p for p in pools) or t[0] in CONSTRUCTORS or t[0] in DESTRUCTORS:
            raise ParseError(f"identifier {t[0]!r} already declared", t[1], t[2])

    def _term(self, scope):
        t = self.tk.ident("term")
        n = t[0]
        if self.tk.peek()[0] == "(":
            if n not in CONSTRUCTORS and n not in DESTRUCTORS:
                raise ParseError(f"unknown function symbol {n!r}", t[1], t[2])
            self.tk.next()
            args = [self._term(scope)]
            while self.tk.peek()[0] == ",":
                self.tk.next()
                args.append(self._term(scope))
            self.tk.expect(")")
            arity = CONSTRUCTORS.get(n, DESTRUCTORS.get(n))
            if arity != len(args):
                raise ParseError(f"{n} expects {arity} arguments, got {len(args)}", t[1], t[2])
            return T.app(n, *args)
        if n in scope:
            return T.var(n)
        if n in self.pf.names:
            return T.name(n)
        if n in self.pf.consts:
            return T.const(n)
        raise ParseError(f"undeclared identifier {n!r}", t[1], t[2])

    def _frame(self):
        t = self.tk.ident("frame name")
        if t[0] in self.pf.frames:
            raise ParseError(f"frame {t[0]!r} already defined", t[1], t[2])
        self.tk.expect("=")
        self.tk.expect("[")
        entries = []
        while self.tk.peek()[0] != "]":
            h = self.tk.ident("handle")
            if not re.fullmatch(r"w\d+", h[0]):
                raise ParseError(f"handle expected, found {h[0]!r}", h[1], h[2])
            if any(k.name == h[0] for k, _ in entries):
                raise ParseError(f"duplicate handle {h[0]!r}", h[1], h[2])
            self.tk.expect("->")
            pos = self.tk.peek()
            u = self._term(set())
            if not T.is_valid(u):
                raise ParseError("frame payloads must be valid terms", pos[1], pos[2])
            entries.append((T.handle(h[0]), u))
            if self.tk.peek()[0] == ";":
                self.tk.next()
            elif self.tk.peek()[0] != "]":
                p = self.tk.peek()
                raise ParseError(f"expected ';' or ']', found {p[0]!r}", p[1], p[2])
        self.tk.expect("]")
        self.tk.expect(".")
        self.pf.frames[t[0]] = Frame(tuple(entries))

    def _let(self):
        t = self.tk.ident("process name")
        if t[0] in self.pf.defs:
            raise ParseError(f"process {t[0]!r} already defined", t[1], t[2])
        params = []
        if self.tk.peek()[0] == "(":
            self.tk.next()
            while self.tk.peek()[0] != ")":
                v = self.tk.ident("parameter")
                params.append(T.var(v[0]))
                if self.tk.peek()[0] == ",":
                    self.tk.next()
            self.tk.expect(")")
        self.tk.expect("=")
        self._chan = None
        body = self._body({p.name for p in params})
        self.tk.expect(".")
        self.pf.defs[t[0]] = Definition(t[0], tuple(params), body)

    def _channel(self):
        t = self.tk.ident("channel")
        if self._chan is None:
            self._chan = t[0]
        elif self._chan != t[0]:
            raise ParseError(f"a basic process uses one channel, {t[0]!r} differs from {self._chan!r}", t[1], t[2])
        return t[0]

    def _body(self, scope):
        t = self.tk.peek()
        if t[0] == "(":
            self.tk.next()
            p = self._body(scope)
            self.tk.expect(")")
            return p
        if t[0] == "0":
            self.tk.next()
            return NIL
        if t[0] in ("in", "out"):
            self.tk.next()
            self.tk.expect("(")
            ch = self._channel()
            self.tk.expect(",")
            if t[0] == "in":
                x = self.tk.ident("variable")
                self.tk.expect(")")
                inner = scope | {x[0]}
                return In(ch, T.var(x[0]), self._cont(inner))
            u = self._term(scope)
            self.tk.expect(")")
            return Out(ch, u, self._cont(scope))
        if t[0] == "if":
            self.tk.next()
            u = self._term(scope)
            self.tk.expect("=")
            v = self._term(scope)
            self.tk.expect("then")
            then = self._body(scope)
            other = NIL
            if self.tk.peek()[0] == "else":
                self.tk.next()
                other = self._body(scope)
            return If(u, v, then, other)
        raise ParseError(f"process expected, found {t[0]!r}", t[1], t[2])

    def _cont(self, scope):
        if self.tk.peek()[0] == ";":
            self.tk.next()
            return self._body(scope)
        return NIL

    def _calls(self):
        self.tk.expect("{")
        calls = []
        chans = {}
        while True:
            t = self.tk.ident("process name")
            d = self.pf.defs.get(t[0])
            if d is None:
                raise ParseError(f"undefined process {t[0]!r}", t[1], t[2])
            args = []
            if self.tk.peek()[0] == "(":
                self.tk.next()
                while self.tk.peek()[0] != ")":
                    args.append(self._term(set()))
                    if self.tk.peek()[0] == ",":
                        self.tk.next()
                self.tk.expect(")")
            if len(args) != len(d.params):
                raise ParseError(f"{t[0]} expects {len(d.params)} arguments, got {len(args)}", t[1], t[2])
            ch = channel(d.body)
            if ch is not None:
                if ch in chans:
                    raise ParseError(f"channel {ch!r} is used by {chans[ch]} and {t[0]}", t[1], t[2])
                chans[ch] = t[0]
            calls.append(Call(t[0], tuple(args)))
            if self.tk.peek()[0] != "|":
                break
            self.tk.next()
        self.tk.expect("}")
        f = self.tk.ident("frame name")
        if f[0] not in self.pf.frames:
            raise ParseError(f"undefined frame {f[0]!r}", f[1], f[2])
        return tuple(calls), f[0]

    def _query(self):
        kw = self.tk.expect("equiv")
        m = self.tk.ident("mode")
        if m[0] not in MODES:
            raise ParseError(f"unknown mode {m[0]!r}", m[1], m[2])
        left, lf = self._calls()
        self.tk.expect("~")
        right, rf = self._calls()
        self.tk.expect(".")
        if len(self.pf.frames[lf]) != len(self.pf.frames[rf]):
            raise ParseError("the two frames of a query must have the same handles", kw[1], kw[2])
        self.pf.queries.append(Query(m[0], left, lf, right, rf, line=kw[1]))


def parse(source):
    return _Parser(source).run()


def print_body(p):
    t = type(p)
    if t is Null:
        return "0"
    if t is In:
        return f"in({p.ch}, {p.x}); {print_body(p.cont)}"
    if t is Out:
        return f"out({p.ch}, {p.u}); {print_body(p.cont)}"
    return f"if {p.u} = {p.v} then ({print_body(p.then)}) else ({print_body(p.else_)})"


def print_file(pf):
    out = []
    if pf.consts:
        out.append(f"consts {', '.join(pf.consts)}.")
    if pf.names:
        out.append(f"names {', '.join(pf.names)}.")
    for n, fr in pf.frames.items():
        out.append(f"frame {n} = [" + "; ".join(f"{h} -> {u}" for h, u in fr.entries) + "].")
    for d in pf.defs.values():
        params = f"({', '.join(str(v) for v in d.params)})" if d.params else ""
        out.append(f"let {d.name}{params} = {print_body(d.body)}.")
    for q in pf.queries:
        out.append(f"query equiv {q.mode} {q}.")
    return "\n".join(out) + "\n"
