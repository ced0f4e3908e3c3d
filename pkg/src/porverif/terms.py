"""Terms over the fixed cryptographic signature, rewriting and unification."""

from __future__ import annotations

NAME, VAR, HANDLE, RVAR, APP = range(5)

CONSTRUCTORS = {"pair": 2, "aenc": 2, "pk": 1, "enc": 2, "hash": 1, "sign": 2, "vk": 1}
DESTRUCTORS = {"fst": 1, "snd": 1, "adec": 2, "dec": 2, "check": 2}


class Term:
    __slots__ = ("kind", "name", "args", "_h", "_s")

    def __init__(self, kind, name, args=()):
        self.kind = kind
        self.name = name
        self.args = args
        self._h = hash((kind, name, args))
        self._s = None

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term) or self._h != other._h:
            return False
        return self.kind == other.kind and self.name == other.name and self.args == other.args

    def __lt__(self, other):
        return sort_key(self) < sort_key(other)

    def __str__(self):
        if self._s is None:
            if self.kind == APP and self.args:
                self._s = f"{self.name}({','.join(str(a) for a in self.args)})"
            else:
                self._s = self.name
        return self._s

    __repr__ = __str__

    @property
    def is_var(self):
        return self.kind == VAR


def name(n):
    return Term(NAME, n)


def var(n):
    return Term(VAR, n)


def handle(i):
    return Term(HANDLE, i if isinstance(i, str) else f"w{i}")


def rvar(n):
    return Term(RVAR, n if isinstance(n, str) else f"X{n}")


def const(c):
    return Term(APP, c)


def app(f, *args):
    arity = CONSTRUCTORS.get(f, DESTRUCTORS.get(f))
    if arity is not None and arity != len(args):
        raise ValueError(f"{f} expects {arity} arguments, got {len(args)}")
    return Term(APP, f, tuple(args))


def is_constant(t):
    return t.kind == APP and not t.args


def size(t):
    return 1 + sum(size(a) for a in t.args)


def depth(t):
    return 1 + max((depth(a) for a in t.args), default=0)


def sort_key(t):
    return (size(t), str(t))


def subterms(t):
    yield t
    for a in t.args:
        yield from subterms(a)


def collect(t, kind):
    return {s for s in subterms(t) if s.kind == kind}


def is_ground(t):
    return all(s.kind not in (VAR, RVAR) for s in subterms(t))


def is_recipe(t):
    return all(s.kind not in (NAME, VAR) for s in subterms(t))


def has_destructor(t):
    return any(s.kind == APP and s.name in DESTRUCTORS for s in subterms(t))


def rewrite_root(f, args):
    """Apply a rule at the root of f(args) when args are in normal form."""
    if f == "fst" or f == "snd":
        a = args[0]
        if a.kind == APP and a.name == "pair":
            return a.args[0] if f == "fst" else a.args[1]
    elif f == "adec":
        c, k = args
        if c.kind == APP and c.name == "aenc":
            key = c.args[1]
            if key.kind == APP and key.name == "pk" and key.args[0] == k:
                return c.args[0]
    elif f == "dec":
        c, k = args
        if c.kind == APP and c.name == "enc" and c.args[1] == k:
            return c.args[0]
    elif f == "check":
        s, v = args
        if s.kind == APP and s.name == "sign" and v.kind == APP and v.name == "vk" and v.args[0] == s.args[1]:
            return s.args[0]
    return None


def normalize(t):
    if not t.args:
        return t
    args = tuple(normalize(a) for a in t.args)
    if t.name in DESTRUCTORS:
        r = rewrite_root(t.name, args)
        if r is not None:
            return r
    if args == t.args:
        return t
    return Term(APP, t.name, args)


def outermost_normalize(t):
    """Rewrite at the outermost redex first; used to cross-check confluence."""
    while True:
        r = _outer_step(t)
        if r is None:
            return t
        t = r


def _outer_step(t):
    if t.kind != APP or not t.args:
        return None
    if t.name in DESTRUCTORS:
        r = _match_rule(t)
        if r is not None:
            return r
    for i, a in enumerate(t.args):
        r = _outer_step(a)
        if r is not None:
            return Term(APP, t.name, t.args[:i] + (r,) + t.args[i + 1:])
    return None


def _match_rule(t):
    # syntactic match on possibly non-normal arguments
    return rewrite_root(t.name, t.args)


def eq_modulo(t1, t2):
    return normalize(t1) == normalize(t2)


def evaluate(t):
    """Normal form of t if every subterm normalises to a constructor term, else None."""
    if not t.args:
        return t
    args = []
    for a in t.args:
        v = evaluate(a)
        if v is None:
            return None
        args.append(v)
    args = tuple(args)
    if t.name in DESTRUCTORS:
        return rewrite_root(t.name, args)
    if args == t.args:
        return t
    return Term(APP, t.name, args)


def is_valid(u):
    return evaluate(u) is not None


def apply(s, t):
    if not s:
        return t
    if t.kind in (VAR, HANDLE, RVAR):
        return s.get(t, t)
    if not t.args:
        return t
    args = tuple(apply(s, a) for a in t.args)
    return t if args == t.args else Term(APP, t.name, args)


def occurs(v, t):
    if t == v:
        return True
    return any(occurs(v, a) for a in t.args)


def _rank(v):
    # existential helpers ("?"-prefixed) are bound before anything else
    return (0 if v.name.startswith("?") else 1, v.name)


def unify(t1, t2, subst=None):
    """Most general unifier as an idempotent dict, or None."""
    s = dict(subst) if subst else {}
    todo = [(t1, t2)]
    while todo:
        a, b = todo.pop()
        a, b = apply(s, a), apply(s, b)
        if a == b:
            continue
        if a.kind == VAR and b.kind == VAR:
            if _rank(a) < _rank(b):
                v, t = a, b
            else:
                v, t = b, a
        elif a.kind == VAR:
            v, t = a, b
        elif b.kind == VAR:
            v, t = b, a
        else:
            if a.kind != b.kind or a.name != b.name or len(a.args) != len(b.args):
                return None
            todo.extend(zip(a.args, b.args))
            continue
        if occurs(v, t):
            return None
        one = {v: t}
        s = {k: apply(one, x) for k, x in s.items()}
        s[v] = t
    return s


def unify_all(pairs, subst=None):
    s = dict(subst) if subst else {}
    for a, b in pairs:
        s = unify(a, b, s)
        if s is None:
            return None
    return s


def parse_term(text, names=(), consts=()):
    """Read canonical text. w<i> are handles, X<i> second-order variables,
    declared names and constants are taken from the arguments, and any other
    bare identifier is a first-order variable."""
    text = text.replace(" ", "")
    pos = 0

    def ident():
        nonlocal pos
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] in "_'@?"):
            pos += 1
        if start == pos:
            raise ValueError(f"identifier expected at {pos} in {text!r}")
        return text[start:pos]

    def term():
        nonlocal pos
        n = ident()
        if pos < len(text) and text[pos] == "(":
            pos += 1
            args = [term()]
            while text[pos] == ",":
                pos += 1
                args.append(term())
            if text[pos] != ")":
                raise ValueError(f"')' expected at {pos} in {text!r}")
            pos += 1
            return app(n, *args)
        if n in names:
            return name(n)
        if n in consts:
            return const(n)
        if n[0] == "w" and n[1:].isdigit():
            return handle(n)
        if n[0] == "X" and n[1:].isdigit():
            return rvar(n)
        return var(n)

    t = term()
    if pos != len(text):
        raise ValueError(f"trailing input at {pos} in {text!r}")
    return t
