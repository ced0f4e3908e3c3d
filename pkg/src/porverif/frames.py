"""Frames, deducibility and static equivalence."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from . import terms as T
from .terms import APP, HANDLE, CONSTRUCTORS, DESTRUCTORS

SYMBOLS = {**CONSTRUCTORS, **DESTRUCTORS}


@dataclass(frozen=True)
class Frame:
    entries: tuple = ()  # ((handle, payload), ...)

    @staticmethod
    def of(*payloads, start=0):
        return Frame(tuple((T.handle(start + i), p) for i, p in enumerate(payloads)))

    def __len__(self):
        return len(self.entries)

    @property
    def handles(self):
        return tuple(h for h, _ in self.entries)

    def payload(self, h):
        for k, v in self.entries:
            if k == h:
                return v
        raise KeyError(f"unknown handle {h}")

    def as_subst(self):
        return dict(self.entries)

    def fresh_handle(self):
        used = [int(h.name[1:]) for h, _ in self.entries if h.name[1:].isdigit()]
        return T.handle(max(used) + 1 if used else 0)

    def extend(self, payload, h=None):
        h = h or self.fresh_handle()
        return Frame(self.entries + ((h, payload),))

    def prefix(self, k):
        return Frame(self.entries[:k])

    def __str__(self):
        return "[" + "; ".join(f"{h} -> {p}" for h, p in self.entries) + "]"


def evaluate(frame, m):
    """Normal form of m applied to frame, or None if the computation is invalid."""
    s = frame.as_subst()
    for h in T.collect(m, HANDLE):
        if h not in s:
            raise ValueError(f"recipe {m} uses unknown handle {h}")
    return T.evaluate(T.apply(s, m))


# -- bounded recipe universe ---------------------------------------------------

def recipe_key(r):
    return (T.size(r), str(r))


def witness_key(r):
    return (len({s for s in T.subterms(r) if not s.args}), T.size(r), str(r))


def recipe_classes(frames, atoms, depth, key=recipe_key):
    """Representatives of the recipes of depth <= depth over atoms, grouped by
    their values on every frame. Returns [(recipe, values)] where values is a
    tuple with one normal form (or None) per frame; classes invalid on all
    frames are dropped."""
    frames = tuple(frames)
    subs = [f.as_subst() for f in frames]
    best = {}
    order = []

    def offer(r, vals, level):
        if all(v is None for v in vals):
            return
        cur = best.get(vals)
        if cur is None:
            best[vals] = [r, level]
            order.append(vals)
        elif cur[1] == level and key(r) < key(cur[0]):
            cur[0] = r

    for a in atoms:
        vals = tuple(T.evaluate(T.apply(s, a)) for s in subs)
        offer(a, vals, 1)
    for level in range(2, depth + 1):
        prev = [(best[v][0], v) for v in order]
        older = {v for v in order if best[v][1] < level - 1}
        for f, n in SYMBOLS.items():
            for combo in product(prev, repeat=n):
                if all(v in older for _, v in combo):
                    continue
                vals = []
                for i in range(len(frames)):
                    args = tuple(c[1][i] for c in combo)
                    if any(a is None for a in args):
                        vals.append(None)
                    elif f in DESTRUCTORS:
                        vals.append(T.rewrite_root(f, args))
                    else:
                        vals.append(T.Term(APP, f, args))
                offer(T.Term(APP, f, tuple(c[0] for c in combo)), tuple(vals), level)
    return [(best[v][0], v) for v in order]


def universe_atoms(frame, consts=()):
    return list(frame.handles) + [T.const(c) if isinstance(c, str) else c for c in consts]


def deducible_bounded(frame, target, depth, consts=()):
    hits = [r for r, (v,) in recipe_classes([frame], universe_atoms(frame, consts), depth) if v == target]
    return min(hits, key=recipe_key) if hits else None


# -- saturation ----------------------------------------------------------------

class Saturation:
    """Knowledge base of a frame closed under analysis, with recipes."""

    def __init__(self, frame, consts=()):
        self.frame = frame
        self.consts = {T.const(c) if isinstance(c, str) else c for c in consts}
        self.known = {}  # term -> best recipe
        self.entries = []  # (recipe, term) in insertion order
        self.aliases = []  # (recipe, recipe) reaching the same term
        for h, t in frame.entries:
            self._add(h, t)
        self._close()

    def _add(self, r, t):
        old = self.known.get(t)
        if old is not None:
            self.aliases.append((old, r))
            return False
        self.known[t] = r
        self.entries.append((r, t))
        return True

    def compose(self, t, memo=None):
        """Recipe building t from known terms by constructors only."""
        r = self.known.get(t)
        if r is not None:
            return r
        if t.kind == APP and t.name in CONSTRUCTORS:
            args = []
            for a in t.args:
                ra = self.compose(a)
                if ra is None:
                    return None
                args.append(ra)
            return T.Term(APP, t.name, tuple(args))
        if t.kind == APP and not t.args:
            return t  # public constant
        return None

    def _close(self):
        done = set()
        changed = True
        while changed:
            changed = False
            for r, t in list(self.entries):
                if t.kind != APP:
                    continue
                f = t.name
                new = []
                if f == "pair":
                    if (r, "p") not in done:
                        done.add((r, "p"))
                        new += [(T.app("fst", r), t.args[0]), (T.app("snd", r), t.args[1])]
                elif f == "aenc" and t.args[1].kind == APP and t.args[1].name == "pk":
                    k = self.compose(t.args[1].args[0])
                    if k is not None and (r, "d") not in done:
                        done.add((r, "d"))
                        new.append((T.app("adec", r, k), t.args[0]))
                elif f == "enc":
                    k = self.compose(t.args[1])
                    if k is not None and (r, "d") not in done:
                        done.add((r, "d"))
                        new.append((T.app("dec", r, k), t.args[0]))
                elif f == "sign":
                    k = self.compose(T.app("vk", t.args[1]))
                    if k is not None and (r, "d") not in done:
                        done.add((r, "d"))
                        new.append((T.app("check", r, k), t.args[0]))
                for nr, nt in new:
                    self._add(nr, nt)
                    changed = True

    def tests(self):
        """Recipes that must stay valid and recipe pairs that must stay equal."""
        valid = [r for r, _ in self.entries] + [b for _, b in self.aliases]
        equal = list(self.aliases)
        for r, t in self.entries:
            if t.kind == APP:
                if not t.args:
                    equal.append((t, r))
                elif t.name in CONSTRUCTORS:
                    c = self.compose_args(t)
                    if c is not None:
                        equal.append((c, r))
        return valid, equal

    def compose_args(self, t):
        args = [self.compose(a) for a in t.args]
        if any(a is None for a in args):
            return None
        return T.Term(APP, t.name, tuple(args))


def deducible(frame, target, depth=None, consts=()):
    """A recipe for target. Uses saturation, or bounded enumeration if depth is given."""
    if depth is not None:
        return deducible_bounded(frame, target, depth, consts)
    return Saturation(frame, consts).compose(target)


@dataclass(frozen=True)
class StaticVerdict:
    equivalent: bool
    m: object = None
    n: object = None

    def __bool__(self):
        return self.equivalent

    def __str__(self):
        if self.equivalent:
            return "equivalent"
        return f"witness ({self.m}, {self.n})" if self.n is not None else f"witness ({self.m})"


def _check_domains(f1, f2):
    if set(f1.handles) != set(f2.handles):
        raise ValueError("frames have different domains")


def _violations(sat, other):
    valid, equal = sat.tests()
    out = []
    for r in valid:
        if evaluate(other, r) is None:
            out.append((r, None))
    for a, b in equal:
        va, vb = evaluate(other, a), evaluate(other, b)
        if va is None or vb is None or va != vb:
            out.append((a, b))
    return out


def _wkey(w):
    m, n = w
    return (T.size(m) + (T.size(n) if n is not None else 0), str(m), str(n))


@lru_cache(maxsize=200_000)
def _static_equiv(f1, f2, consts):
    # tests read off the left frame take precedence
    bad = _violations(Saturation(f1, consts), f2) or _violations(Saturation(f2, consts), f1)
    if not bad:
        return StaticVerdict(True)
    m, n = min(bad, key=_wkey)
    return StaticVerdict(False, m, n)


def static_equiv(f1, f2, consts=()):
    _check_domains(f1, f2)
    return _static_equiv(f1, f2, tuple(consts))


def static_equiv_oracle(f1, f2, depth=3, consts=()):
    """Bounded enumeration of all recipe tests up to depth."""
    _check_domains(f1, f2)
    classes = recipe_classes([f1, f2], universe_atoms(f1, consts), depth)
    bad = []
    by_left, by_right = {}, {}
    for r, (a, b) in classes:
        if (a is None) != (b is None):
            bad.append((r, None))
            continue
        by_left.setdefault(a, []).append((r, b))
        by_right.setdefault(b, []).append((r, a))
    for groups in (by_left, by_right):
        for members in groups.values():
            first = members[0]
            for other in members[1:]:
                if other[1] != first[1]:
                    bad.append(tuple(sorted((first[0], other[0]), key=recipe_key)))
    if not bad:
        return StaticVerdict(True)
    m, n = min(bad, key=_wkey)
    return StaticVerdict(False, m, n)


def witness_holds(f1, f2, verdict):
    """Check a witness by direct evaluation on both frames."""
    m, n = verdict.m, verdict.n
    if n is None:
        return (evaluate(f1, m) is None) != (evaluate(f2, m) is None)
    a1, b1, a2, b2 = evaluate(f1, m), evaluate(f1, n), evaluate(f2, m), evaluate(f2, n)
    e1 = a1 is not None and b1 is not None and a1 == b1
    e2 = a2 is not None and b2 is not None and a2 == b2
    return e1 != e2
