"""Solving constraint systems by narrowing recipe skeletons.

A region describes a set of second-order solutions shared by all members of
a pair: every deduction variable is either bound to a skeleton (a recipe
whose leaves may be further variables) or open. An open variable ranges over
the bounded recipes of its domain. Exclusions forbid open variables from
producing messages that unify with a pattern; they record the failing side
of each case split."""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import NamedTuple

from . import terms as T
from .frames import Frame, SYMBOLS, recipe_classes, witness_key
from .terms import APP, CONSTRUCTORS, DESTRUCTORS, HANDLE, NAME, RVAR, VAR

_fresh = itertools.count()


class Pending(Exception):
    """Raised when a value depends on how open variables are refined."""

    def __init__(self, sigma):
        super().__init__()
        self.sigma = sigma


def is_solver_var(t):
    return t.kind == VAR and t.name[0] in "@?"


def leaf_var(name):
    return T.Term(VAR, "@" + name)


def _ex():
    return T.Term(VAR, f"?{next(_fresh)}")


def _rule(f):
    a, b, k = _ex(), _ex(), _ex()
    if f == "fst":
        return [T.app("pair", a, b)], a
    if f == "snd":
        return [T.app("pair", a, b)], b
    if f == "adec":
        return [T.app("aenc", a, T.app("pk", k)), k], a
    if f == "dec":
        return [T.app("enc", a, k), k], a
    return [T.app("sign", a, k), T.app("vk", k)], a


def sym_rewrite(f, args):
    r = T.rewrite_root(f, args)
    if r is not None:
        return r
    if all(T.is_ground(a) for a in args):
        return None
    pats, rhs = _rule(f)
    s = T.unify_all(zip(args, pats))
    if s is None:
        return None
    at = {v: t for v, t in s.items() if v.name[0] == "@"}
    if not at:
        return T.apply(s, rhs)
    raise Pending(at)


def canon(eqs):
    """Canonical text of a set of leaf equations, or None if unsatisfiable."""
    s = T.unify_all(eqs)
    if s is None:
        return None
    at = sorted((v.name, t) for v, t in s.items() if v.name[0] == "@")
    ren = {}
    for _, t in at:
        for x in T.subterms(t):
            if x.kind == VAR and x.name[0] == "?" and x not in ren:
                ren[x] = T.Term(VAR, f"?{len(ren)}")
    return ";".join(f"{n}={T.apply(ren, t)}" for n, t in at)


class Leaf(NamedTuple):
    k: int  # domain size
    b: int  # depth budget
    noncomp: bool = False  # only atoms or destructor applications


class Exclusion(NamedTuple):
    frame: Frame
    eqs: tuple
    key: str


class Region:
    __slots__ = ("skel", "info", "excl", "sample", "_open")

    def __init__(self, skel=None, info=None, excl=(), sample=None):
        self.skel = skel or {}
        self.info = info or {}
        self.excl = excl
        self.sample = sample
        self._open = None

    def copy(self, **kw):
        r = Region(kw.get("skel", self.skel), kw.get("info", self.info), kw.get("excl", self.excl), kw.get("sample"))
        return r

    def declare(self, name, leaf):
        info = dict(self.info)
        info[name] = leaf
        return self.copy(info=info)

    def bind(self, name, recipe, leaves=()):
        skel = dict(self.skel)
        skel[name] = recipe
        info = self.info
        if leaves:
            info = dict(info)
            info.update(leaves)
        return self.copy(skel=skel, info=info)

    def open_vars(self):
        if self._open is None:
            self._open = sorted((v for v in self.info if v not in self.skel), key=lambda v: (self.info[v].k, _vkey(v)))
        return self._open

    def resolve(self, t):
        if t.kind == RVAR:
            s = self.skel.get(t.name)
            return self.resolve(s) if s is not None else t
        if not t.args:
            return t
        return T.Term(APP, t.name, tuple(self.resolve(a) for a in t.args))

    def partial_solution(self, names):
        out = {}
        for n in names:
            r = self.resolve(T.rvar(n))
            if not T.collect(r, RVAR):
                out[n] = r
        return out

    def excluded(self, frame, key):
        return any(e.key == key and e.frame == frame for e in self.excl)


def _vkey(v):
    head = v.rstrip("0123456789")
    return (head, int(v[len(head):]) if v[len(head):] else 0)


def fresh_leaf():
    return f"L{next(_fresh)}"


class Evaluator:
    """Messages of terms and recipes on one member frame under a region."""

    def __init__(self, region, frame, xmap, assign=None):
        self.r = region
        self.payload = dict(frame.entries)
        self.xmap = xmap
        self.assign = assign or {}
        self.memo = {}

    def ev(self, t):
        r = self.memo.get(t, self)
        if r is not self:
            return r
        k = t.kind
        if k == NAME:
            r = t
        elif k == HANDLE:
            r = self.ev(self.payload[t])
        elif k == VAR:
            if t.name[0] in "@?":
                r = t
            else:
                r = self.ev(T.Term(RVAR, self.xmap[t]))
        elif k == RVAR:
            s = self.r.skel.get(t.name)
            if s is None:
                s = self.assign.get(t.name)
            r = self.ev(s) if s is not None else leaf_var(t.name)
        else:
            args = []
            for a in t.args:
                v = self.ev(a)
                if v is None:
                    self.memo[t] = None
                    return None
                args.append(v)
            if t.name in DESTRUCTORS:
                r = sym_rewrite(t.name, tuple(args))
            else:
                r = T.Term(APP, t.name, tuple(args))
        self.memo[t] = r
        return r


# -- bounded recipe search on concrete knowledge -------------------------------

@lru_cache(maxsize=50_000)
def _classes(values, consts, depth):
    frame = Frame(values)
    atoms = list(frame.handles) + list(consts)
    return tuple(recipe_classes([frame], atoms, depth, witness_key))


@lru_cache(maxsize=100_000)
def find_recipe(values, consts, target, b):
    """Smallest recipe of depth <= b producing target on the given knowledge."""
    if b <= 0:
        return None
    lower = _classes(values, consts, b - 1) if b > 1 else ()
    table = {}
    for r, (v,) in lower:
        if v is not None and v not in table:
            table[v] = r
    if target in table:
        return table[target]
    cands = []
    if b == 1:
        cands = [h for h, v in values if v == target] + [c for c in consts if c == target]
        return min(cands, key=witness_key) if cands else None
    if target.kind == APP and target.name in CONSTRUCTORS:
        args = [table.get(a) for a in target.args]
        if all(a is not None for a in args):
            cands.append(T.Term(APP, target.name, tuple(args)))
    for r, (v,) in lower:
        if v is None or v.kind != APP or not v.args:
            continue
        f = v.name
        if f == "pair":
            if v.args[0] == target:
                cands.append(T.app("fst", r))
            if v.args[1] == target:
                cands.append(T.app("snd", r))
        elif len(v.args) == 2 and v.args[0] == target:
            key = v.args[1]
            if f == "aenc" and key.kind == APP and key.name == "pk" and key.args[0] in table:
                cands.append(T.app("adec", r, table[key.args[0]]))
            elif f == "enc" and key in table:
                cands.append(T.app("dec", r, table[key]))
            elif f == "sign" and T.app("vk", key) in table:
                cands.append(T.app("check", r, table[T.app("vk", key)]))
    return min(cands, key=witness_key) if cands else None


@lru_cache(maxsize=50_000)
def candidate_levels(values, consts, depth):
    """Class representatives valid on every frame, grouped by depth level.
    values is a tuple (one per frame) of tuples of (handle, message)."""
    frames = [Frame(v) for v in values]
    atoms = list(frames[0].handles) + list(consts)
    classes = recipe_classes(frames, atoms, depth, witness_key)
    levels = [[] for _ in range(depth)]
    for r, vals in classes:
        if any(v is None for v in vals):
            continue
        levels[T.depth(r) - 1].append((r, vals))
    return tuple(tuple(sorted(l, key=lambda c: witness_key(c[0]))) for l in levels)


def iter_candidates(values, consts, leaf):
    for d in range(1, leaf.b + 1):
        for lvl in candidate_levels(values, consts, d)[d - 1:d]:
            for r, vals in lvl:
                if leaf.noncomp and r.kind == APP and r.name in CONSTRUCTORS:
                    continue
                yield r, vals


class Context:
    """Settings shared by one exploration."""

    def __init__(self, consts=(), depth=3, non_blocking=False):
        self.consts = tuple(T.const(c) if isinstance(c, str) else c for c in consts)
        self.depth = depth
        self.non_blocking = non_blocking
        self.splits = 0


# -- narrowing ----------------------------------------------------------------

def _ground_values(ev, k):
    vals = []
    for h in list(ev.payload)[:k]:
        try:
            v = ev.ev(h)
        except Pending:
            return None
        if v is None or not T.is_ground(v):
            return None
        vals.append((h, v))
    return tuple(vals)


def produce(region, name, p, frame, xmap, ctx):
    """Ways for an open variable to produce a message unifying with p.
    Returns [(region, substitution for the leaf message, extra equations)]."""
    leaf = region.info[name]
    ev = Evaluator(region, frame, xmap)
    me = leaf_var(name)
    if T.is_ground(p) and not T.collect(p, VAR):
        vals = _ground_values(ev, leaf.k)
        if vals is not None:
            r = find_recipe(vals, ctx.consts, p, leaf.b)
            return [] if r is None else [(region.bind(name, r), {me: p}, [])]
    alts = []
    for h in list(ev.payload)[: leaf.k]:
        try:
            m = ev.ev(h)
        except Pending:
            continue
        if m is not None and T.unify(m, p) is not None:
            alts.append((region.bind(name, h), {me: m}, []))
    for c in ctx.consts:
        if T.unify(c, p) is not None:
            alts.append((region.bind(name, c), {me: c}, []))
    if leaf.b < 2:
        return alts
    sub = Leaf(leaf.k, leaf.b - 1)
    if not leaf.noncomp and p.kind == APP and p.name in CONSTRUCTORS:
        names = [fresh_leaf() for _ in p.args]
        skel = T.Term(APP, p.name, tuple(T.rvar(n) for n in names))
        msg = T.Term(APP, p.name, tuple(leaf_var(n) for n in names))
        alts.append((region.bind(name, skel, {n: sub for n in names}), {me: msg}, []))
    arg = Leaf(leaf.k, leaf.b - 1, True)
    for g in ("fst", "snd", "adec", "dec", "check"):
        pats, rhs = _rule(g)
        names = [fresh_leaf() for _ in pats]
        infos = {names[0]: arg, **{n: sub for n in names[1:]}}
        skel = T.app(g, *(T.rvar(n) for n in names))
        extra = [(leaf_var(n), q) for n, q in zip(names, pats)]
        alts.append((region.bind(name, skel, infos), {me: rhs}, extra))
    return alts


def _contained(a, b):
    return a.k <= b.k and a.b <= b.b and (a.noncomp or not b.noncomp)


def merge(region, l, m, frame, xmap, ctx):
    a, b = region.info[l], region.info[m]
    if _contained(b, a):
        return [(region.bind(l, T.rvar(m)), {leaf_var(l): leaf_var(m)}, [])]
    if _contained(a, b):
        return [(region.bind(m, T.rvar(l)), {leaf_var(m): leaf_var(l)}, [])]
    small = l if (a.k, a.b) <= (b.k, b.b) else m
    leaf = region.info[small]
    ev = Evaluator(region, frame, xmap)
    vals = _ground_values(ev, leaf.k)
    if vals is None:
        vals = tuple((h, ev.ev(h)) for h in list(ev.payload)[: leaf.k])
    out = []
    for r, (v,) in iter_candidates((vals,), ctx.consts, leaf):
        out.append((region.bind(small, r), {leaf_var(small): v}, []))
    return out


def realize(region, frame, eqs, xmap, ctx, limit=10_000):
    """Refinements of region under which all equations can hold on frame."""
    s = T.unify_all(eqs)
    if s is None:
        return []
    at = sorted(((v, t) for v, t in s.items() if v.name[0] == "@"), key=lambda vt: _vkey(vt[0].name[1:]))
    if not at:
        return [region]
    v, t = at[0]
    name = v.name[1:]
    if t.kind == VAR and t.name[0] == "@":
        alts = merge(region, name, t.name[1:], frame, xmap, ctx)
    else:
        alts = produce(region, name, t, frame, xmap, ctx)
    base = list(s.items())
    out = []
    for r2, sub, extra in alts:
        new = [(T.apply(sub, a), T.apply(sub, b)) for a, b in base] + list(extra)
        out.extend(realize(r2, frame, new, xmap, ctx, limit))
        if len(out) > limit:
            raise RuntimeError("narrowing produced too many alternatives")
    return out


def recheck(region, xmap):
    """Update exclusions after a refinement; None if one became violated."""
    keep = []
    changed = False
    for ex in region.excl:
        vars_ = {x for a, b in ex.eqs for t in (a, b) for x in T.subterms(t) if x.kind == VAR and x.name[0] == "@"}
        bound = [x for x in vars_ if x.name[1:] in region.skel]
        if not bound:
            keep.append(ex)
            continue
        ev = Evaluator(region, ex.frame, xmap)
        try:
            sub = {}
            for x in bound:
                m = ev.ev(T.rvar(x.name[1:]))
                if m is None:
                    raise Pending({})
                sub[x] = m
        except Pending:
            keep.append(ex)
            continue
        eqs = tuple((T.apply(sub, a), T.apply(sub, b)) for a, b in ex.eqs)
        s = T.unify_all(eqs)
        changed = True
        if s is None:
            continue
        if not any(v.name[0] == "@" for v in s):
            return None
        keep.append(Exclusion(ex.frame, eqs, canon(eqs)))
    if not changed:
        return region
    return region.copy(skel=region.skel, info=region.info, excl=tuple(keep))


# -- samples -------------------------------------------------------------------

def _excl_vars(ex):
    return {x.name[1:] for a, b in ex.eqs for t in (a, b) for x in T.subterms(t) if x.kind == VAR and x.name[0] == "@"}


def _excl_ok(region, ex, xmap, assign):
    """True/False once decidable under assign, None while still open."""
    ev = Evaluator(region, ex.frame, xmap, assign)
    sub = {}
    for n in _excl_vars(ex):
        try:
            m = ev.ev(T.rvar(n))
        except Pending:
            return None
        if m is None or T.collect(m, VAR):
            return None
        sub[leaf_var(n)] = m
    eqs = [(T.apply(sub, a), T.apply(sub, b)) for a, b in ex.eqs]
    if any(x.kind == VAR and x.name[0] == "@" for a, b in eqs for t in (a, b) for x in T.subterms(t)):
        return None
    return T.unify_all(eqs) is None


def _values(region, frame, xmap, assign, k):
    ev = Evaluator(region, frame, xmap, assign)
    vals = []
    for h in list(ev.payload)[:k]:
        try:
            v = ev.ev(h)
        except Pending:
            return None
        if v is None or T.collect(v, VAR):
            return None
        vals.append((h, v))
    return tuple(vals)


def find_sample(region, frames, xmap, ctx, fixed=None, order=None, budget=20_000):
    """A closed assignment of every open variable satisfying all exclusions,
    or None. fixed pins some variables; order lists variables whose
    candidates are tried exhaustively first."""
    opens = [v for v in region.open_vars() if not fixed or v not in fixed]
    frames = list(dict.fromkeys(list(frames) + [e.frame for e in region.excl]))
    if not frames:
        frames = [Frame()]
    involved = set().union(*(_excl_vars(e) for e in region.excl)) if region.excl else set()
    assign = dict(fixed or {})
    steps = [0]

    def ok_so_far():
        for ex in region.excl:
            r = _excl_ok(region, ex, xmap, assign)
            if r is False:
                return False
        return True

    def rec(i, exhaustive):
        if i == len(opens):
            return all(_excl_ok(region, ex, xmap, assign) is not False for ex in region.excl)
        v = opens[i]
        leaf = region.info[v]
        vals = []
        for f in frames:
            fv = _values(region, f, xmap, assign, leaf.k)
            if fv is None:
                return False
            vals.append(fv)
        vals = tuple(vals)
        full = exhaustive or v in involved
        for r, _ in iter_candidates(vals, ctx.consts, leaf):
            steps[0] += 1
            if steps[0] > budget:
                return False
            assign[v] = r
            if ok_so_far() and rec(i + 1, exhaustive):
                return True
            del assign[v]
            if not full:
                break
        return False

    if rec(0, False):
        return assign
    steps[0] = 0
    assign = dict(fixed or {})
    if region.excl and rec(0, True):
        return assign
    return None


def close(region, assign):
    """Region with every open variable bound as in assign."""
    skel = dict(region.skel)
    skel.update(assign)
    return Region(skel, region.info, (), None)


# -- simplification of pairs ---------------------------------------------------

def _items(m, deduce):
    p0, d0, c0 = m.checked
    out = [("pay", t) for _, t in m.frame.entries[p0:]]
    out += [("ded", d.X) for d in deduce[d0:]]
    out += [("cond", c) for c in m.conds[c0:]]
    return out


def _eval_item(ev, item):
    kind, x = item
    if kind == "pay":
        return ev.ev(x) is not None
    if kind == "ded":
        return ev.ev(x) is not None
    a, b = ev.ev(x.u), ev.ev(x.v)
    if a is None or b is None:
        return not x.eq
    if a == b:
        return x.eq
    s = T.unify(a, b)
    if s is None:
        return not x.eq
    raise Pending({v: t for v, t in s.items() if v.name[0] == "@"})


def _failed(item):
    return item[0] == "cond" and not item[1].eq


def simplify(left, right, deduce, region, ctx):
    """Split a pair into branches in which every member's constraints are
    uniformly true or uniformly false. Returns [(left, right, region)] with
    only the surviving members; every returned region has a sample."""
    xmap = {d.x: d.X.name for d in deduce}
    members = [("L", m) for m in left] + [("R", m) for m in right]
    item_lists = [_items(m, deduce) for _, m in members]
    work = [(region, {})]
    results = []
    while work:
        reg, dec = work.pop()
        evs = {}
        pend = None
        for mi, (_, m) in enumerate(members):
            if dec.get((mi, -1)) is False:
                continue
            ev = evs.get(m.frame)
            if ev is None:
                ev = evs[m.frame] = Evaluator(reg, m.frame, xmap)
            for ii, item in enumerate(item_lists[mi]):
                v = dec.get((mi, ii))
                if v is None:
                    try:
                        v = _eval_item(ev, item)
                    except Pending as p:
                        pend = (mi, ii, item, p.sigma, m.frame)
                        break
                    dec[(mi, ii)] = v
                if v is False:
                    dec[(mi, -1)] = False
                    break
            if pend:
                break
        if pend:
            mi, ii, item, sigma, frame = pend
            ctx.splits += 1
            eqs = tuple(sigma.items())
            key = canon(eqs)
            fail = _failed(item)
            if reg.excluded(frame, key):
                d2 = dict(dec)
                d2[(mi, ii)] = fail
                work.append((reg, d2))
                continue
            rb = reg.copy(excl=reg.excl + (Exclusion(frame, eqs, key),))
            d2 = dict(dec)
            d2[(mi, ii)] = fail
            work.append((rb, d2))
            for ra in reversed(realize(reg, frame, list(eqs), xmap, ctx)):
                ra = recheck(ra, xmap)
                if ra is not None:
                    work.append((ra, dict(dec)))
            continue
        alive = [(side, m) for mi, (side, m) in enumerate(members) if dec.get((mi, -1)) is not False]
        sample = find_sample(reg, [m.frame for _, m in alive] or [m.frame for _, m in members], xmap, ctx)
        if sample is None:
            continue
        reg.sample = sample
        done = lambda m: m._replace(checked=(len(m.frame), len(deduce), len(m.conds)))
        results.append((tuple(done(m) for s, m in alive if s == "L"), tuple(done(m) for s, m in alive if s == "R"), reg))
    return results


def partial_solution(region, deduce):
    return region.partial_solution([d.X.name for d in deduce])


def sample_solution(region, deduce, frames, ctx):
    """One closed solution: the recipes of the deduction variables."""
    xmap = {d.x: d.X.name for d in deduce}
    assign = region.sample if region.sample is not None else find_sample(region, frames, xmap, ctx)
    if assign is None:
        raise ValueError("the region has no solution")
    closed = close(region, assign)
    return {d.X.name: closed.resolve(d.X) for d in deduce}
