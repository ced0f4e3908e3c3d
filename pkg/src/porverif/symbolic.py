"""Constraint systems, symbolic execution and bounded solution enumeration."""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

from . import terms as T
from .frames import Frame, recipe_classes, universe_atoms, witness_key
from .process import ExtendedProcess, If, In, Null, Out, channel, subst


class Deduce(NamedTuple):
    k: int  # the domain is the first k handles of the frame
    X: T.Term
    x: T.Term

    def __str__(self):
        return f"D{self.k} |- {self.X} : {self.x}"


class Cond(NamedTuple):
    eq: bool
    u: T.Term
    v: T.Term

    def __str__(self):
        return f"{self.u} {'=' if self.eq else '!='} {self.v}"


def Eq(u, v):
    return Cond(True, u, v)


def Neq(u, v):
    return Cond(False, u, v)


class ConstraintSystem(NamedTuple):
    frame: Frame = Frame()
    deduce: tuple = ()
    conds: tuple = ()

    def domain(self, X):
        for d in self.deduce:
            if d.X == X:
                return self.frame.handles[: d.k]
        raise KeyError(X)

    def __str__(self):
        parts = [str(self.frame)] + [str(d) for d in self.deduce] + [str(c) for c in self.conds]
        return "; ".join(parts)


def well_formed(cs):
    xs = [d.x for d in cs.deduce]
    Xs = [d.X for d in cs.deduce]
    if len(set(xs)) != len(xs) or len(set(Xs)) != len(Xs):
        return False
    intro = {d.x: d for d in cs.deduce}
    payloads = [p for _, p in cs.frame.entries]
    # x may only depend on variables deduced from a strictly smaller knowledge
    for d in cs.deduce:
        for p in payloads[: d.k]:
            for y in T.collect(p, T.VAR):
                if y not in intro or intro[y].k >= d.k:
                    return False
    bound = set(intro)
    for p in payloads:
        if not T.collect(p, T.VAR) <= bound:
            return False
    for c in cs.conds:
        if not (T.collect(c.u, T.VAR) | T.collect(c.v, T.VAR)) <= bound:
            return False
    return True


class Solution(NamedTuple):
    theta: dict
    lam: dict


def _lambda(cs, theta):
    """First-order assignment induced by theta, or None if some deduction is invalid."""
    lam = {}
    for d in sorted(cs.deduce, key=lambda d: d.k):
        frame = {h: T.apply(lam, p) for h, p in cs.frame.entries[: d.k]}
        v = T.evaluate(T.apply(frame, theta[d.X]))
        if v is None:
            return None
        lam[d.x] = v
    return lam


def is_solution(cs, theta):
    lam = _lambda(cs, theta)
    if lam is None:
        return None
    for _, p in cs.frame.entries:
        if T.evaluate(T.apply(lam, p)) is None:
            return None
    for c in cs.conds:
        a, b = T.evaluate(T.apply(lam, c.u)), T.evaluate(T.apply(lam, c.v))
        ok = a is not None and b is not None and a == b
        if ok != c.eq:
            return None
    return lam


def enumerate_solutions(cs, depth=3, consts=(), all_recipes=False):
    """Solutions with recipes drawn from the bounded universe. By default one
    recipe per class of equal messages is used; all_recipes lists every
    recipe and is only practical on tiny systems."""
    order = sorted(cs.deduce, key=lambda d: d.k)
    out = []

    def rec(i, theta, lam):
        if i == len(order):
            full = is_solution(cs, theta)
            if full is not None:
                out.append(Solution(dict(theta), full))
            return
        d = order[i]
        frame = Frame(tuple((h, T.apply(lam, p)) for h, p in cs.frame.entries[: d.k]))
        atoms = universe_atoms(frame, consts)
        if all_recipes:
            cands = [(r, T.evaluate(T.apply(frame.as_subst(), r))) for r in all_recipes_upto(atoms, depth)]
        else:
            cands = [(r, v) for r, (v,) in recipe_classes([frame], atoms, depth, witness_key)]
        for r, v in cands:
            if v is None:
                continue
            theta[d.X] = r
            lam[d.x] = v
            rec(i + 1, theta, lam)
            del theta[d.X], lam[d.x]

    rec(0, {}, {})
    return out


def all_recipes_upto(atoms, depth):
    from .frames import SYMBOLS

    levels = [list(atoms)]
    seen = list(atoms)
    for _ in range(2, depth + 1):
        new = []
        for f, n in SYMBOLS.items():
            for args in product(seen, repeat=n):
                if any(T.depth(a) == len(levels) for a in args):
                    new.append(T.Term(T.APP, f, tuple(args)))
        levels.append(new)
        seen = seen + new
    return seen


# -- symbolic members ----------------------------------------------------------

class Member(NamedTuple):
    """One extended symbolic process of a pair. Deduction constraints are held
    by the pair; conds are in generation order. stage/focus drive the
    compressed discipline and are unused in reference mode."""
    procs: tuple
    frame: Frame
    conds: tuple = ()
    stage: str = "i+"
    focus: str = None
    checked: tuple = (0, 0, 0)  # verified prefix lengths of (payloads, deductions, conds)

    def system(self, deduce):
        return ConstraintSystem(self.frame, deduce, self.conds)


def _replace(procs, i, p):
    rest = procs[:i] + procs[i + 1:]
    if type(p) is Null:
        return rest
    return tuple(sorted(rest + (p,), key=channel))


def branches(p, conds=()):
    """Symbolic tau closure of one basic process: [(process, new conds)]."""
    if type(p) is not If:
        return [(p, conds)]
    return branches(p.then, conds + (Eq(p.u, p.v),)) + branches(p.else_, conds + (Neq(p.u, p.v),))


def initial_members(a):
    """Members of a quiescent symbolic start state."""
    choices = [branches(p) for p in a.procs]
    out = []
    for combo in product(*choices):
        procs = tuple(sorted((q for q, _ in combo if type(q) is not Null), key=channel))
        conds = tuple(c for _, cs in combo for c in cs)
        out.append(Member(procs, a.frame, conds))
    return out


def _find(procs, ch):
    for i, p in enumerate(procs):
        if channel(p) == ch:
            return i, p
    return None, None


def _continue(m, i, p, frame=None, extra=(), stage=None, focus=None):
    base = m.procs[:i] + m.procs[i + 1:]
    out = []
    for q, conds in branches(p):
        procs = base if type(q) is Null else tuple(sorted(base + (q,), key=channel))
        out.append(m._replace(procs=procs, frame=frame or m.frame, conds=m.conds + extra + conds,
                              stage=stage or m.stage, focus=focus if focus is not None else m.focus))
    return out


def member_labels(m, mode, non_blocking=False):
    """Enabled (kind, channel) labels; outputs are enabled symbolically and
    their validity is left to the constraints."""
    if mode == "reference" or m.stage == "i+":
        out = []
        for p in m.procs:
            if type(p) is In:
                out.append(("in", p.ch))
            elif type(p) is Out and mode == "reference":
                out.append(("out", p.ch))
        return out
    _, p = _find(m.procs, m.focus)
    if m.stage == "i*":
        if type(p) is In:
            return [("in", m.focus)]
        if type(p) is Out:
            return [("out", m.focus)]
        return []
    out = []
    if type(p) is Out:
        out.append(("out", m.focus))
        if non_blocking:
            return out
    out += [("in", channel(q)) for q in m.procs if type(q) is In]
    return out


def member_step(m, act, mode, non_blocking=False):
    """Successor members of m by a symbolic action followed by tau closure.
    act is ("in", ch, X, x) or ("out", ch, w)."""
    kind, ch = act[0], act[1]
    if (kind, ch) not in member_labels(m, mode, non_blocking):
        return []
    extra = ()
    if mode != "reference" and m.stage == "o*" and kind == "in":
        _, f = _find(m.procs, m.focus)
        if type(f) is Out:
            extra = (Neq(f.u, f.u),)  # the block stops over a blocked output
    i, p = _find(m.procs, ch)
    if kind == "in":
        stage = "i*" if mode != "reference" else m.stage
        return _continue(m, i, subst(p.cont, {p.x: act[3]}), extra=extra, stage=stage, focus=ch)
    frame = m.frame.extend(p.u, act[2])
    stage = "o*" if mode != "reference" else m.stage
    return _continue(m, i, p.cont, frame=frame, stage=stage, focus=ch)


class SymbolicProcess(NamedTuple):
    procs: tuple
    cs: ConstraintSystem


def symb_step(sp, act):
    """One transition of the symbolic semantics. act is ("in", ch, X, x),
    ("out", ch, w) or ("tau",)."""
    procs, cs = sp
    if act[0] == "tau":
        out = []
        for i, p in enumerate(procs):
            if type(p) is If:
                out.append(SymbolicProcess(_replace(procs, i, p.then), cs._replace(conds=cs.conds + (Eq(p.u, p.v),))))
                out.append(SymbolicProcess(_replace(procs, i, p.else_), cs._replace(conds=cs.conds + (Neq(p.u, p.v),))))
        return out
    i, p = _find(procs, act[1])
    if p is None:
        return []
    if act[0] == "in":
        if type(p) is not In:
            return []
        d = Deduce(len(cs.frame), act[2], act[3])
        return [SymbolicProcess(_replace(procs, i, subst(p.cont, {p.x: act[3]})), cs._replace(deduce=cs.deduce + (d,)))]
    if type(p) is not Out:
        return []
    return [SymbolicProcess(_replace(procs, i, p.cont), cs._replace(frame=cs.frame.extend(p.u, act[2])))]


def symb_compressed_step(sp, blk, non_blocking=False):
    """Run one symbolic block in focus. blk.inputs are (X, x) pairs and
    blk.outputs handles. Returns [(SymbolicProcess, failed)] where failed
    marks an improper block (the whole process collapses)."""
    procs, cs = sp
    if not blk.inputs:
        return [(sp, False)]
    i, p = _find(procs, blk.ch)
    if p is None:
        return []
    states = [(p, cs)]
    for X, x in blk.inputs:
        nxt = []
        for q, c in states:
            for q2, conds in branches(q):
                if type(q2) is not In:
                    continue
                c2 = c._replace(deduce=c.deduce + (Deduce(len(c.frame), X, x),), conds=c.conds + conds)
                nxt.extend((q3, c2._replace(conds=c2.conds + cc)) for q3, cc in branches(subst(q2.cont, {q2.x: x})))
        states = nxt
    out = []
    if not blk.proper:
        for q, c in states:
            if type(q) is Null:
                out.append((SymbolicProcess((), c), True))
            elif type(q) is Out and not non_blocking:
                out.append((SymbolicProcess((), c._replace(conds=c.conds + (Neq(q.u, q.u),))), True))
        return out
    for w in blk.outputs:
        nxt = []
        for q, c in states:
            if type(q) is Out:
                c2 = c._replace(frame=c.frame.extend(q.u, w))
                nxt.extend((q2, c2._replace(conds=c2.conds + cc)) for q2, cc in branches(q.cont))
        states = nxt
    for q, c in states:
        if type(q) in (Null, In):
            out.append((SymbolicProcess(_replace(procs, i, q), c), False))
        elif type(q) is Out and not non_blocking:
            out.append((SymbolicProcess(_replace(procs, i, q), c._replace(conds=c.conds + (Neq(q.u, q.u),))), False))
    return out
