"""Brute-force oracles for solver regions, written against the bounded
recipe universe rather than the solver's own search."""

from __future__ import annotations

from porverif import terms as T
from porverif.frames import Frame, recipe_classes, witness_key
from porverif.symbolic import ConstraintSystem, _lambda, is_solution


def _leaves(region, deduce):
    seen = {}
    for d in deduce:
        for x in T.subterms(region.resolve(d.X)):
            if x.kind == T.RVAR:
                seen[x.name] = region.info[x.name]
    return sorted(seen, key=lambda n: (seen[n].k, n))


def _frame_values(frame, deduce, theta, k):
    """Concrete values of the first k entries of frame under theta, or None."""
    lam = {}
    for d in sorted(deduce, key=lambda d: d.k):
        if d.k >= k or d.X not in theta:
            continue
        sub = {h: T.apply(lam, p) for h, p in frame.entries[: d.k]}
        v = T.evaluate(T.apply(sub, theta[d.X]))
        if v is None:
            return None
        lam[d.x] = v
    out = []
    for h, p in frame.entries[:k]:
        v = T.evaluate(T.apply(lam, p))
        if v is None:
            return None
        out.append((h, v))
    return Frame(tuple(out))


def _theta(region, deduce, assign):
    sub = {T.rvar(n): r for n, r in assign.items()}

    def res(t):
        return T.apply(sub, region.resolve(t))

    return {d.X: res(d.X) for d in deduce if not T.collect(res(d.X), T.RVAR)}


def exclusions_hold(region, deduce, theta, assign):
    for ex in region.excl:
        lam = _lambda(ConstraintSystem(ex.frame, deduce, ()), theta)
        sub = {}
        undecided = False
        names = {x.name[1:] for a, b in ex.eqs for t in (a, b) for x in T.subterms(t) if x.kind == T.VAR and x.name[0] == "@"}
        for n in names:
            r = T.apply({T.rvar(m): v for m, v in assign.items()}, region.resolve(T.rvar(n)))
            if lam is None or T.collect(r, T.RVAR):
                undecided = True
                break
            fr = {h: T.apply(lam, p) for h, p in ex.frame.entries}
            m = T.evaluate(T.apply(fr, r))
            if m is None:
                undecided = True
                break
            sub[T.Term(T.VAR, "@" + n)] = m
        if undecided:
            continue
        eqs = [(T.apply(sub, a), T.apply(sub, b)) for a, b in ex.eqs]
        if T.unify_all(eqs) is not None:
            return False
    return True


def sol_plus(region, member, deduce, consts, limit=20_000):
    """Bounded Sol+ of one member: closed assignments of the open leaves,
    one recipe per class of equal messages on the member frame and the
    exclusion frames. Returns [(theta, lam)]."""
    consts = tuple(T.const(c) if isinstance(c, str) else c for c in consts)
    leaves = _leaves(region, deduce)
    frames = [member.frame] + list(dict.fromkeys(e.frame for e in region.excl if e.frame != member.frame))
    out = []
    count = [0]

    def rec(i, assign):
        if i == len(leaves):
            theta = _theta(region, deduce, assign)
            lam = is_solution(ConstraintSystem(member.frame, deduce, member.conds), theta)
            if lam is not None and exclusions_hold(region, deduce, theta, assign):
                out.append((theta, lam))
            return
        n = leaves[i]
        leaf = region.info[n]
        theta = _theta(region, deduce, assign)
        fs = [_frame_values(f, deduce, theta, leaf.k) for f in frames]
        if fs[0] is None:
            return
        fs = [f if f is not None else Frame(tuple((h, T.const("invalid")) for h in fs[0].handles)) for f in fs]
        atoms = list(fs[0].handles) + list(consts)
        for r, vals in recipe_classes(fs, atoms, leaf.b, witness_key):
            if vals[0] is None:
                continue
            if leaf.noncomp and r.kind == T.APP and r.name in T.CONSTRUCTORS:
                continue
            count[0] += 1
            if count[0] > limit:
                raise OverflowError
            assign[n] = r
            rec(i + 1, assign)
            del assign[n]

    rec(0, {})
    return out


def _match(skel, r, region, assign, handles):
    if skel.kind == T.RVAR:
        leaf = region.info[skel.name]
        if skel.name in assign:
            return assign[skel.name] == r
        if T.depth(r) > leaf.b or not T.collect(r, T.HANDLE) <= set(handles[: leaf.k]):
            return False
        if T.collect(r, T.RVAR) or T.collect(r, T.VAR) or T.collect(r, T.NAME):
            return False
        if leaf.noncomp and r.kind == T.APP and r.name in T.CONSTRUCTORS:
            return False
        assign[skel.name] = r
        return True
    if skel.kind != r.kind or skel.name != r.name or len(skel.args) != len(r.args):
        return False
    return all(_match(a, b, region, assign, handles) for a, b in zip(skel.args, r.args))


def admits(region, deduce, theta, frame):
    """Whether theta fits the skeletons and exclusions of region."""
    assign = {}
    handles = frame.handles
    for d in deduce:
        if not _match(region.resolve(d.X), theta[d.X], region, assign, handles):
            return False
    return exclusions_hold(region, deduce, theta, assign)


def lam_key(lam):
    return tuple(sorted((str(x), str(v)) for x, v in lam.items()))
