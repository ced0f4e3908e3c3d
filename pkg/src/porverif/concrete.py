"""Concrete semantics with a bounded attacker, and the brute-force equivalence oracle."""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

from . import terms as T
from .frames import Frame, evaluate, recipe_classes, universe_atoms, static_equiv, witness_key
from .process import NIL, ExtendedProcess, If, In, Null, Out, channel, subst


class Act(NamedTuple):
    kind: str  # "in" | "out" | "tau"
    ch: str = ""
    arg: object = None  # recipe for inputs, handle for outputs

    def __str__(self):
        if self.kind == "tau":
            return "tau"
        return f"{self.kind}({self.ch},{self.arg})"


TAU = Act("tau")


def trace_text(tr):
    return ".".join(str(a) for a in tr if a.kind != "tau")


def obs(tr):
    return tuple(a for a in tr if a.kind != "tau")


def _replace(procs, i, p):
    rest = procs[:i] + procs[i + 1:]
    if type(p) is Null:
        return rest
    return tuple(sorted(rest + (p,), key=channel))


def tau_move(p):
    """Resolve one conditional at the root of p."""
    a, b = T.evaluate(p.u), T.evaluate(p.v)
    return p.then if a is not None and b is not None and a == b else p.else_


def settle(p):
    while type(p) is If:
        p = tau_move(p)
    return p


def quiescent(a):
    return ExtendedProcess.make([settle(p) for p in a.procs], a.frame)


def find(procs, ch):
    for i, p in enumerate(procs):
        if channel(p) == ch:
            return i, p
    return None, None


def step(a, act):
    """All successors of a by one action (tau is not forced)."""
    procs, frame = a.procs, a.frame
    if act.kind == "tau":
        out = set()
        for i, p in enumerate(procs):
            if type(p) is If:
                out.add(ExtendedProcess(_replace(procs, i, tau_move(p)), frame))
        return out
    i, p = find(procs, act.ch)
    if p is None:
        return set()
    if act.kind == "in":
        if type(p) is not In:
            return set()
        m = evaluate(frame, act.arg)
        if m is None:
            return set()
        return {ExtendedProcess(_replace(procs, i, subst(p.cont, {p.x: m})), frame)}
    if type(p) is not Out:
        return set()
    u = T.evaluate(p.u)
    if u is None:
        return set()
    h = act.arg if act.arg is not None else frame.fresh_handle()
    if h in frame.handles:
        return set()
    return {ExtendedProcess(_replace(procs, i, p.cont), frame.extend(u, h))}


def eager(a, act):
    """Observable step followed by all tau moves; None if act is not enabled."""
    succ = step(a, act)
    if not succ:
        return None
    (b,) = succ
    return quiescent(b)


def replay(a, tr):
    a = quiescent(a)
    for act in obs(tr):
        a = eager(a, act)
        if a is None:
            return None
    return a


def enabled(a):
    """Labels (kind, channel) an attacker may trigger."""
    out = []
    for p in a.procs:
        if type(p) is In:
            out.append(("in", p.ch))
        elif type(p) is Out and T.is_valid(p.u):
            out.append(("out", p.ch))
    return out


def explore(a, depth=3, consts=()):
    """All observable traces of a with inputs drawn from the bounded universe."""
    a = quiescent(a)
    result = set()
    stack = [((), a)]
    cache = {}
    while stack:
        tr, cur = stack.pop()
        result.add((tr, cur.frame))
        labels = enabled(cur)
        if any(k == "in" for k, _ in labels):
            classes = cache.get(cur.frame)
            if classes is None:
                classes = cache[cur.frame] = recipe_classes([cur.frame], universe_atoms(cur.frame, consts), depth,
                                                            witness_key)
        for kind, ch in labels:
            if kind == "out":
                act = Act("out", ch, cur.frame.fresh_handle())
                stack.append((tr + (act,), eager(cur, act)))
            else:
                for r, _ in classes:
                    act = Act("in", ch, r)
                    stack.append((tr + (act,), eager(cur, act)))
    return result


class Verdict(NamedTuple):
    equivalent: bool
    trace: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.equivalent


def product_equiv(a, b, labels, fire, depth, consts):
    """Breadth-first search of the synchronised product of two determinate
    systems. labels(cfg) lists enabled (kind, channel); fire(cfg, act) returns
    the successor or None. The first failing trace in breadth-first order
    with witness-ordered recipes is returned."""
    start = (a, b)
    seen = {start}
    queue = deque([(start, ())])
    class_cache = {}
    found = []
    while queue:
        (x, y), tr = queue.popleft()
        if found and len(tr) > len(found[0][1]):
            break
        fail = _failure(x, y, consts)
        if fail is not None:
            found.append((fail, tr))
            continue
        if found:
            continue
        lab = sorted(set(labels(x)) | set(labels(y)), key=lambda l: (l[1], l[0]))
        classes = None
        for kind, ch in lab:
            if kind == "out":
                h = x.frame.fresh_handle()
                acts = [Act("out", ch, h)]
            else:
                if classes is None:
                    key = (x.frame, y.frame)
                    classes = class_cache.get(key)
                    if classes is None:
                        atoms = universe_atoms(x.frame, consts)
                        classes = recipe_classes([x.frame, y.frame], atoms, depth, witness_key)
                        classes = sorted((r for r, (u, v) in classes if u is not None and v is not None), key=witness_key)
                        class_cache[key] = classes
                acts = [Act("in", ch, r) for r in classes]
            for act in acts:
                nxt = (fire(x, act), fire(y, act))
                if nxt == (None, None):
                    continue
                if nxt in seen and None not in nxt:
                    continue
                seen.add(nxt)
                queue.append((nxt, tr + (act,)))
    if not found:
        return Verdict(True)
    # traces of the left process that the right cannot match are reported first
    (rank, reason), tr = min(found, key=lambda f: f[0][0])
    return Verdict(False, tr, reason)


def _failure(x, y, consts):
    if y is None:
        return 0, "only the left side can perform the trace"
    if x is None:
        return 1, "only the right side can perform the trace"
    sv = static_equiv(x.frame, y.frame, consts)
    if not sv:
        return 0, f"frames are distinguished by {sv}"
    return None


def oracle_trace_equiv(a, b, depth=3, consts=()):
    return product_equiv(quiescent(a), quiescent(b), enabled, eager, depth, consts)


# -- permutations of traces ----------------------------------------------------

def dependent(x, y):
    if x.ch == y.ch:
        return True
    if x.kind == "out" and y.kind == "in":
        return x.arg in T.collect(y.arg, T.HANDLE)
    if x.kind == "in" and y.kind == "out":
        return y.arg in T.collect(x.arg, T.HANDLE)
    return False


def _occurrences(tr):
    seen = {}
    out = []
    for a in tr:
        k = seen.get(a, 0)
        seen[a] = k + 1
        out.append((a, k))
    return out


def permute_equiv(a, tr, tr2):
    """True iff tr2 is obtained from tr by swapping adjacent independent actions."""
    tr, tr2 = obs(tr), obs(tr2)
    if sorted(map(str, tr)) != sorted(map(str, tr2)):
        return False
    xs, ys = _occurrences(tr), _occurrences(tr2)
    pos = {o: i for i, o in enumerate(ys)}
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            if dependent(xs[i][0], xs[j][0]) and pos[xs[i]] > pos[xs[j]]:
                return False
    return True


def swaps(tr):
    """Traces one independent adjacent swap away from tr."""
    for i in range(len(tr) - 1):
        if not dependent(tr[i], tr[i + 1]):
            yield tr[:i] + (tr[i + 1], tr[i]) + tr[i + 2:]


def plausible(tr, initial=()):
    known = set(initial)
    for a in tr:
        if a.kind == "in" and not T.collect(a.arg, T.HANDLE) <= known:
            return False
        if a.kind == "out":
            known.add(a.arg)
    return True
