"""Exploration of pairs of symbolic process sets and equivalence verdicts."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple

from . import terms as T
from .compressed import Block, focus_fire, focused
from .concrete import Act, eager, quiescent, trace_text
from .frames import Frame, static_equiv, witness_key
from .process import ExtendedProcess, If, Out, is_initial, wrap_initial
from .reduction import LEX, DepConstraint, dep
from .solver import (Context, Evaluator, Leaf, Pending, Region, close, find_sample,
                     iter_candidates, _values, _excl_ok, simplify)
from .symbolic import Deduce, initial_members, member_labels, member_step


class Pair(NamedTuple):
    left: tuple
    right: tuple
    deduce: tuple
    region: Region
    trace: tuple = ()  # ("in", ch, X) or ("out", ch, w)
    blocks: tuple = ()  # completed and current blocks as Block values
    deps: tuple = ()


@dataclass
class Stats:
    pairs: int = 0
    solver_branches: int = 0
    max_traces: int = 0
    pruned: int = 0
    wall_ms: float = 0.0
    traces: set = field(default_factory=set, repr=False)

    def record(self):
        return {"pairs": self.pairs, "solver_branches": self.solver_branches, "max_traces": self.max_traces,
                "pruned": self.pruned, "wall_ms": round(self.wall_ms, 3)}


@dataclass
class Verdict:
    equivalent: bool
    mode: str
    witness: dict = None
    stats: Stats = None
    notice: str = ""

    def __bool__(self):
        return self.equivalent

    def record(self):
        return {"mode": self.mode, "verdict": "EQUIVALENT" if self.equivalent else "NOT EQUIVALENT",
                "witness": self.witness, "stats": self.stats.record() if self.stats else None,
                "notice": self.notice}


def step_one(p, label, mode, ctx):
    """Fire one symbolic action in every member, then close under tau."""
    kind, ch = label
    mem = p.left + p.right
    k = len(mem[0].frame) if mem else 0
    deduce, region = p.deduce, p.region
    if kind == "in":
        n = len(deduce) + 1
        X, x = T.rvar(f"X{n}"), T.var(f"x{n}")
        act = ("in", ch, X, x)
        deduce = deduce + (Deduce(k, X, x),)
        region = region.declare(X.name, Leaf(k, ctx.depth))
        sym = ("in", ch, X)
    else:
        w = T.handle(k)
        act = ("out", ch, w)
        sym = act
    left = tuple(q for m in p.left for q in member_step(m, act, mode, ctx.non_blocking))
    right = tuple(q for m in p.right for q in member_step(m, act, mode, ctx.non_blocking))
    blocks, deps = list(p.blocks), p.deps
    last = blocks[-1] if blocks else None
    if kind == "in":
        if last and last.ch == ch and not last.outputs:
            blocks[-1] = last._replace(inputs=last.inputs + (sym[2],))
        else:
            blocks.append(Block(ch, (sym[2],), (), False))
    else:
        if last and last.ch == ch:
            if not last.outputs and mode == "reduced":
                ws = dep(tuple(blocks[:-1]), ch, ctx.order)
                if ws:
                    deps = deps + (DepConstraint(last.inputs, ws),)
            blocks[-1] = last._replace(outputs=last.outputs + (sym[2],), proper=True)
        else:
            blocks.append(Block(ch, (), (sym[2],), True))
    return Pair(left, right, deduce, region, p.trace + (sym,), tuple(blocks), deps)


def labels(p, mode, ctx):
    out = set()
    for m in p.left + p.right:
        out.update(member_labels(m, mode, ctx.non_blocking))
    return sorted(out, key=lambda l: (ctx.order.key(l[1]), l[0]))


def violates_deps(p):
    names = [d.X.name for d in p.deduce]
    ps = p.region.partial_solution(names)
    for d in p.deps:
        if all(X.name in ps for X in d.vars):
            if not any(w in T.collect(ps[X.name], T.HANDLE) for X in d.vars for w in d.handles):
                return True
    return False


# -- symbolic equivalence of sets ------------------------------------------------

def _xmap(p):
    return {d.x: d.X.name for d in p.deduce}


def _frame_values(region, m, xmap, assign=None):
    ev = Evaluator(region, m.frame, xmap, assign)
    return [(h, ev.ev(h)) for h in m.frame.handles]


def frames_counterexample(p, lm, rm, ctx, limit=200_000):
    """None if the two member frames are statically equivalent for every
    solution of the region, else (assignment, static verdict)."""
    region, xmap = p.region, _xmap(p)
    lv, rv = _frame_values(region, lm, xmap), _frame_values(region, rm, xmap)
    if lv == rv:
        return None
    opens = sorted({x.name[1:] for _, v in lv + rv for x in T.subterms(v) if x.kind == T.VAR and x.name[0] == "@"},
                   key=lambda n: (region.info[n].k, n))
    frames = [lm.frame, rm.frame]
    assign = {}
    count = [0]

    def check():
        f1 = Frame(tuple(_frame_values(region, lm, xmap, assign)))
        f2 = Frame(tuple(_frame_values(region, rm, xmap, assign)))
        sv = static_equiv(f1, f2, ctx.consts)
        if sv:
            return None
        full = find_sample(region, frames, xmap, ctx, fixed=dict(assign))
        if full is None:
            return None
        return full, sv

    def rec(i):
        if i == len(opens):
            return check()
        v = opens[i]
        leaf = region.info[v]
        vals = []
        for m in (lm, rm):
            fv = _values(region, m.frame, xmap, assign, leaf.k)
            if fv is None:
                return None
            vals.append(fv)
        for d in range(1, leaf.b + 1):
            for r, _ in iter_candidates(tuple(vals), ctx.consts, Leaf(leaf.k, d, leaf.noncomp)):
                if T.depth(r) != d:
                    continue
                count[0] += 1
                if count[0] > limit:
                    raise RuntimeError("too many instances to enumerate")
                assign[v] = r
                if all(_excl_ok(region, ex, xmap, assign) is not False for ex in region.excl):
                    res = rec(i + 1)
                    if res is not None:
                        return res
                del assign[v]
        return None

    return rec(0)


def symb_equiv_sets(p, ctx):
    """None when the pair is in symbolic equivalence, else a failure record."""
    if not p.left and not p.right:
        return None
    if not p.right:
        return {"side": "left", "reason": "only the left side can perform the trace"}
    if not p.left:
        return {"side": "right", "reason": "only the right side can perform the trace"}
    for mine, theirs, side in ((p.left, p.right, "left"), (p.right, p.left, "right")):
        for m in mine:
            bad = None
            for o in theirs:
                lm, rm = (m, o) if side == "left" else (o, m)
                bad = frames_counterexample(p, lm, rm, ctx)
                if bad is None:
                    break
            if bad is not None:
                assign, sv = bad
                return {"side": side, "reason": f"frames are distinguished by {sv}", "assign": assign}
    return None


def minimize_witness(p, ctx, fixed=None, width=6):
    region, xmap = p.region, _xmap(p)
    frames = [m.frame for m in p.left + p.right]
    assign = dict(fixed or {})
    for d in p.deduce:
        r = region.resolve(d.X)
        leaves = sorted({x.name for x in T.subterms(r) if x.kind == T.RVAR and x.name not in assign})
        if not leaves:
            continue
        options = []
        for n in leaves:
            leaf = region.info[n]
            vals = tuple(_values(region, f, xmap, assign, leaf.k) for f in frames)
            if any(v is None for v in vals):
                options = []
                break
            options.append([c for c, _ in zip((r for r, _ in iter_candidates(vals, ctx.consts, leaf)), range(width))])
        if not options:
            continue
        combos = []
        for combo in product(*options):
            sub = {T.rvar(n): c for n, c in zip(leaves, combo)}
            combos.append((witness_key(T.apply(sub, r)), combo))
        combos.sort(key=lambda c: c[0])
        for _, combo in combos:
            trial = dict(assign)
            trial.update(zip(leaves, combo))
            if find_sample(region, frames, xmap, ctx, fixed=trial) is not None:
                assign = trial
                break
    return find_sample(region, frames, xmap, ctx, fixed=assign)


def concrete_trace(p, assign):
    closed = close(p.region, assign)
    out = []
    for kind, ch, v in p.trace:
        out.append(Act(kind, ch, closed.resolve(v) if kind == "in" else v))
    return tuple(out)


def revalidate(a, b, mode, side, tr, consts):
    """Replay the witness concretely: the claimed side runs it, the other
    side cannot, or ends with a distinguishable frame."""
    def run(x):
        if mode == "reference":
            s = quiescent(x)
            for act in tr:
                s = eager(s, act)
                if s is None:
                    return None
            return s.frame
        s = focused(x)
        for act in tr:
            s = focus_fire(s, act)
            if s is None:
                return None
        return s.frame

    fa, fb = run(a), run(b)
    mine, other = (fa, fb) if side == "left" else (fb, fa)
    if mine is None:
        return False
    return other is None or not static_equiv(fa, fb, consts) if other is not None else True


# -- exploration ---------------------------------------------------------------

def prepare(a, b, mode):
    notice = ""
    if mode != "reference" and not (is_initial(a) and is_initial(b)):
        a, b = wrap_initial(a), wrap_initial(b)
        notice = "processes were not initial; each member now first reads the constant start on its channel"
    return a, b, notice


def explore(a, b, mode="reduced", depth=3, consts=(), order=LEX, non_blocking=False, max_depth=None):
    """Decide trace equivalence of a and b by exploring pairs level by level.
    The first failure at the smallest trace length is reported, traces the
    left side can run being preferred."""
    t0 = time.perf_counter()
    a, b, notice = prepare(a, b, mode)
    if notice:
        consts = tuple(consts) + ("start",) if "start" not in [str(c) for c in consts] else tuple(consts)
    ctx = Context(consts, depth, non_blocking)
    ctx.order = order
    stats = Stats()
    start = Pair(tuple(initial_members(quiescent(a))), tuple(initial_members(quiescent(b))), (), Region())
    level = _branches(start, ctx, stats, mode)
    witness = None
    n = 0
    while level and witness is None:
        failures = []
        nxt = []
        for p in level:
            stats.pairs += 1
            stats.traces.add(tuple((k, c) for k, c, _ in p.trace))
            f = symb_equiv_sets(p, ctx)
            if f is not None:
                failures.append((0 if f["side"] == "left" or "frames" in f["reason"] else 1, len(failures), p, f))
                continue
            if failures or (max_depth is not None and n >= max_depth):
                continue
            for lab in labels(p, mode, ctx):
                q = step_one(p, lab, mode, ctx)
                if not q.left and not q.right:
                    continue
                nxt.extend(_branches(q, ctx, stats, mode))
        if failures:
            _, _, p, f = min(failures, key=lambda x: x[:2])
            assign = minimize_witness(p, ctx, f.get("assign"))
            tr = concrete_trace(p, assign)
            witness = {"trace": trace_text(tr), "side": f["side"], "reason": f["reason"],
                       "theta": {d.X.name: str(close(p.region, assign).resolve(d.X)) for d in p.deduce}}
            witness["revalidated"] = revalidate(a, b, mode, f["side"], tr, ctx.consts)
        level = nxt
        n += 1
    longest = max((len(t) for t in stats.traces), default=0)
    stats.max_traces = sum(1 for t in stats.traces if len(t) == longest)
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return Verdict(witness is None, mode, witness, stats, notice)


def _branches(q, ctx, stats, mode):
    out = []
    for left, right, region in simplify(q.left, q.right, q.deduce, q.region, ctx):
        stats.solver_branches += 1
        p = q._replace(left=left, right=right, region=region)
        if mode == "reduced" and p.deps and violates_deps(p):
            stats.pruned += 1
            continue
        out.append(p)
    return out


# -- listings ------------------------------------------------------------------

def symbolic_text(p, mode):
    if mode == "reference":
        return ".".join(f"{k}({c},{v})" for k, c, v in p.trace)
    return ".".join(str(b) for b in p.blocks)


def symbolic_traces(a, mode="compressed", depth=3, consts=(), order=LEX, non_blocking=False):
    """Every symbolic trace of a alone, with whether its constraints have a
    solution. Traces are listed in exploration order, prefixes included."""
    if mode != "reference" and not is_initial(a):
        a = wrap_initial(a)
        consts = tuple(consts) + ("start",)
    ctx = Context(consts, depth, non_blocking)
    ctx.order = order
    stats = Stats()
    level = _branches(Pair(tuple(initial_members(quiescent(a))), (), (), Region()), ctx, stats, mode)
    out, seen = [], set()
    while level:
        nxt = []
        for p in level:
            text = symbolic_text(p, mode)
            if text not in seen:
                seen.add(text)
                frames = [m.frame for m in p.left]
                solved = find_sample(p.region, frames, _xmap(p), ctx) is not None
                out.append((text, solved))
            for lab in labels(p, mode, ctx):
                q = step_one(p, lab, mode, ctx)
                if q.left:
                    nxt.extend(_branches(q, ctx, stats, mode))
        level = nxt
    return out


def non_blocking_safe(a):
    """Syntactic check that every output is valid whenever reached: either
    each destructor application is a subterm of an enclosing passed test, or
    a projection whose sibling projection is."""
    def walk(p, guards):
        t = type(p)
        if t is If:
            return walk(p.then, guards | {p.u, p.v}) and walk(p.else_, guards)
        if t is Out:
            known = {s for g in guards for s in T.subterms(g)}
            ok = all(_guarded(s, known) for s in T.subterms(p.u) if s.kind == T.APP and s.name in T.DESTRUCTORS)
            return ok and walk(p.cont, guards)
        if hasattr(p, "cont"):
            return walk(p.cont, guards)
        return True
    return all(walk(p, frozenset()) for p in a.procs)


def _guarded(s, known):
    if s in known:
        return True
    other = {"fst": "snd", "snd": "fst"}.get(s.name)
    return other is not None and T.app(other, *s.args) in known
