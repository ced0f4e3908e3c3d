"""Focused execution of blocks, compressed semantics and trace factoring."""

from __future__ import annotations

from typing import NamedTuple

from . import terms as T
from .concrete import Act, _replace, find, obs, product_equiv, quiescent, settle
from .frames import evaluate, recipe_classes, universe_atoms, witness_key
from .process import ExtendedProcess, In, Null, Out, channel, subst

BOTTOM = "⊥"


class Block(NamedTuple):
    ch: str
    inputs: tuple
    outputs: tuple = ()
    proper: bool = True

    def __str__(self):
        return f"io_{self.ch}[{','.join(map(str, self.inputs))};{','.join(map(str, self.outputs))}]"

    def actions(self):
        return tuple(Act("in", self.ch, m) for m in self.inputs) + tuple(Act("out", self.ch, w) for w in self.outputs)

    def valid_shape(self):
        return bool(self.inputs) and (bool(self.outputs) == self.proper)


def flatten(blocks):
    return tuple(a for b in blocks for a in b.actions())


def blocks_text(blocks):
    return ".".join(str(b) for b in blocks)


def _stuck_output(p):
    return type(p) is Out and not T.is_valid(p.u)


def can_stop(p):
    """Proper termination is allowed on Null, an input or a blocked output."""
    return type(p) in (Null, In) or _stuck_output(p)


def run_block(p, frame, blk):
    """Execute one block in focus. Returns (process or BOTTOM, frame) or None."""
    if not blk.inputs:
        return None
    for m in blk.inputs:
        p = settle(p)
        if type(p) is not In or p.ch != blk.ch:
            return None
        u = evaluate(frame, m)
        if u is None:
            return None
        p = subst(p.cont, {p.x: u})
    p = settle(p)
    if not blk.proper:
        if blk.outputs:
            return None
        return (BOTTOM, frame) if type(p) is Null or _stuck_output(p) else None
    if not blk.outputs:
        return None
    for h in blk.outputs:
        if type(p) is not Out or p.ch != blk.ch:
            return None
        u = T.evaluate(p.u)
        if u is None or h in frame.handles:
            return None
        frame = frame.extend(u, h)
        p = settle(p.cont)
    return (p, frame) if can_stop(p) else None


def compressed_step(a, blk):
    i, p = find(a.procs, blk.ch)
    if p is None:
        return None
    r = run_block(p, a.frame, blk)
    if r is None:
        return None
    q, frame = r
    if q == BOTTOM:
        return ExtendedProcess((), frame)
    return ExtendedProcess(_replace(a.procs, i, q), frame)


# -- elementary view with a focus stage ----------------------------------------

class Focused(NamedTuple):
    procs: tuple
    frame: object
    stage: str = "i+"
    focus: str = None


def focused(a):
    a = quiescent(a)
    return Focused(a.procs, a.frame)


def focus_labels(s):
    out = []
    if s.stage == "i+":
        return [("in", channel(p)) for p in s.procs if type(p) is In]
    _, p = find(s.procs, s.focus)
    if p is None:
        p = Null()
    if s.stage == "i*":
        if type(p) is In:
            out.append(("in", s.focus))
        elif type(p) is Out and T.is_valid(p.u):
            out.append(("out", s.focus))
        return out
    if type(p) is Out and T.is_valid(p.u):
        return [("out", s.focus)]
    return [("in", channel(q)) for q in s.procs if type(q) is In]


def focus_fire(s, act):
    if s is None or (act.kind, act.ch) not in focus_labels(s):
        return None
    i, p = find(s.procs, act.ch)
    if act.kind == "in":
        u = evaluate(s.frame, act.arg)
        if u is None:
            return None
        procs = _replace(s.procs, i, settle(subst(p.cont, {p.x: u})))
        return Focused(procs, s.frame, "i*", act.ch)
    u = T.evaluate(p.u)
    frame = s.frame.extend(u, act.arg)
    procs = _replace(s.procs, i, settle(p.cont))
    return Focused(procs, frame, "o*", act.ch)


def complete(s):
    """Whether the actions so far form a compressed trace ending at s."""
    if s.stage == "i+":
        return True
    _, p = find(s.procs, s.focus)
    if p is None:
        p = Null()
    if s.stage == "o*":
        return can_stop(p)
    return type(p) is Null or _stuck_output(p)


def to_blocks(tr, final=None):
    """Group an elementary trace into blocks."""
    blocks = []
    for a in tr:
        last = blocks[-1] if blocks else None
        if last and last[0] == a.ch and (a.kind == "out" or not last[2]):
            (last[2] if a.kind == "out" else last[1]).append(a.arg)
        else:
            blocks.append([a.ch, [a.arg], []])
    out = [Block(c, tuple(i), tuple(o), bool(o)) for c, i, o in blocks]
    return tuple(out)


def compressed_explore(a, depth=3, consts=()):
    """All compressed traces with their final frames."""
    start = focused(a)
    result = set()
    stack = [((), start)]
    while stack:
        tr, s = stack.pop()
        if complete(s):
            result.add((to_blocks(tr), s.frame))
        labels = focus_labels(s)
        if any(k == "in" for k, _ in labels):
            classes = recipe_classes([s.frame], universe_atoms(s.frame, consts), depth, witness_key)
        for kind, ch in labels:
            if kind == "out":
                acts = [Act("out", ch, s.frame.fresh_handle())]
            else:
                acts = [Act("in", ch, r) for r, _ in classes]
            for act in acts:
                nxt = focus_fire(s, act)
                if nxt is not None:
                    stack.append((tr + (act,), nxt))
    return result


def replay_blocks(a, blocks):
    a = quiescent(a)
    for b in blocks:
        if not a.procs:
            return None
        a = compressed_step(a, b)
        if a is None:
            return None
    return a


def oracle_compressed_equiv(a, b, depth=3, consts=()):
    return product_equiv(focused(a), focused(b), focus_labels, focus_fire, depth, consts)


# -- factoring ----------------------------------------------------------------

def factor_trace(tr):
    """Split tr into proper blocks followed by improper blocks, up to
    permutation of independent actions."""
    acts = list(obs(tr))
    seen = set()
    for a in acts:
        if a.ch not in seen:
            if a.kind != "in":
                raise ValueError(f"the first action on channel {a.ch} is not an input")
            seen.add(a.ch)
    proper = []
    while any(a.kind == "out" for a in acts):
        p = next(i for i, a in enumerate(acts) if a.kind == "out")
        c = acts[p].ch
        ins = [a for a in acts[:p] if a.ch == c]
        others = [a for a in acts[:p] if a.ch != c]
        outs = [acts[p]]
        rest = []
        closed = False
        for a in acts[p + 1:]:
            if a.ch == c and a.kind == "out" and not closed:
                outs.append(a)
            else:
                closed = closed or a.ch == c
                rest.append(a)
        proper.append(Block(c, tuple(a.arg for a in ins), tuple(a.arg for a in outs), True))
        acts = others + rest
    improper = {}
    for a in acts:
        improper.setdefault(a.ch, []).append(a.arg)
    return tuple(proper), tuple(Block(c, tuple(ms), (), False) for c, ms in improper.items())
