"""Dependency constraints, block independence and minimal block orders."""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

from . import terms as T
from .frames import Frame, deducible_bounded, evaluate
from .compressed import Block


class ChannelOrder:
    """Total strict order on channels; lexicographic unless given explicitly."""

    def __init__(self, chain=()):
        self.rank = {c: i for i, c in enumerate(chain)}

    @staticmethod
    def parse(text):
        return ChannelOrder([c.strip() for c in text.split("<") if c.strip()])

    def key(self, c):
        if c in self.rank:
            return (0, self.rank[c], "")
        return (1, 0, c)

    def lt(self, a, b):
        return self.key(a) < self.key(b)

    def sort(self, chans):
        return sorted(chans, key=self.key)


LEX = ChannelOrder()


class DepConstraint(NamedTuple):
    vars: tuple
    handles: tuple

    def __str__(self):
        return f"{','.join(map(str, self.vars))} <| {{{','.join(map(str, self.handles))}}}"


def dep(blocks, c, order=LEX):
    """Handles a new block on c must depend on, given the preceding blocks."""
    n = len(blocks)
    for k in range(n - 1, -1, -1):
        if order.lt(c, blocks[k].ch) and all(order.lt(blocks[i].ch, c) for i in range(k + 1, n)):
            return tuple(w for b in blocks[k:] for w in b.outputs)
    return ()


def all_dep(blocks, order=LEX):
    out = []
    for i, b in enumerate(blocks):
        ws = dep(blocks[:i], b.ch, order)
        if ws:
            out.append(DepConstraint(tuple(b.inputs), ws))
    return out


def block_independent(b1, b2):
    if b1.ch == b2.ch:
        return False
    h1 = set().union(*(T.collect(m, T.HANDLE) for m in b1.inputs)) if b1.inputs else set()
    h2 = set().union(*(T.collect(m, T.HANDLE) for m in b2.inputs)) if b2.inputs else set()
    return not (set(b1.outputs) & h2) and not (set(b2.outputs) & h1)


def _derivable_without(frame, k, target, avoid, depth, consts):
    """Is target produced by some recipe over the first k handles minus avoid?"""
    keep = Frame(tuple((h, p) for h, p in frame.entries[:k] if h not in avoid))
    return deducible_bounded(keep, target, depth, consts) is not None


def satisfies_deps(messages, domains, frame, deps, depth=3, consts=()):
    """Oracle check of dependency constraints. messages maps each second-order
    variable to its message, domains to its domain size in frame."""
    for d in deps:
        if not any(not _derivable_without(frame, domains[X], messages[X], set(d.handles), depth, consts) for X in d.vars):
            return False
    return True


def _realizable(order, blocks, frame, initial, depth, consts, cache):
    """Every block's input messages derivable from the handles available before it."""
    avail = set(initial)
    for i in order:
        b = blocks[i]
        for m in b.inputs:
            msg = evaluate(frame, m)
            key = (frozenset(avail), msg)
            ok = cache.get(key)
            if ok is None:
                keep = Frame(tuple((h, p) for h, p in frame.entries if h in avail))
                ok = msg is not None and deducible_bounded(keep, msg, depth, consts) is not None
                cache[key] = ok
            if not ok:
                return False
        avail.update(b.outputs)
    return True


def phi_class(blocks, frame, initial=(), depth=3, consts=()):
    """Block orders reachable by swapping adjacent blocks on distinct channels
    while keeping every input derivable from what precedes it."""
    blocks = tuple(blocks)
    start = tuple(range(len(blocks)))
    seen = {start}
    todo = deque([start])
    cache = {}
    while todo:
        cur = todo.popleft()
        for i in range(len(cur) - 1):
            a, b = blocks[cur[i]], blocks[cur[i + 1]]
            if a.ch == b.ch:
                continue
            nxt = cur[:i] + (cur[i + 1], cur[i]) + cur[i + 2:]
            if nxt in seen:
                continue
            if _realizable(nxt, blocks, frame, initial, depth, consts, cache):
                seen.add(nxt)
                todo.append(nxt)
    return [tuple(blocks[i] for i in o) for o in seen]


def _lex(blocks, order):
    return tuple(order.key(b.ch) for b in blocks)


def phi_minimal(blocks, frame, initial=(), order=LEX, depth=3, consts=()):
    """No trace of the class is smaller in the lexicographic block order."""
    mine = _lex(blocks, order)
    return all(_lex(o, order) >= mine for o in phi_class(blocks, frame, initial, depth, consts))
