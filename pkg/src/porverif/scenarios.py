"""Parametric benchmark processes."""

from . import terms as T
from .frames import Frame
from .process import NIL, ExtendedProcess, If, In, Out


def toy(n, const="ok"):
    """n parallel members; member i reads on c_i, tests the input against the
    public constant and answers with its own name."""
    ok = T.const(const)
    procs = []
    for i in range(1, n + 1):
        x = T.var(f"x{i}")
        procs.append(In(f"c{i}", x, If(x, ok, Out(f"c{i}", T.name(f"n{i}"), NIL), NIL)))
    return ExtendedProcess.make(procs, Frame())


TOY_CONSTS = ("ok",)


# -- random initial simple processes ---------------------------------------------

NAMES = ("n1", "n2")
CHANNELS = ("a", "b", "c")
WRAPS = ("hash", "pk", "pair", "enc", "aenc")


def _message(rng, x=None):
    atoms = [T.name(n) for n in NAMES] + [T.const("ok")]
    if x is not None and rng.random() < 0.5:
        f = rng.choice(WRAPS)
        other = rng.choice(atoms)
        if f in ("hash", "pk"):
            return T.app(f, x)
        if f == "aenc":
            return T.app(f, x, T.app("pk", other)) if rng.random() < 0.5 else T.app(f, other, T.app("pk", x))
        return T.app(f, x, other) if rng.random() < 0.5 else T.app(f, other, x)
    return rng.choice(atoms)


def _member(rng, ch, i):
    x = T.var(f"x{i}")
    if rng.random() < 0.2:
        return In(ch, x, NIL)
    out = Out(ch, _message(rng, x), NIL)
    if rng.random() < 0.5:
        return In(ch, x, out)
    target = rng.choice([T.const("ok")] + [T.name(n) for n in NAMES])
    other = Out(ch, _message(rng, x), NIL) if rng.random() < 0.3 else NIL
    return In(ch, x, If(x, target, out, other))


def random_process(rng):
    k = rng.randint(1, 3)
    chans = rng.sample(CHANNELS, k)
    procs = [_member(rng, ch, i) for i, ch in enumerate(sorted(chans), 1)]
    entries = []
    for _ in range(rng.randint(0, 1)):
        entries.append(rng.choice([T.name(rng.choice(NAMES)), T.app("pk", T.name(rng.choice(NAMES)))]))
    return ExtendedProcess.make(procs, Frame.of(*entries))


def _mutate(rng, a):
    procs = list(a.procs)
    if not procs:
        return a
    i = rng.randrange(len(procs))
    procs[i] = _member(rng, procs[i].ch, i + 1)
    return ExtendedProcess.make(procs, a.frame)


def random_pair(rng):
    """A pair of initial simple processes with equal frames, biased towards
    near misses so both verdicts occur."""
    a = random_process(rng)
    r = rng.random()
    if r < 0.25:
        return a, a
    if r < 0.85:
        return a, _mutate(rng, a)
    b = random_process(rng)
    return a, ExtendedProcess.make(b.procs, a.frame)


RANDOM_CONSTS = ("ok",)
