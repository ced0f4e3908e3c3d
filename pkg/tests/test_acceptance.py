"""One check per acceptance criterion; a PASS/FAIL line for each is printed
in the terminal summary."""

import random
import time
from math import factorial

import pytest

from porverif import checker, scenarios
from porverif import compressed as C
from porverif import concrete as K
from porverif.frames import static_equiv, witness_holds
from porverif.process import wrap_initial
import axioms
import lemma
from conftest import SEED, record
from fixtures import PHI, PHI_PLUS, PHI_PRIME, PHI_PRIME_PLUS, private_auth
from strategies import parse

MODES = ("reference", "compressed", "reduced")
ATTACK = "in(cB,aenc(pair(w1,w1),w2)).out(cB,w3)"


@pytest.fixture(scope="module")
def toy_runs():
    out = {}
    t0 = time.perf_counter()
    for n in range(1, 5):
        for mode in MODES:
            out[n, mode] = checker.explore(scenarios.toy(n), scenarios.toy(n), mode, consts=scenarios.TOY_CONSTS)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def auth_runs():
    _, sides = private_auth()
    out = {}
    for qi, (a, b) in enumerate(sides):
        for mode in MODES:
            t0 = time.perf_counter()
            v = checker.explore(a, b, mode, depth=3)
            out[qi, mode] = (v, time.perf_counter() - t0)
    return out


def test_criterion_1_toy_trace_counts(toy_runs):
    runs, secs = toy_runs
    want = {"reference": lambda n: factorial(2 * n) // 2 ** n, "compressed": factorial, "reduced": lambda n: 1}
    got = {(n, m): v.stats.max_traces for (n, m), v in runs.items()}
    ok = all(got[n, m] == want[m](n) for n in range(1, 5) for m in MODES) and secs < 60
    ok = ok and all(v.equivalent for v in runs.values())
    table = " ".join(f"({got[n, 'reference']},{got[n, 'compressed']},{got[n, 'reduced']})" for n in range(1, 5))
    assert record(1, ok, f"{table} in {secs:.1f}s")


def test_criterion_2_private_authentication(auth_runs):
    ok = True
    for mode in MODES:
        v0, t0 = auth_runs[0, mode]
        v1, t1 = auth_runs[1, mode]
        ok &= not v0 and v0.witness["trace"] == ATTACK and v0.witness["revalidated"] and t0 < 120
        ok &= bool(v1) and t1 < 120
    slowest = max(t for _, t in auth_runs.values())
    assert record(2, ok, f"Q0 not equivalent with {ATTACK}, Q equivalent, all modes, slowest {slowest:.2f}s")


def test_criterion_3_static_equivalence():
    v = static_equiv(PHI_PLUS, PHI_PRIME_PLUS)
    ok = bool(static_equiv(PHI, PHI_PRIME)) and not v
    ok = ok and (v.m, v.n) == (parse("aenc(pair(w5,w1),w2)"), parse("w3")) and witness_holds(PHI_PLUS, PHI_PRIME_PLUS, v)
    assert record(3, ok, f"Phi ~ Phi', Phi+ vs Phi'+ witness ({v.m}, {v.n})")


def test_criterion_4_random_agreement():
    rng = random.Random(SEED)
    t0 = time.perf_counter()
    bad = []
    n = 500
    for _ in range(n):
        a, b = scenarios.random_pair(rng)
        ref = bool(K.oracle_trace_equiv(a, b, 2, scenarios.RANDOM_CONSTS))
        comp = bool(C.oracle_compressed_equiv(a, b, 2, scenarios.RANDOM_CONSTS))
        got = [bool(checker.explore(a, b, m, depth=2, consts=scenarios.RANDOM_CONSTS)) for m in MODES]
        if len({ref, comp, *got}) != 1:
            bad.append((str(a), str(b), ref, comp, got))
    secs = time.perf_counter() - t0
    ok = not bad and secs < 600
    assert record(4, ok, f"{n} pairs, {len(bad)} disagreements, {secs:.0f}s"), bad[:3]


def test_criterion_5_dependencies_match_minimality():
    n, bad = lemma.run(SEED, 200)
    assert record(5, n >= 200 and not bad, f"{n} instantiated traces of at most 3 blocks, {len(bad)} mismatches"), bad[:3]


def test_criterion_6_solver_axioms():
    t0 = time.perf_counter()
    checked, skipped, bad = axioms.run(SEED, 500)
    ok = checked >= 500 and not bad
    assert record(6, ok, f"{checked} intermediate pairs checked, {skipped} skipped, {len(bad)} violations, "
                         f"{time.perf_counter() - t0:.0f}s"), bad[:3]


def test_criterion_7_pair_counts(toy_runs, auth_runs):
    runs, _ = toy_runs
    ok = True
    for n in range(1, 5):
        r, c, d = (runs[n, m].stats.pairs for m in MODES)
        ok &= d <= c <= r
        if n >= 2:
            ok &= d < c < r
    for qi in (0, 1):
        r, c, d = (auth_runs[qi, m][0].stats.pairs for m in MODES)
        ok &= d <= c <= r
    n4 = "/".join(str(runs[4, m].stats.pairs) for m in MODES)
    assert record(7, ok, f"toy n=4 pairs reference/compressed/reduced {n4}")


def test_criterion_8_trace_factoring():
    rng = random.Random(SEED)
    seen, bad = 0, []
    while seen < 500:
        a = wrap_initial(scenarios.random_process(rng))
        traces = {K.obs(tr) for tr, _ in K.explore(a, 1, ("ok", "start"))}
        for tr in sorted(traces, key=str):
            if not tr:
                continue
            seen += 1
            pro, imp = C.factor_trace(tr)
            flat = C.flatten(pro) + C.flatten(imp)
            good = all(b.proper and b.valid_shape() for b in pro) and all(not b.proper and b.valid_shape() for b in imp)
            good = good and len({b.ch for b in imp}) == len(imp)
            good = good and K.permute_equiv(a, tr, flat) and K.plausible(flat, a.frame.handles)
            if not good:
                bad.append((str(a), K.trace_text(tr)))
    assert record(8, not bad, f"{seen} plausible traces factored, {len(bad)} failures"), bad[:3]
