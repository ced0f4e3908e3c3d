from itertools import product

import pytest
from hypothesis import given

from porverif import terms as T
from strategies import ground_terms, open_terms, parse


def test_signature_table():
    assert T.CONSTRUCTORS == {"pair": 2, "aenc": 2, "pk": 1, "enc": 2, "hash": 1, "sign": 2, "vk": 1}
    assert T.DESTRUCTORS == {"fst": 1, "snd": 1, "adec": 2, "dec": 2, "check": 2}


def test_arity_is_checked():
    with pytest.raises(ValueError):
        T.app("pair", T.name("a"))


def test_canonical_text():
    assert str(parse("aenc(pair(na, pk(ska)), pk(skb))")) == "aenc(pair(na,pk(ska)),pk(skb))"
    assert str(parse("pair(w1, X2)")) == "pair(w1,X2)"


def test_kinds_from_text():
    t = parse("pair(w3, pair(X1, pair(x, pair(ok, a))))")
    kinds = {str(s): s.kind for s in T.subterms(t)}
    assert kinds["w3"] == T.HANDLE and kinds["X1"] == T.RVAR and kinds["x"] == T.VAR
    assert kinds["ok"] == T.APP and kinds["a"] == T.NAME


def test_recipe_and_ground():
    assert T.is_recipe(parse("aenc(pair(w1,w1),w2)"))
    assert not T.is_recipe(parse("pair(w1,a)"))
    assert not T.is_recipe(parse("pair(w1,x)"))
    assert T.is_ground(parse("pair(a,ok)"))
    assert not T.is_ground(parse("pair(a,X1)"))


@pytest.mark.parametrize("src,nf", [
    ("snd(adec(aenc(pair(n, pk(ska)), pk(skb)), skb))", "pk(ska)"),
    ("ok", "ok"),
    ("dec(enc(a,k), b)", "dec(enc(a,k),b)"),
    ("check(sign(a,k), vk(k))", "a"),
    ("fst(pair(dec(enc(a,k),k), b))", "a"),
])
def test_normalize(src, nf):
    assert str(T.normalize(parse(src))) == nf


def test_eq_modulo():
    assert T.eq_modulo(parse("fst(pair(a,b))"), parse("a"))
    w3 = parse("aenc(pair(na, pk(ska)), pk(skb))")
    assert T.eq_modulo(T.apply({parse("x"): parse("na")}, parse("aenc(pair(x, pk(ska)), pk(skb))")), w3)
    assert not T.eq_modulo(parse("pk(ska)"), parse("pk(ska')"))


@pytest.mark.parametrize("src,valid", [
    ("fst(pair(ok, dec(enc(a,k),b)))", False),
    ("aenc(pair(na, pk(ska)), pk(skb))", True),
    ("ok", True),
    ("fst(pair(ok, dec(enc(a,k),k)))", True),
    ("pk(fst(a))", False),
])
def test_is_valid(src, valid):
    assert T.is_valid(parse(src)) is valid


def test_unify_examples():
    x, y = T.var("x"), T.var("y")
    assert T.unify(x, parse("ok")) == {x: parse("ok")}
    assert T.unify(parse("pair(x, b)"), parse("pair(a, y)")) == {x: parse("a"), y: parse("b")}
    assert T.unify(parse("pk(x)"), parse("pair(a,b)")) is None
    assert T.unify(x, parse("pk(x)")) is None


def test_apply_examples():
    x = T.var("x")
    assert T.apply({x: parse("ok")}, parse("pair(x,x)")) == parse("pair(ok,ok)")
    t = parse("pair(x,a)")
    assert T.apply({}, t) == t
    y = T.var("y")
    s = {y: parse("aenc(pair(pk(ska),pk(ska)),pk(skb))")}
    assert T.normalize(T.apply(s, parse("adec(y,skb)"))) == parse("pair(pk(ska),pk(ska))")


@given(ground_terms())
def test_normalize_idempotent(t):
    n = T.normalize(t)
    assert T.normalize(n) == n


@given(ground_terms())
def test_rewriting_strategies_agree(t):
    assert T.normalize(t) == T.outermost_normalize(t)


@given(ground_terms())
def test_rewriting_shrinks(t):
    assert T.size(T.normalize(t)) <= T.size(t)


@given(ground_terms())
def test_validity_closed_under_subterms(t):
    if T.is_valid(t):
        assert all(T.is_valid(s) for s in T.subterms(t))


@given(ground_terms())
def test_valid_normal_forms_are_constructor_terms(t):
    if T.is_valid(t):
        assert not T.has_destructor(T.normalize(t))


@given(open_terms(), open_terms())
def test_unifier_unifies(t1, t2):
    s = T.unify(t1, t2)
    if s is not None:
        assert T.apply(s, t1) == T.apply(s, t2)
        assert not (set(s) & set().union(*(T.collect(v, T.VAR) for v in s.values())))


SMALL = [T.name("a"), T.name("b")]


def _instances(t, vs):
    for vals in product(SMALL + [T.app("pair", a, b) for a in SMALL for b in SMALL], repeat=len(vs)):
        yield dict(zip(vs, vals))


@given(open_terms(max_leaves=4), open_terms(max_leaves=4))
def test_unifier_most_general(t1, t2):
    vs = sorted(T.collect(t1, T.VAR) | T.collect(t2, T.VAR), key=str)
    s = T.unify(t1, t2)
    ground = [g for g in _instances(t1, vs) if T.apply(g, t1) == T.apply(g, t2)]
    if s is None:
        assert not ground
        return
    for g in ground:
        # every ground unifier factors through the mgu
        inst = {v: T.apply(g, T.apply(s, v)) for v in vs}
        assert all(inst[v] == g[v] for v in vs)
