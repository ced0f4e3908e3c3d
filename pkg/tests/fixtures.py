import os

from porverif import process as P
from porverif.frames import Frame
from strategies import parse

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROTOCOLS = os.path.join(ROOT, "examples", "protocols")

PHI0 = Frame.of(parse("pk(ska')"), parse("pk(ska)"), parse("pk(skb)"))
PHI = PHI0.extend(parse("aenc(pair(na, pk(ska)), pk(skb))")).extend(parse("aenc(pair(na, pair(nb, pk(skb))), pk(ska))"))
PHI_PRIME = PHI0.extend(parse("aenc(pair(na, pk(ska')), pk(skb))")).extend(parse("aenc(nb, pk(skb))"))
PHI_PLUS = PHI.extend(parse("na"))
PHI_PRIME_PLUS = PHI_PRIME.extend(parse("na"))


def load(name):
    with open(os.path.join(PROTOCOLS, name), encoding="utf-8") as f:
        return P.parse(f.read())


def private_auth():
    pf = load("private_auth.spv")
    return pf, [pf.sides(q) for q in pf.queries]


def sides_of(src):
    """Both sides of the single query of a small protocol text."""
    pf = P.parse(src)
    return pf.sides(pf.queries[0])
