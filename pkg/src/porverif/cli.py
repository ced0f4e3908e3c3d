"""Command-line client of the verification service.

Usage:
    porverif check FILE [--mode=M | --all-modes] [--depth=D] [--order=a<b] [--assume-non-blocking] [--jobs=N]
    porverif bench toy --n-max=K [--modes=reference,compressed,reduced] --out=F.csv
    porverif explore FILE --mode=M [--dump=F]

Requests go to the service in process unless --server points at a running one.
Exit codes: 0 all equivalent, 1 some query not equivalent, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings

import httpx

from .models import MODES, BenchResponse, CheckResponse, ExploreResponse

CSV_FIELDS = ["n", "mode", "verdict", "max_traces", "pairs", "solver_branches", "pruned", "wall_ms"]


class Client:
    def __init__(self, server=None):
        if server:
            self.http = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app
            self.http = TestClient(app)

    def post(self, path, payload):
        r = self.http.post(path, json=payload)
        if r.status_code == 422:
            raise InputFailure(r.json()["detail"])
        r.raise_for_status()
        return r.json()


class InputFailure(Exception):
    def __init__(self, detail):
        if isinstance(detail, dict):
            msg = f"{detail.get('line', 0)}:{detail.get('col', 0)}: {detail['message']}"
        else:
            msg = "; ".join(f"{'.'.join(map(str, d.get('loc', ())))}: {d.get('msg')}" for d in detail)
        super().__init__(msg)


def _modes(text):
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"modes must be among {', '.join(MODES)}")
    return modes


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise InputFailure({"message": f"cannot read {path}: {e.strerror}"})


def report(res: CheckResponse, out=None):
    out = out or sys.stdout
    for w in res.warnings:
        print(f"warning: {w}", file=out)
    for r in res.results:
        print(f"query (line {r.line}) {r.query}", file=out)
        print(f"  mode {r.mode}: {r.verdict}", file=out)
        if r.notice:
            print(f"  note: {r.notice}", file=out)
        if r.witness:
            w = r.witness
            print(f"  witness: {w.trace}", file=out)
            print(f"  side {w.side}: {w.reason}", file=out)
            print(f"  revalidated: {'yes' if w.revalidated else 'no'}", file=out)
        s = r.stats
        print(f"  stats: pairs={s.pairs} solver_branches={s.solver_branches} max_traces={s.max_traces} "
              f"pruned={s.pruned} wall_ms={s.wall_ms:.3f}", file=out)
        print(json.dumps(r.model_dump(), sort_keys=True), file=out)


def cmd_check(args, client):
    payload = {"source": _read(args.file), "depth": args.depth, "order": args.order,
               "non_blocking": args.assume_non_blocking, "jobs": args.jobs}
    if args.all_modes:
        payload["modes"] = list(MODES)
    elif args.mode:
        payload["modes"] = [args.mode]
    res = CheckResponse.model_validate(client.post("/check", payload))
    report(res)
    return 0 if res.all_equivalent else 1


def write_csv(path, rows):
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    if not fresh:
        with open(path, newline="", encoding="utf-8") as f:
            header = next(csv.reader(f), None)
        if header != CSV_FIELDS:
            raise InputFailure({"message": f"{path} has a different header, refusing to append"})
    with open(path, "a", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        if fresh:
            w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([r.n, r.mode, r.verdict, r.max_traces, r.pairs, r.solver_branches, r.pruned, f"{r.wall_ms:.3f}"])


def cmd_bench(args, client):
    res = BenchResponse.model_validate(client.post("/bench", {"scenario": args.scenario, "n_max": args.n_max,
                                                              "modes": args.modes}))
    for r in res.rows:
        print(f"n={r.n} {r.mode}: {r.verdict} max_traces={r.max_traces} pairs={r.pairs} pruned={r.pruned}")
    if args.out:
        write_csv(args.out, res.rows)
    return 0 if all(r.verdict == "EQUIVALENT" for r in res.rows) else 1


def cmd_explore(args, client):
    res = ExploreResponse.model_validate(client.post("/explore", {
        "source": _read(args.file), "mode": args.mode, "query": args.query, "depth": args.depth,
        "order": args.order, "non_blocking": args.assume_non_blocking}))
    lines = [f"{t.trace}\t{'solved' if t.solved else 'unsolved'}" for t in res.traces]
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as f:
            f.writelines(t.trace + "\n" for t in res.traces)
    for line in lines:
        print(line)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="porverif", description="Bounded trace equivalence checking.")
    ap.add_argument("--server", help="base URL of a running service")
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="check every query of a file")
    c.add_argument("file")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--mode", choices=MODES)
    g.add_argument("--all-modes", action="store_true")
    c.add_argument("--depth", type=int, default=3)
    c.add_argument("--order", help="channel order, e.g. cA<cB")
    c.add_argument("--assume-non-blocking", action="store_true")
    c.add_argument("--jobs", type=int, default=1)

    b = sub.add_parser("bench", help="run a built-in benchmark")
    b.add_argument("scenario", choices=["toy"])
    b.add_argument("--n-max", type=int, required=True)
    b.add_argument("--modes", type=_modes, default=list(MODES))
    b.add_argument("--out")

    e = sub.add_parser("explore", help="list the symbolic traces of the left process of a query")
    e.add_argument("file")
    e.add_argument("--mode", choices=MODES, default="compressed")
    e.add_argument("--query", type=int, default=0)
    e.add_argument("--depth", type=int, default=3)
    e.add_argument("--order")
    e.add_argument("--assume-non-blocking", action="store_true")
    e.add_argument("--dump")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    for k in ("depth", "jobs", "n_max"):
        if getattr(args, k, 1) < 1:
            ap.error(f"--{k.replace('_', '-')} must be at least 1")
    client = Client(args.server)
    try:
        return {"check": cmd_check, "bench": cmd_bench, "explore": cmd_explore}[args.cmd](args, client)
    except InputFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
