"""Command line entry point: ``btlab <subcommand> [flags]``.

Every run writes into ``<out>/<digest>/`` where the digest is taken from the
field config, ``n`` and ``seed``, so two runs with the same flags share a
directory.  Files carry no timestamps and are written atomically.

Exit status: 0 if everything passed, 1 if a certificate failed, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from btlab.bttree import TN, TN_PRIME, Tree
from btlab.cochains import EDGES, VERTICES, CochainVector, orbit_invariants, sigma_matrix_on_invariants
from btlab.groups import IWAHORI, MAX_COMPACT, TooLarge, random_element
from btlab.intlin import cokernel_structure, snf
from btlab.localfield import Field, FieldConfig, FieldError
from btlab import oracle, verify
from btlab.vdput import FormalUnit, beta_current, j_cocycle, theta_current, transform

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

COHOM_CERTS = ("coker_g0", "iwahori", "g0_global", "crt_and_diagram", "pstar_j")
GROUPS = {"g0": MAX_COMPACT, "iwahori": IWAHORI}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# run configuration


def field_config(args) -> FieldConfig:
    backend = args.backend or ("rational" if args.f == 1 else "laurent")
    modulus = None
    if args.modulus:
        try:
            modulus = tuple(int(c) for c in args.modulus.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --modulus {args.modulus!r}: expected comma separated integers") from exc
    try:
        return FieldConfig(backend, args.p, args.f, modulus)
    except FieldError as exc:
        raise UsageError(str(exc)) from exc


def run_config(args) -> dict:
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    return {"field": field_config(args).to_json(), "n": args.n, "seed": args.seed}


def run_dir(args, cfg: dict) -> Path:
    digest = hashlib.sha256(verify.canonical_json(cfg).encode()).hexdigest()[:16]
    return Path(args.out) / digest


def tree_for(field_json: dict) -> Tree:
    cfg = FieldConfig(field_json["backend"], field_json["p"], field_json["f"], tuple(field_json["modulus"]))
    return Tree(Field(cfg))


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cert_filename(cert: verify.Certificate) -> str:
    n = cert.config.get("n")
    tail = f"-n{n}" if n is not None else ""
    return f"{cert.name}-q{cert.config['q']}{tail}.json"


# ---------------------------------------------------------------------------
# certificate jobs (top level so they pickle for the process pool)


def build_certificate(field_json: dict, name: str, n: int, seed: int) -> str:
    tree = tree_for(field_json)
    if name == "sigma_closed_forms":
        cert = verify.cert_sigma_closed_forms(tree, n)
    elif name == "coker_g0":
        cert = verify.cert_coker_g0(tree, n)
    elif name == "iwahori":
        cert = verify.cert_iwahori(tree, n)
    elif name == "g0_global":
        cert = verify.cert_g0_global(tree)
    elif name == "crt_and_diagram":
        cert = verify.cert_crt_and_diagram(tree, n)
    elif name == "pstar_j":
        cert = verify.cert_pstar_j(tree, n, seed=seed)
    else:
        raise UsageError(f"unknown certificate {name!r}")
    return cert.dumps()


def run_jobs(jobs: list[tuple], workers: int) -> list[str]:
    if workers == 1 or len(jobs) <= 1:
        return [build_certificate(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(build_certificate, *zip(*jobs)))


def store(directory: Path, texts: list[str]) -> list[verify.Certificate]:
    certs = []
    for text in texts:
        cert = verify.load_certificate(text)
        write_atomic(directory / cert_filename(cert), text)
        certs.append(cert)
    return certs


def failure_report(certs: list[verify.Certificate], extra: list[dict] | None = None) -> dict:
    failed = [{"name": c.name, "anchor": c.anchor, "config": c.config, "checksum": c.checksum} for c in certs if not c.passed]
    return {"status": "fail" if failed or extra else "pass", "failed": failed + (extra or [])}


# ---------------------------------------------------------------------------
# subcommands


def cmd_tree(args, cfg, out: Path) -> int:
    tree = tree_for(cfg["field"])
    kind = {"tn": TN, "tprime": TN_PRIME}[args.kind]
    win = tree.window(kind, args.n)
    stem = f"tree-{args.kind}-n{args.n}"
    if args.dot:
        path = out / f"{stem}.dot"
        write_atomic(path, win.to_dot(name=f"{args.kind}{args.n}"))
    else:
        path = out / f"{stem}.json"
        write_atomic(path, json.dumps(win.to_json(), sort_keys=True, indent=1) + "\n")
    print(f"{path}: {len(win.vertices)} nodes, {len(win.edges)} edges")
    return EXIT_OK


def cmd_orbits(args, cfg, out: Path) -> int:
    tree = tree_for(cfg["field"])
    tag = GROUPS[args.group]
    kind = TN if tag == MAX_COMPACT else TN_PRIME
    table = {}
    for domain, win in ((VERTICES, tree.window(kind, args.n)), (EDGES, tree.window(kind, args.n + 1))):
        ob = orbit_invariants(tree, tag, win, domain, level=args.n + 2)
        rows = [{"representative": str(r), "size": s} for r, s in zip(ob.representatives, ob.sizes)]
        table[domain] = {"window": f"{win.kind}({win.n})", "orbits": rows}
        print(f"{args.group} orbits on {domain} of {win.kind}({win.n}):")
        for row in rows:
            print(f"  {row['representative']:>16}  size {row['size']}")
    write_atomic(out / f"orbits-{args.group}-n{args.n}.json", json.dumps(table, sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def cmd_sigma(args, cfg, out: Path) -> int:
    tree = tree_for(cfg["field"])
    tag = GROUPS[args.group]
    A = sigma_matrix_on_invariants(tree, tag, args.n)
    S = snf(A)
    coker = cokernel_structure(A, S)
    print(f"Sigma on {args.group}-invariants, n = {args.n}:")
    for row in A.tolist():
        print("  " + " ".join(f"{x:>4}" for x in row))
    print(f"SNF diagonal: {list(S.diagonal)}")
    print(f"cokernel: {coker.pretty()}")
    write_atomic(
        out / f"sigma-{args.group}-n{args.n}.json",
        json.dumps({"matrix": A.tolist(), "diagonal": list(S.diagonal), "cokernel": coker.to_json()}, sort_keys=True, indent=1) + "\n",
    )
    certs = store(out, [build_certificate(cfg["field"], "sigma_closed_forms", args.n, args.seed)])
    return _finish(certs, out)


def cmd_cohom(args, cfg, out: Path) -> int:
    names = args.cert or ["coker_g0"]
    jobs = [(cfg["field"], name, args.n, args.seed) for name in names]
    certs = store(out, run_jobs(jobs, args.jobs))
    for c in certs:
        print(f"{c.name} q={c.config['q']} n={c.config.get('n', '-')}: {c.status}  {_headline(c)}")
    return _finish(certs, out)


def _headline(c: verify.Certificate) -> str:
    p = c.payload
    if c.name == "coker_g0":
        return f"invariant factors {p['invariant_factors']}"
    if c.name == "iwahori":
        return f"cokernel {p['cokernel']['torsion']}"
    return c.anchor


def cmd_vdp(args, cfg, out: Path) -> int:
    tree = tree_for(cfg["field"])
    fld = tree.field
    win = tree.window(TN, args.n)
    if args.cocycle:
        g = random_element(fld, MAX_COMPACT, args.seed)
        if args.cocycle == "j":
            current = j_cocycle(tree, tree.end(1, 0))(g)
        elif args.cocycle == "theta":
            current = theta_current(tree, g)
        else:
            current = beta_current(tree, args.n, g)
        label = f"{args.cocycle}(g), g = {[fld.to_str(x) for x in g.m]}"
    else:
        factors = args.factor or ["1:0:1", "0:1:-1"]
        parsed = []
        for spec in factors:
            parts = spec.split(":")
            if len(parts) != 3:
                raise UsageError(f"bad --factor {spec!r}: expected X:Y:M")
            try:
                parsed.append((tree.end(fld.parse(parts[0]), fld.parse(parts[1])), int(parts[2])))
            except (ValueError, ZeroDivisionError, FieldError) as exc:
                raise UsageError(f"bad --factor {spec!r}: {exc}") from exc
        try:
            current = transform(tree, FormalUnit(tuple(parsed)))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        label = " * ".join(f"l[{s.rsplit(':', 1)[0]}]^{s.rsplit(':', 1)[1]}" for s in factors)
    values = current.on_edges(win).values
    stem = f"vdp-{args.cocycle or 'unit'}-n{args.n}"
    write_atomic(out / f"{stem}.dot", win.to_dot(values, name="vdp"))
    payload = {"current": label, "window": win.to_json(), "edge_values": values}
    write_atomic(out / f"{stem}.json", json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=False) + "\n")
    print(f"{label}: {sum(1 for v in values if v)} nonzero edges out of {len(values)}")
    print(f"wrote {out / (stem + '.dot')}")
    return EXIT_OK


def cmd_oracle(args, cfg, out: Path) -> int:
    tree = tree_for(cfg["field"])
    tag = GROUPS[args.group]
    try:
        action = oracle.current_action(tree, tag, args.n, level=args.level)
        H0, _ = oracle.h0(action)
        H1 = oracle.h1(action) if not args.skip_h1 else None
    except TooLarge as exc:
        raise UsageError(f"oracle too large: {exc}") from exc
    q, n = tree.q, args.n
    report = {"group": args.group, "order": len(action.quotient), "rank": action.rank, "flags": action.flags}
    print(f"|Q| = {len(action.quotient)}, rank {action.rank}")
    print(f"H⁰ = {H0.pretty()}")
    report["h0"] = H0.to_json()
    if H1 is not None:
        print(f"H¹ = {H1.pretty()}")
        report["h1"] = H1.to_json()
    extra = []
    if tag == MAX_COMPACT:
        vw = tree.window(TN, n)
        z = oracle.delta_cocycle(action, CochainVector.indicator(vw, VERTICES, [tree.v(0)]))
        order = oracle.class_order_in_h1(action, z)
        expected = q**n * (q + 1)
        print(f"class order of delta(1_v0) = {order} (expected {expected})")
        report["class_order"] = order
        report["expected"] = expected
        predicted = [expected]
        if order != expected:
            extra.append({"name": "oracle_class_order", "got": order, "expected": expected})
    else:
        predicted = [q ** (n + 1)]
    if H1 is not None:
        ok = list(H1.torsion) == predicted and H1.free_rank == 0
        print(f"matches cohom: {'yes' if ok else 'no'}")
        report["matches_cohom"] = ok
        if not ok:
            extra.append({"name": "oracle_h1", "got": H1.to_json(), "expected": predicted})
    write_atomic(out / f"oracle-{args.group}-n{n}.json", json.dumps(report, sort_keys=True, indent=1, ensure_ascii=False) + "\n")
    if extra:
        print(json.dumps({"status": "fail", "failed": extra}, sort_keys=True))
        return EXIT_FAIL
    return EXIT_OK


def cmd_all(args, cfg, out: Path) -> int:
    previous = {}
    stale = []
    if out.is_dir():
        for path in sorted(out.glob("*.json")):
            if path.name in ("summary.json",):
                continue
            text = path.read_text(encoding="utf-8")
            try:
                data = json.loads(text)
            except json.JSONDecodeError:
                continue
            if "checksum" not in data:
                continue
            try:
                verify.load_certificate(text)
                previous[path.name] = text
            except verify.CertificateError as exc:
                stale.append({"name": path.name, "error": str(exc)})
        if previous or stale:
            print(f"re-verified {len(previous)} stored certificates, {len(stale)} rejected")
    jobs = [(cfg["field"], "g0_global", 0, args.seed)]
    for n in range(args.n + 1):
        for name in ("sigma_closed_forms", "coker_g0", "iwahori", "crt_and_diagram", "pstar_j"):
            jobs.append((cfg["field"], name, n, args.seed))
    texts = run_jobs(jobs, args.jobs)
    certs = store(out, texts)
    changed = [
        {"name": cert_filename(c), "error": "differs from stored copy"}
        for c, t in zip(certs, texts)
        if cert_filename(c) in previous and previous[cert_filename(c)] != t
    ]
    rows = [
        {"anchor": c.anchor, "name": c.name, "q": c.config["q"], "n": c.config.get("n"), "status": c.status, "checksum": c.checksum}
        for c in certs
    ]
    rows.sort(key=lambda r: (r["anchor"], r["name"], -1 if r["n"] is None else r["n"]))
    write_atomic(out / "summary.json", json.dumps(rows, sort_keys=True, indent=1, ensure_ascii=False) + "\n")
    lines = [f"{'status':<6} {'name':<18} {'q':>3} {'n':>3}  anchor"]
    for r in rows:
        n = "-" if r["n"] is None else r["n"]
        lines.append(f"{r['status']:<6} {r['name']:<18} {r['q']:>3} {n:>3}  {r['anchor']}")
    table = "\n".join(lines) + "\n"
    write_atomic(out / "summary.txt", table)
    print(table, end="")
    return _finish(certs, out, stale + changed)


def cmd_check(args, cfg, out: Path) -> int:
    bad = []
    for name in args.files:
        try:
            cert = verify.load_certificate(Path(name).read_text(encoding="utf-8"))
            print(f"{name}: {cert.status}")
            if not cert.passed:
                bad.append({"name": name, "error": "status fail"})
        except (OSError, verify.CertificateError, json.JSONDecodeError) as exc:
            print(f"{name}: rejected ({exc})")
            bad.append({"name": name, "error": str(exc)})
    if bad:
        print(json.dumps({"status": "fail", "failed": bad}, sort_keys=True))
        return EXIT_FAIL
    return EXIT_OK


def _finish(certs, out: Path, extra: list[dict] | None = None) -> int:
    report = failure_report(certs, extra)
    print(f"output: {out}")
    if report["status"] == "fail":
        print(json.dumps(report, sort_keys=True, ensure_ascii=False))
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=2, help="residue characteristic")
    common.add_argument("--f", type=int, default=1, help="residue degree, q = p^f")
    common.add_argument("--modulus", help="coefficients of the F_q modulus, constant term first, comma separated")
    common.add_argument("--backend", choices=["rational", "laurent"], help="rational (Q_p) or laurent (F_q((t))); default rational when f = 1")
    common.add_argument("--n", type=int, default=2, help="window size")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="btlab-out", help="output root; runs go to <out>/<config digest>/")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for certificates")

    parser = argparse.ArgumentParser(prog="btlab", description="Exact computations on the Bruhat-Tits tree of PGL2.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tree", parents=[common], help="export a window as DOT or JSON")
    p.add_argument("--kind", choices=["tn", "tprime"], default="tn")
    p.add_argument("--dot", action="store_true", help="write Graphviz DOT instead of JSON")

    for name, hlp in (("orbits", "orbit tables"), ("sigma", "Sigma on invariants and its SNF")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--group", choices=sorted(GROUPS), default="g0")

    p = sub.add_parser("cohom", parents=[common], help="cohomology certificates")
    p.add_argument("--cert", action="append", choices=COHOM_CERTS, help="certificate to build (repeatable, default coker_g0)")

    p = sub.add_parser("vdp", parents=[common], help="evaluate a current on T_n")
    p.add_argument("--factor", action="append", metavar="X:Y:M", help="linear form with kernel [X:Y] to the power M (repeatable)")
    p.add_argument("--cocycle", choices=["j", "theta", "beta"], help="evaluate a cocycle at a seeded g in G_0 instead")

    p = sub.add_parser("oracle", parents=[common], help="brute-force H^0, H^1 and the delta class order")
    p.add_argument("--group", choices=sorted(GROUPS), default="g0")
    p.add_argument("--level", type=int, help="congruence level of the finite quotient")
    p.add_argument("--skip-h1", action="store_true", help="only compute H^0 and the class order")

    sub.add_parser("all", parents=[common], help="every certificate for n = 0..N plus a summary table")

    p = sub.add_parser("check", parents=[common], help="re-verify stored certificate files")
    p.add_argument("files", nargs="+")
    return parser


COMMANDS = {
    "tree": cmd_tree,
    "orbits": cmd_orbits,
    "sigma": cmd_sigma,
    "cohom": cmd_cohom,
    "vdp": cmd_vdp,
    "oracle": cmd_oracle,
    "all": cmd_all,
    "check": cmd_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = run_config(args)
        out = run_dir(args, cfg)
        return COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"btlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
