"""Thin command-line client for the fibcurve service.

Each subcommand marshals its arguments into the same request models the
FastAPI service consumes.  By default the request is dispatched
in-process; --server sends it to a running instance over HTTP instead.
Exit codes: 0 success/accept, 1 composite/reject/no, 2 inconclusive,
3 usage errors.
"""

import argparse
import json
import sys


def _dispatch(endpoint, payload, server):
    if server:
        import httpx

        resp = httpx.post(f"{server.rstrip('/')}{endpoint}", json=payload, timeout=None)
        if resp.status_code >= 400:
            print(f"error: {resp.status_code} {resp.text}", file=sys.stderr)
            raise SystemExit(3)
        return resp.json()
    from fastapi.testclient import TestClient

    from .service import app

    with TestClient(app) as client:
        resp = client.post(endpoint, json=payload)
        if resp.status_code >= 400:
            print(f"error: {resp.status_code} {resp.text}", file=sys.stderr)
            raise SystemExit(3)
        return resp.json()


def _emit(obj, as_json):
    if as_json:
        print(json.dumps(obj, sort_keys=True, indent=2))
    return obj


def cmd_construct(args):
    payload = {"index": args.index, "seed": args.seed}
    if args.config:
        from .config import load_config

        payload["config"] = load_config(args.config).to_dict()
    out = _dispatch("/construct", payload, args.server)
    if args.json:
        print(json.dumps(out.get("certificate"), sort_keys=True, indent=2))
    else:
        cert = out.get("certificate") or {}
        chosen = cert.get("chosen") or {}
        print(f"verdict: {out['verdict']}")
        if chosen:
            print(
                f"q={args.index}  D={chosen['D']}  p={chosen['p']}  "
                f"curve a={chosen['curve']['a']} b={chosen['curve']['b']}  "
                f"order={chosen['order']}"
            )
        if out.get("reason"):
            print(f"reason: {out['reason']}")
    return out["exit_code"]


def cmd_check(args):
    out = _dispatch("/check", {"index": args.index, "seed": args.seed}, args.server)
    if args.json:
        print(json.dumps(out["report"], sort_keys=True, indent=2))
    else:
        print(f"verdict: {out['verdict']}")
        stage = out["report"].get("failing_stage")
        if stage:
            print(f"failing stage: {stage}")
    return out["exit_code"]


def cmd_verify_cert(args):
    try:
        with open(args.file) as fh:
            cert = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(f"cannot read certificate: {e}", file=sys.stderr)
        return 3
    out = _dispatch("/verify-cert", {"certificate": cert}, args.server)
    print("accept" if out["accepted"] else f"reject({out['reason']})")
    return out["exit_code"]


def cmd_verify(args):
    try:
        with open(args.file) as fh:
            cert = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(f"cannot read certificate: {e}", file=sys.stderr)
        return 3
    out = _dispatch("/verify-passes", {"certificate": cert}, args.server)
    if out.get("error"):
        print(out["error"], file=sys.stderr)
        return 2
    print("survived" if out["survived"] else "removed")
    for row in out["elkies"] + out["eigenvalue"]:
        print("  " + " ".join(row))
    return 0 if out["survived"] else 1


def cmd_fib(args):
    out = _dispatch("/fib", {"n": args.n}, args.server)
    print(out["value"] if not args.json else json.dumps(out))
    return 0


def cmd_hilbert(args):
    payload = {
        "discriminant": args.discriminant,
        "method": args.method,
        "modulus": args.mod,
    }
    out = _dispatch("/hilbert", payload, args.server)
    if not out["ok"]:
        print(f"error: {out['error']}", file=sys.stderr)
        return 2
    _emit(out, args.json)
    if not args.json:
        for name, coeffs in out["methods"].items():
            text = " + ".join(
                f"{c}*X^{i}" if i else c
                for i, c in enumerate(coeffs)
                if c not in ("0",)
            )
            print(f"{name}: H_{args.discriminant}(X) = {text}")
        if out.get("agree") is not None:
            print(f"methods agree: {out['agree']}")
    if out.get("agree") is False:
        return 1
    return 0


def cmd_cornacchia(args):
    out = _dispatch("/cornacchia", {"d": args.d, "m": str(args.m)}, args.server)
    if not out["ok"]:
        print(f"error: {out['error']}", file=sys.stderr)
        return 3
    if out["solvable"]:
        print(f"x={out['x']} y={out['y']}")
        return 0
    print(f"no solution ({out.get('error', '')})")
    return 1


def cmd_sqrtmod(args):
    out = _dispatch("/sqrtmod", {"a": str(args.a), "p": str(args.p)}, args.server)
    if out["ok"]:
        print(out["root"])
        return 0
    print(out["error"], file=sys.stderr)
    if out.get("composite_factor"):
        print(f"factor: {out['composite_factor']}", file=sys.stderr)
    return 1


def cmd_classgroup(args):
    out = _dispatch("/classgroup", {"discriminant": args.discriminant}, args.server)
    if not out["ok"]:
        print(f"error: {out['error']}", file=sys.stderr)
        return 2
    if args.json:
        _emit(out, True)
        return 0
    print(f"D = {out['discriminant']}   h(D) = {out['class_number']}")
    print(f"reduced forms: {out['reduced_forms']}")
    print(f"prime forms (ell <= {out['prime_form_bound']}): {out['prime_forms']}")
    print(f"GGZ lower bound: {out['ggz_lower_bound']:.6f}")
    return 0


def cmd_schoof(args):
    try:
        a_str, b_str = args.curve.split(",")
        a, b = int(a_str), int(b_str)
    except ValueError:
        print("--curve expects 'a,b'", file=sys.stderr)
        return 3
    out = _dispatch("/schoof", {"a": a, "b": b, "p": args.mod}, args.server)
    if not out["ok"]:
        print(f"error: {out['error']}", file=sys.stderr)
        return 2
    print(f"trace = {out['trace']}   order = {out['order']}")
    return 0


def cmd_serve(args):
    import uvicorn

    uvicorn.run("fibcurve.service:app", host=args.host, port=args.port)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fibcurve",
        description="Elliptic curves of Fibonacci prime order: construction, "
        "certificates, and the supporting sub-algorithms.",
    )
    parser.add_argument(
        "--server",
        default=None,
        help="URL of a running fibcurve service; default runs in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="run the full construction for an index")
    c.add_argument("--index", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--config", default=None, help="key=value config file")
    c.add_argument("--json", action="store_true", help="print the certificate JSON")
    c.set_defaults(func=cmd_construct)

    c = sub.add_parser("check", help="primality stack only, no curve search")
    c.add_argument("--index", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("verify-cert", help="re-verify a certificate file")
    c.add_argument("file")
    c.set_defaults(func=cmd_verify_cert)

    c = sub.add_parser(
        "verify", help="re-run the Elkies and eigenvalue passes on a certificate"
    )
    c.add_argument("file")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("fib", help="print the n-th Fibonacci number")
    c.add_argument("n", type=int)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_fib)

    c = sub.add_parser("hilbert", help="Hilbert class polynomial")
    c.add_argument("-D", "--discriminant", type=int, required=True)
    c.add_argument("--mod", type=int, default=None)
    c.add_argument("--method", choices=("analytic", "crt", "both"), default="analytic")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_hilbert)

    c = sub.add_parser("cornacchia", help="solve x^2 + d y^2 = m")
    c.add_argument("-d", type=int, required=True)
    c.add_argument("-m", type=int, required=True)
    c.set_defaults(func=cmd_cornacchia)

    c = sub.add_parser("sqrtmod", help="square root mod a probable prime")
    c.add_argument("-a", type=int, required=True)
    c.add_argument("-p", type=int, required=True)
    c.set_defaults(func=cmd_sqrtmod)

    c = sub.add_parser("classgroup", help="reduced forms, h(D), prime forms, GGZ")
    c.add_argument("-D", "--discriminant", type=int, required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_classgroup)

    c = sub.add_parser("schoof", help="trace of Frobenius for an explicit curve")
    c.add_argument("--curve", required=True, help="a,b")
    c.add_argument("--mod", type=int, required=True)
    c.set_defaults(func=cmd_schoof)

    c = sub.add_parser("serve", help="run the HTTP service")
    c.add_argument("--host", default="127.0.0.1")
    c.add_argument("--port", type=int, default=8471)
    c.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors; the contract wants 3
        raise SystemExit(3 if e.code not in (0, None) else 0)
    code = args.func(args)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
