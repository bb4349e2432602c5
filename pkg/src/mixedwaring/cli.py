"""Command-line interface: ``waring {feasibility,represent,verify,ternary,scan,selftest}``.

Exit statuses: 0 success, 2 input error, 3 construction failure,
4 budget exhaustion, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Optional, Sequence

from .certificate import load_certificate, verify_certificate
from .descent import ternary_hypotheses
from .errors import InputError, WaringError
from .feasibility import MODES, ExponentTuple, check_feasibility
from .pipeline import RunLog, represent
from .policy import DESK, PAPER, BoundPolicy
from .scan import DEFAULT_X_CAP, scan
from .ternary import FOUND, check_mod16, count_representations, solve_ternary

CONFIG_ENV = "WARING_CONFIG"
EXIT_OK, EXIT_INPUT, EXIT_CONSTRUCTION, EXIT_BUDGET, EXIT_VERIFY = 0, 2, 3, 4, 5
MIN_TAIL_EXPONENT = 3

_POLICY_NAMES = {"desk": DESK, DESK: DESK, "paper": PAPER, PAPER: PAPER}


def parse_exponents(text: str) -> ExponentTuple:
    k = ExponentTuple.parse(text)
    low = [e for e in k.values if e < MIN_TAIL_EXPONENT]
    if low:
        raise InputError(
            f"tail exponent {low[0]} is below {MIN_TAIL_EXPONENT}; the squares and cubes 2,2,3,3 are already fixed"
        )
    return k


def parse_n(text: str) -> int:
    try:
        n = int(text.replace("_", ""))
    except ValueError:
        raise InputError(f"not an integer: {text!r}") from None
    if n < 1:
        raise InputError("n must be positive")
    return n


def load_config(path: Optional[str]) -> dict:
    """Defaults from a JSON object; keys are the long option names (dashes or underscores)."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def build_policy(args: argparse.Namespace) -> BoundPolicy:
    name = _POLICY_NAMES.get(args.policy)
    if name is None:
        raise InputError(f"unknown policy {args.policy!r}")
    kw = {
        "eps": Fraction(str(args.epsilon)),
        "nu": Fraction(str(args.nu)),
        "retries": int(args.retries),
        "budget_z": int(args.budget_z),
        "rho_per_value": int(args.budget_rho),
    }
    if args.omega is not None:
        kw["omega"] = Fraction(str(args.omega))
    if args.c is not None:
        kw["c"] = Fraction(str(args.c))
    try:
        return BoundPolicy(**kw) if name == DESK else BoundPolicy.paper(**kw)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad policy value: {exc}") from None


def _emit(args: argparse.Namespace, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


# --- subcommands ----------------------------------------------------------------


def cmd_feasibility(args: argparse.Namespace) -> int:
    k = parse_exponents(args.exponents)
    v = check_feasibility(k)
    lines = [f"exponents {list(k.values)}", f"gamma = {v.gamma}"]
    if v.gamma_tilde is not None:
        lines.append(f"gamma~ = {v.gamma_tilde}")
    lines += [r.describe() for r in v.routes]
    lines.append("modes admitted: " + (", ".join(m for m in MODES if v.admits(m)) or "none"))
    payload = v.as_dict()
    payload["modes"] = {m: v.admits(m) for m in MODES}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _represent_one(job: tuple) -> tuple:
    """Worker entry point; returns (n, status, certificate json or error dict, log lines)."""
    n, exponents, mode, policy_dict, seed = job
    trace = RunLog()
    try:
        cert = represent(n, exponents, mode, BoundPolicy.from_dict(policy_dict), seed, trace)
    except WaringError as exc:
        return n, exc.exit_code, exc.as_dict(), trace.lines
    return n, EXIT_OK, cert.to_json(), trace.lines


def cmd_represent(args: argparse.Namespace) -> int:
    k = parse_exponents(args.exponents)
    if args.mode not in MODES:
        raise InputError(f"unknown mode {args.mode!r}")
    if not check_feasibility(k).admits(args.mode):
        raise InputError(f"mode {args.mode} is not admitted for exponents {list(k.values)}")
    policy = build_policy(args)
    ns = [parse_n(s) for s in args.n]
    for n in ns:
        if n < policy.min_n:
            raise InputError(f"n = {n} below the policy minimum {policy.min_n}")
    jobs = [(n, k.values, args.mode, policy.as_dict(), args.seed) for n in ns]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_represent_one, jobs))
    else:
        results = [_represent_one(j) for j in jobs]

    out = Path(args.out) if args.out else None
    if out is not None and len(ns) > 1:
        out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    summary = []
    for n, code, body, lines in results:
        if code == EXIT_OK:
            cert = json.loads(body)
            if out is not None:
                target = out / f"certificate-{n}.json" if len(ns) > 1 else out
                target.write_text(body)
            summary.append({"n": str(n), "status": "ok", "x": cert["x"], "y": cert["y"], "log": lines})
        else:
            status = status or code
            summary.append({"n": str(n), "status": "failed", "exit": code, "failure": body, "log": lines})
    if args.format == "json":
        print(json.dumps(summary if len(ns) > 1 else summary[0], sort_keys=True, indent=2))
    else:
        for row in summary:
            for line in row["log"]:
                print(f"  {line}")
            if row["status"] == "ok":
                x1, x2, x3, x4 = row["x"]
                tail = " + ".join(f"{y}^{e}" for y, e in zip(row["y"], k.original()))
                print(f"{row['n']} = {x1}^2 + {x2}^2 + {x3}^3 + {x4}^3 + {tail}")
            else:
                print(f"{row['n']}: FAILED ({row['failure']['error']}): {row['failure']['reason']}")
    return status


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        text = Path(args.certificate).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {args.certificate}: {exc}") from None
    doc = load_certificate(text)
    rep = verify_certificate(doc)
    first = rep.first_failure
    payload = {
        "ok": rep.ok,
        "first_failure": None if first is None else {"check": first[0], "detail": first[1]},
        "checks": [{"check": c, "ok": ok, "detail": d} for c, ok, d in rep.checks],
    }
    if rep.ok:
        text_out = f"PASS ({len(rep.checks)} checks)"
    else:
        text_out = "\n".join([line for line in rep.lines() if line.startswith("FAIL")] + [f"FAIL at {first[0]}: {first[1]}"])
    _emit(args, payload, text_out)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_ternary(args: argparse.Namespace) -> int:
    N, p = parse_n(args.N), parse_n(args.p)
    hyp = ternary_hypotheses(N, p)
    warnings = []
    if gcd(N, 6 * p) != 1:
        warnings.append("warning: gcd(N, 6p) > 1, hypothesis (i) fails; attempting anyway")
    for w in warnings:
        print(w, file=sys.stderr)
    payload: dict = {
        "N": str(N),
        "p": str(p),
        "mod16": check_mod16(N, p),
        "hypotheses": {k: str(v) for k, v in hyp.items()},
    }
    lines = [f"N = {N}, p = {p}", f"mod-16 soluble: {payload['mod16']}"]
    lines += [f"{k}: {v}" for k, v in payload["hypotheses"].items()]
    if args.count:
        cnt = count_representations(N, p, cap=args.count_cap)
        payload["count"] = cnt
        lines.append(f"positive representations: {cnt}")
        _emit(args, payload, "\n".join(lines))
        return EXIT_OK
    res = solve_ternary(N, p, positive=True, budget_z=args.budget_z, rho_per_value=args.budget_rho, seed=args.seed)
    payload.update(status=res.status, tried=res.tried, skipped=res.skipped)
    if res.status == FOUND:
        s = res.solution
        payload["solution"] = [str(s.x), str(s.y), str(s.z)]
        lines.append(f"({s.x}, {s.y}, {s.z})")
    else:
        lines.append(f"no solution: {res.status} after {res.tried} values of z")
    _emit(args, payload, "\n".join(lines))
    if res.status == FOUND:
        return EXIT_OK
    return EXIT_BUDGET if res.status != "proven-absent" else EXIT_CONSTRUCTION


def cmd_scan(args: argparse.Namespace) -> int:
    k = parse_exponents(args.exponents)
    X = parse_n(args.X)
    rep = scan(k.values, X, x_cap=args.x_cap)
    form = ",".join(str(e) for e in [2, 2, 3, 3, *k.values])
    text = (
        f"form ({form}), X = {X}: {len(rep.exceptions)} unrepresented "
        f"({rep.seconds:.2f}s, {rep.cores} cores)\n" + " ".join(map(str, rep.exceptions))
    )
    _emit(args, rep.as_dict(), text)
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest

    rows = run_selftest()
    ok = all(r[1] for r in rows)
    payload = {"ok": ok, "checks": [{"check": n, "ok": o, "detail": d} for n, o, d in rows]}
    _emit(args, payload, "\n".join(f"{'PASS' if o else 'FAIL'} {n}: {d}" for n, o, d in rows))
    return EXIT_OK if ok else EXIT_VERIFY


# --- parser ------------------------------------------------------------------------


def build_parser(config: Optional[dict] = None) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--config", help=f"JSON defaults file (also ${CONFIG_ENV})")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--mode", default="grh", choices=MODES)
    run.add_argument("--policy", default="desk", choices=sorted(_POLICY_NAMES))
    run.add_argument("--omega", default=None)
    run.add_argument("--nu", default="1/100")
    run.add_argument("--epsilon", default="1/1000")
    run.add_argument("--c", default=None)
    run.add_argument("--retries", type=int, default=8)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out")

    budgets = argparse.ArgumentParser(add_help=False)
    budgets.add_argument("--budget-z", type=int, default=10**6)
    budgets.add_argument("--budget-rho", type=int, default=20_000)
    budgets.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="waring", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("feasibility", parents=[common], help="route verdicts for an exponent tuple")
    f.add_argument("exponents", nargs="?", default=None)
    f.add_argument("--exponents", dest="exponents_opt")
    f.set_defaults(func=cmd_feasibility)

    r = sub.add_parser("represent", parents=[common, run, budgets], help="construct and certify a representation")
    r.add_argument("n", nargs="+")
    r.add_argument("--exponents", default="6,6")
    r.set_defaults(func=cmd_represent)

    v = sub.add_parser("verify", parents=[common], help="check a certificate file")
    v.add_argument("certificate")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("ternary", parents=[common, budgets], help="solve or count N = x^2 + y^2 + 6 p z^2")
    t.add_argument("N")
    t.add_argument("p")
    t.add_argument("--count", action="store_true")
    t.add_argument("--count-cap", type=int, default=10**8)
    t.set_defaults(func=cmd_ternary)

    s = sub.add_parser("scan", parents=[common], help="exhaustive exceptions up to X")
    s.add_argument("X")
    s.add_argument("--exponents", default="6,6")
    s.add_argument("--x-cap", type=int, default=DEFAULT_X_CAP)
    s.set_defaults(func=cmd_scan)

    st = sub.add_parser("selftest", parents=[common], help="quick internal consistency checks")
    st.set_defaults(func=cmd_selftest)

    if config:
        for action_parser in (f, r, v, t, s, st):
            known = {a.dest for a in action_parser._actions}
            action_parser.set_defaults(**{k: val for k, val in config.items() if k in known})
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        parser = build_parser(load_config(known.config))
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code == 0 else EXIT_INPUT
        if args.command == "feasibility":
            args.exponents = args.exponents or args.exponents_opt
            if not args.exponents:
                raise InputError("feasibility needs an exponent list")
        return args.func(args)
    except WaringError as exc:
        print(f"error: {exc.reason}", file=sys.stderr)
        return exc.exit_code
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
