"""Command-line front end: sweeps, experiments, and deterministic reports.

Every subcommand echoes its config and seed into the report; identical
configs produce byte-identical report files.  Exit codes: 0 all checks pass,
1 check failures (counterexamples listed), 2 config or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .constructions import (
    build_ctmn_pair,
    build_two_scale_pair,
    coinflip_even_set,
    ctmn_preset,
    lifted_bohr_pair,
    two_scale_preset,
)
from .density import IntWindow, density_profile, schnirelmann
from .equidist import (
    TorusInterval,
    TorusPoint,
    almost_period_search,
    bohr_members,
    discrepancy_exact,
)
from .inverse import StructureCertificate, detect_structure, find_popular_cover_small
from .theorems import (
    cauchy_davenport_check,
    cauchy_davenport_sweep,
    kneser_cyclic_check,
    kneser_identity_sweep,
    kneser_random_sweep,
    kneser_sweep,
    vosper_classify,
    vosper_sweep,
)
from .uniformity import (
    gowers_cyclic,
    gowers_interval,
    regularity_decompose,
    u1_scale_estimate,
    u2_scale_estimate,
)
from .zq import ZqSet, popular_sumset, sumset


class ConfigError(ValueError):
    pass


def parse_theta(text: str) -> TorusPoint:
    """Named constants, 'p/q' rationals, or float literals."""
    named = {
        "phi": (math.sqrt(5) - 1) / 2,
        "sqrt2": math.sqrt(2) % 1.0,
        "e": math.e % 1.0,
        "pi": math.pi % 1.0,
    }
    if text in named:
        return TorusPoint.from_float(named[text])
    if "/" in text:
        p, q = text.split("/", 1)
        return TorusPoint.rational(int(p), int(q))
    return TorusPoint.from_float(float(text))


def parse_interval(text: str) -> TorusInterval:
    left, length = (float(Fraction(part)) for part in text.split(","))
    return TorusInterval(left, length)


def load_zqset(path: str) -> ZqSet:
    raw = Path(path).read_text()
    if raw.lstrip().startswith("{"):
        return ZqSet.from_json(raw)
    return ZqSet.from_text(raw)


def load_pair(path: str) -> tuple[ZqSet, ZqSet]:
    obj = json.loads(Path(path).read_text())
    q = int(obj["Q"])
    return ZqSet.from_elements(q, obj["A"]), ZqSet.from_elements(q, obj["B"])


def load_signal(path: str) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 1:
        return arr.astype(complex)
    raise ConfigError("signal must be a flat array or [re, im] pairs")


def emit_report(results: dict, config: dict, fmt: str, out: Optional[str], counterexamples=None) -> str:
    """Serialize the report; returns the rendered text after writing it."""
    if fmt == "json":
        payload = {
            "tool_version": __version__,
            "config_echo": config,
            "seed": config.get("seed"),
            "results": results,
            "counterexamples": counterexamples or [],
        }
        text = json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"
    elif fmt == "csv":
        rows = results.get("rows")
        if rows is None:
            raise ConfigError("csv output needs tabular results")
        header = results.get("header", [f"c{i}" for i in range(len(rows[0]))])
        lines = [",".join(header)]
        lines += [",".join(repr(c) if isinstance(c, float) else str(c) for c in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    return text


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def default_out(args, name: str) -> Optional[str]:
    if args.out:
        return args.out
    root = os.environ.get("ADDCOMB_OUT_DIR")
    if root:
        return str(Path(root) / f"{name}.{args.format}")
    return None


def _chunked_random_sweep(q, trials, eps, seed, jobs):
    """Deterministic split: chunk c uses seed (seed, c); merge in order."""
    chunk = 1000
    tasks = [(q, min(chunk, trials - i), eps, (seed, i // chunk)) for i in range(0, trials, chunk)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    tested = sum(p["tested"] for p in parts)
    passed = sum(p["passed"] for p in parts)
    cxs = [c for p in parts for c in p["counterexamples"]]
    return {"tested": tested, "passed": passed, "counterexamples": cxs}


def _run_chunk(task):
    q, trials, eps, seed_pair = task
    seed = int(np.random.SeedSequence(seed_pair).generate_state(1)[0])
    return kneser_random_sweep(q, trials, eps, seed=seed).to_dict()


# --- subcommand handlers (each returns (exit_code, results, counterexamples)) ---


def cmd_sumset(args):
    a, b = load_zqset(args.a), load_zqset(args.b)
    s = sumset(a, b)
    return 0, {"Q": s.q, "elements": s.elements(), "size": len(s)}, []


def cmd_popular(args):
    a, b = load_zqset(args.a), load_zqset(args.b)
    s = popular_sumset(a, b, args.delta)
    return 0, {"Q": s.q, "elements": s.elements(), "size": len(s), "delta": args.delta}, []


def cmd_direct_sweep(args):
    if args.theorem == "cauchy-davenport":
        r = cauchy_davenport_sweep(args.p, slack=args.slack)
    elif args.theorem == "vosper":
        r = vosper_sweep(args.p)
    elif args.theorem == "kneser":
        if args.random_trials:
            d = _chunked_random_sweep(args.q, args.random_trials, args.eps, args.seed, args.jobs)
            code = 0 if d["passed"] == d["tested"] else 1
            return code, {"tested": d["tested"], "passed": d["passed"]}, d["counterexamples"]
        r = kneser_sweep(args.q, args.eps, slack=args.slack)
    elif args.theorem == "kneser-identity":
        r = kneser_identity_sweep(args.q)
    else:
        raise ConfigError(f"unknown theorem {args.theorem!r}")
    code = 0 if r.ok else 1
    return code, {"tested": r.tested, "passed": r.passed}, r.counterexamples


def cmd_inverse_detect(args):
    a, b = load_pair(args.input)
    report = detect_structure(a, b, eps=args.eps, eta=args.eta, k=args.k, index_cap=args.index_cap, delta=args.delta)
    return 0, report.to_dict(), []


def cmd_popular_cover(args):
    a, b = load_zqset(args.a), load_zqset(args.b)
    cover = find_popular_cover_small(a, b, args.delta, args.eps, budget=args.budget)
    if cover is None:
        return 0, {"found": False}, []
    return 0, {
        "found": True,
        "A_prime": cover.a_prime.elements(),
        "B_prime": cover.b_prime.elements(),
        "removed": cover.removed,
        "exhaustive": cover.exhaustive,
    }, []


def cmd_discrepancy(args):
    theta = parse_theta(args.theta)
    pts = (np.arange(1, args.n + 1) * theta.value) % 1.0
    r = discrepancy_exact(pts)
    return 0, {
        "N": r.n,
        "value": r.value,
        "kind": r.kind,
        "interval": [r.interval.left, r.interval.length],
    }, []


def cmd_bohr(args):
    theta = parse_theta(args.theta)
    lo, hi = (int(x) for x in args.range.split(","))
    w = bohr_members(theta, parse_interval(args.interval), lo, hi)
    members = [int(m) for m in w.members()]
    return 0, {"members": members, "count": len(members), "range": [lo, hi]}, []


def cmd_almost_period(args):
    alphas = [float(Fraction(x)) if "/" in x else float(x) for x in args.alphas.split(",")]
    m = almost_period_search(alphas, args.h, args.x, args.eps)
    return 0, {"m": m, "found": m is not None}, []


def cmd_gowers(args):
    f = load_signal(args.signal)
    if args.cyclic:
        val = gowers_cyclic(f, args.k)
    else:
        val = gowers_interval(f, args.k)
    return 0, {"k": args.k, "value": val, "cyclic": bool(args.cyclic)}, []


def cmd_scale_norm(args):
    f = load_signal(args.signal)
    ns = [int(x) for x in args.n.split(",")]
    hs = [int(x) for x in args.h.split(",")]
    if len(ns) != len(hs):
        raise ConfigError("N and H lists must pair up")
    est = u1_scale_estimate if args.k == 1 else u2_scale_estimate
    rows = [(n, h, est(f, n, h)) for n, h in zip(ns, hs)]
    return 0, {"header": ["N", "H", "value"], "rows": rows}, []


def cmd_regularity(args):
    f = load_signal(args.signal).real
    r = regularity_decompose(f, args.eps)
    return 0, {
        "success": r.success,
        "achieved_u2": r.achieved_u2,
        "iterations": r.iterations,
        "frequencies": [[alpha, abs(c)] for alpha, c in r.frequencies],
        "structured_mean": float(r.structured.mean()),
    }, []


def cmd_density(args):
    w = _load_intwindow(args.set)
    checkpoints = [int(x) for x in args.checkpoints.split(",")]
    prof = density_profile(w, checkpoints)
    return 0, {"header": ["N", "value"], "rows": prof.rows()}, []


def cmd_schnirelmann(args):
    w = _load_intwindow(args.set)
    sigma = schnirelmann(w, args.n)
    return 0, {"N": args.n, "sigma": str(sigma), "sigma_float": float(sigma)}, []


def _load_intwindow(path: str) -> IntWindow:
    obj = json.loads(Path(path).read_text())
    return IntWindow.from_members(int(obj["lo"]), int(obj["hi"]), obj["elements"])


def cmd_construct(args):
    params = json.loads(Path(args.params).read_text()) if args.params else {}
    if args.kind in ("coinflip", "bohr-lift") and not args.bound:
        raise ConfigError(f"--bound is required for {args.kind}")
    if args.kind == "coinflip":
        w = coinflip_even_set(args.seed, args.bound)
        payload = {"lo": 1, "hi": args.bound + 1, "elements": [int(m) for m in w.members()]}
    elif args.kind == "ctmn":
        preset = ctmn_preset(params.get("alpha", 0.3), params.get("r", 4.0), params.get("stages", 2))
        bound = args.bound or preset.ks[-1]
        a, b = build_ctmn_pair(preset, bound)
        payload = _pair_payload(a, b, bound)
    elif args.kind == "two-scale":
        preset = two_scale_preset(params.get("h", 2), params.get("alpha", 0.3))
        bound = args.bound or preset.ns[-1]
        a, b = build_two_scale_pair(preset, bound)
        payload = _pair_payload(a, b, bound)
    elif args.kind == "bohr-lift":
        theta = parse_theta(str(params.get("theta", "phi")))
        a, b = lifted_bohr_pair(
            params.get("h", 1),
            theta,
            TorusInterval(*params.get("I", (0.0, 0.2))),
            TorusInterval(*params.get("J", (0.0, 0.3))),
            params.get("a0", 0),
            params.get("b0", 0),
            args.bound,
        )
        payload = _pair_payload(a, b, args.bound)
    else:
        raise ConfigError(f"unknown construction {args.kind!r}")
    return 0, payload, []


def _pair_payload(a: IntWindow, b: IntWindow, bound: int) -> dict:
    return {
        "lo": 1,
        "hi": bound + 1,
        "A": [int(m) for m in a.members()],
        "B": [int(m) for m in b.members()],
    }


def cmd_replay(args):
    report = json.loads(Path(args.report).read_text())
    config = report.get("config_echo", {})
    theorem = config.get("theorem")
    replayed = []
    still_failing = 0
    for cx in report.get("counterexamples", []):
        outcome = _replay_one(theorem, config, cx)
        replayed.append({"instance": cx, "fails_again": outcome})
        still_failing += int(outcome)
    results = {"replayed": len(replayed), "still_failing": still_failing, "details": replayed}
    code = 0 if still_failing == len(replayed) else 1
    return code, results, []


def _replay_one(theorem: str, config: dict, cx: dict) -> bool:
    if theorem == "cauchy-davenport":
        p = cx["p"]
        r = cauchy_davenport_check(p, ZqSet.from_elements(p, cx["A"]), ZqSet.from_elements(p, cx["B"]))
        return not (r.size_sum >= r.bound + config.get("slack", 0))
    if theorem == "vosper":
        p = cx["p"]
        r = vosper_classify(p, ZqSet.from_elements(p, cx["A"]), ZqSet.from_elements(p, cx["B"]))
        return r.satisfied is False
    if theorem == "kneser":
        q, eps = cx["Q"], cx["eps"]
        a = ZqSet.from_elements(q, cx["A"])
        b = ZqSet.from_elements(q, cx["B"])
        r = kneser_cyclic_check(q, a, b, eps)
        slack = config.get("slack", 0)
        if not r.hypothesis_ok:
            return False
        return not ((r.size_sum > r.bound + slack) or (r.size_sum == q))
    raise ConfigError(f"cannot replay theorem {theorem!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="addcomb", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="report file path")
        p.add_argument("--format", default="json", choices=["json", "csv"])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("sumset", help="cyclic sumset of two set files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    common(p)
    p.set_defaults(func=cmd_sumset)

    p = sub.add_parser("popular", help="delta-popular sumset")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--delta", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_popular)

    p = sub.add_parser("direct-sweep", help="exhaustive/random theorem sweeps")
    p.add_argument("--theorem", required=True, choices=["cauchy-davenport", "vosper", "kneser", "kneser-identity"])
    p.add_argument("--p", type=int, default=7)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--slack", type=int, default=0, help="tighten the bound to probe extremal pairs")
    p.add_argument("--random-trials", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_direct_sweep)

    p = sub.add_parser("inverse-detect", help="four-case structure detection")
    p.add_argument("--input", required=True, help='JSON {"Q":..., "A":[...], "B":[...]}')
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--index-cap", type=int, default=4, dest="index_cap")
    p.add_argument("--delta", type=float, default=0.01)
    common(p)
    p.set_defaults(func=cmd_inverse_detect)

    p = sub.add_parser("popular-cover", help="search for a popular-sumset cover")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--budget", type=int, default=200_000)
    common(p)
    p.set_defaults(func=cmd_popular_cover)

    p = sub.add_parser("discrepancy", help="exact discrepancy of (n theta)")
    p.add_argument("--theta", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("bohr", help="Bohr set members on a range")
    p.add_argument("--theta", required=True)
    p.add_argument("--interval", required=True, help="left,length")
    p.add_argument("--range", required=True, help="lo,hi")
    common(p)
    p.set_defaults(func=cmd_bohr)

    p = sub.add_parser("almost-period", help="simultaneous almost-period search")
    p.add_argument("--alphas", required=True, help="comma list")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_almost_period)

    p = sub.add_parser("gowers", help="U^k norm of a signal")
    p.add_argument("--signal", required=True)
    p.add_argument("--k", type=int, required=True, choices=[1, 2])
    p.add_argument("--cyclic", action="store_true", help="treat the signal as living on Z/Q")
    common(p)
    p.set_defaults(func=cmd_gowers)

    p = sub.add_parser("scale-norm", help="windowed scale estimates per (N, H)")
    p.add_argument("--signal", required=True)
    p.add_argument("--n", required=True, help="comma list of N_s")
    p.add_argument("--h", required=True, help="comma list of H_s")
    p.add_argument("--k", type=int, default=1, choices=[1, 2])
    common(p)
    p.set_defaults(func=cmd_scale_norm)

    p = sub.add_parser("regularity", help="structured + pseudorandom decomposition")
    p.add_argument("--signal", required=True)
    p.add_argument("--eps", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_regularity)

    p = sub.add_parser("density", help="density profile of an integer set file")
    p.add_argument("--set", required=True)
    p.add_argument("--checkpoints", required=True)
    common(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("schnirelmann", help="Schnirelmann density up to N")
    p.add_argument("--set", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_schnirelmann)

    p = sub.add_parser("construct", help="generate an example set/pair")
    p.add_argument("--kind", required=True, choices=["coinflip", "ctmn", "two-scale", "bohr-lift"])
    p.add_argument("--params", default=None, help="JSON parameter file")
    p.add_argument("--bound", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("replay", help="re-run the counterexamples in a report")
    p.add_argument("--report", required=True)
    common(p)
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in vars(args).items() if k not in ("func",) and not callable(v)}
    try:
        code, results, counterexamples = args.func(args)
        out = default_out(args, args.command)
        text = emit_report(results, config, args.format, out, counterexamples)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
