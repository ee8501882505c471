"""Command-line entry point: liouville-verify <command> [options].

Exit codes: 0 everything certified or passed, 1 a certified violation,
2 inconclusive results present, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from importlib import resources

from . import __version__
from .errors import DomainError, GatingError
from .exact import RatInterval, get_precision, to_rational, workprec

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64
GOOD = {"certified", "certified-all-n", "verified-on-range", "passed"}
BAD = {"failed", "violated"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument types ----------------------------------------------------------------

def rational(text) -> Fraction:
    try:
        return to_rational(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def int_list(text) -> list[int]:
    try:
        return [int(x) for x in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")


def str_list(text) -> list[str]:
    return [x for x in str(text).replace(",", " ").split() if x]


def read_config(path) -> dict:
    """Flat key = value file; '#' starts a comment; keys mirror long flags."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--config", help="key = value file mirroring the long flags")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--precision", type=int, default=None,
                        help="interval precision in bits (default LIOUVILLE_PRECISION or 128)")

    parser = _Parser(prog="liouville-verify",
                     description="Certified checks for a weighted Bernstein argument.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("claims", parents=[common], help="verify the ten auxiliary inequalities")
    p.add_argument("--n-max", type=int, default=500)
    p.add_argument("--claims", type=int_list, default=list(range(1, 11)))

    p = sub.add_parser("thresholds", parents=[common], help="M_C, M1, M2, U0, Delta")
    p.add_argument("--n", type=int, default=7)
    p.add_argument("--p", type=rational, default=None, help="default: the critical exponent")
    p.add_argument("--lemma", action="store_true", help="also tabulate M2 < M1 over n and p")
    p.add_argument("--n-min", type=int, default=7)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--p-points", type=int, default=20)

    p = sub.add_parser("identities", parents=[common], help="pointwise identity suite")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=int_list, default=[3, 5, 7, 10])
    p.add_argument("--frames", type=str_list, default=["small-gamma", "large-gamma"])
    p.add_argument("--M", type=rational, default=Fraction(1))

    p = sub.add_parser("young", parents=[common], help="Young exponent feasibility")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--choices", type=str_list, default=["small-gamma", "large-gamma"])

    for name, text in (("shoot", "integrate one radial shot"), ("sweep", "shoot from many heights")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--n", type=int, default=5)
        p.add_argument("--p", type=rational, default=Fraction(2))
        p.add_argument("--M", type=rational, default=Fraction(1))
        p.add_argument("--N", type=rational, default=Fraction(1))
        if name == "shoot":
            p.add_argument("--a", type=rational, default=Fraction(1))
            p.add_argument("--r-max", type=float, default=50.0)
        else:
            p.add_argument("--heights", type=int, default=10, help="count, log-spaced in [0.1, 10]")
            p.add_argument("--r-max", type=float, default=200.0, help="range for height 1")

    p = sub.add_parser("report", parents=[common], help="run everything into one document")
    p.add_argument("--n-max", type=int, default=500)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


def parse(argv):
    parser = build_parser()
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = read_config(known.config)
        cmd = next((a for a in argv if not a.startswith("-")), None)
        subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        if cmd in subs.choices:
            target = subs.choices[cmd]
            actions = {a.dest: a for a in target._actions}
            unknown = set(cfg) - set(actions) - {"config"}
            if unknown:
                raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
            for key, value in cfg.items():
                if isinstance(actions.get(key), argparse._StoreTrueAction):
                    if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                        raise UsageError(f"config key {key} needs a boolean, got {value!r}")
                    cfg[key] = value.lower() in ("true", "1", "yes")
            target.set_defaults(**cfg)
    return parser.parse_args(argv)


# -- serialization ---------------------------------------------------------------

def _enc(iv: RatInterval, digits=25):
    return list(iv.decimal_bounds(digits))


def _plain(x):
    """JSON-ready copy: Fractions become strings, intervals [lo, hi]."""
    if isinstance(x, RatInterval):
        return _enc(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, float) and x != x:
        return None
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return x.item()
    return x


def _verdict(name, status, detail=""):
    v = {"name": name, "status": status}
    if detail:
        v["detail"] = detail
    return v


def _check(name, ok, detail=""):
    return _verdict(name, "certified" if ok else "failed", detail)


class Report:
    def __init__(self, command, config, seed=None):
        self.command, self.config, self.seed = command, config, seed
        self.verdicts, self.enclosures, self.results = [], {}, {}
        self.rows = []       # CSV rows

    def exit_code(self):
        stats = {v["status"] for v in self.verdicts}
        if stats & BAD:
            return EXIT_VIOLATION
        if "inconclusive" in stats:
            return EXIT_INCONCLUSIVE
        return EXIT_OK

    def document(self):
        return {"command": self.command, "version": __version__, "seed": self.seed,
                "config": _plain(self.config), "verdicts": self.verdicts,
                "enclosures": {k: _enc(v) for k, v in self.enclosures.items()},
                "results": _plain(self.results)}

    def render(self, fmt):
        if fmt == "json":
            return json.dumps(self.document(), indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            rows = self.rows or [{"name": v["name"], "status": v["status"]} for v in self.verdicts]
            keys = list(dict.fromkeys(k for r in rows for k in r))
            w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _plain(r.get(k, "")) for k in keys})
            return buf.getvalue()
        lines = [f"{self.command} (version {__version__}, seed {self.seed})"]
        for v in self.verdicts:
            extra = f"  {v['detail']}" if v.get("detail") else ""
            lines.append(f"  [{v['status']}] {v['name']}{extra}")
        for k, iv in self.enclosures.items():
            lo, hi = iv.decimal_bounds(12)
            lines.append(f"  {k} in [{lo}, {hi}]")
        return "\n".join(lines) + "\n"


def schema() -> dict:
    text = resources.files(__package__).joinpath("report.schema.json").read_text("utf-8")
    return json.loads(text)


# -- commands ------------------------------------------------------------------------

def _config(args, *keys):
    return {k: getattr(args, k) for k in keys}


def run_claims(args, rep=None):
    from .claims import verify_all
    rep = rep or Report("claims", _config(args, "n_max", "claims", "precision"))
    reports = verify_all(args.n_max, args.precision, args.jobs, args.claims)
    for r in reports:
        rep.verdicts.append(_verdict(f"claim {r.claim}", r.verdict, r.statement))
        rep.rows.append({"claim": r.claim, "verdict": r.verdict, "n_min": r.n_range[0],
                         "n_max": r.n_range[1], "margin": r.margin, "margin_at": r.margin_at,
                         "method": r.method})
    rep.results["claims"] = [r.to_dict() for r in reports]
    return rep


def run_thresholds(args, rep=None):
    from .coefficients import critical_p
    from .thresholds import (closing_certificate, lemma_m2_lt_m1, m2, threshold_report, u0)
    n = args.n
    p = critical_p(n) if args.p is None else args.p
    rep = rep or Report("thresholds", {**_config(args, "n", "lemma", "precision"), "p": p})
    tr = threshold_report(n, p)
    for k, v in tr.enclosures().items():
        rep.enclosures[k] = v
    rep.results["thresholds"] = {"n": n, "p": p, "q": tr.q, "M1": tr.M1 if isinstance(
        tr.M1, RatInterval) else str(tr.M1), "m2_lt_m1": tr.m2_lt_m1, "k_signs": tr.k_signs,
        "J": tr.J}
    rep.verdicts.append(_verdict("M2 < M1", tr.m2_lt_m1))
    rep.verdicts.append(_check("enclosure widths < 1e-6", tr.widths_ok()))
    row = {"n": n, "p": p}
    for k, v in tr.enclosures().items():
        row[f"{k}_lo"], row[f"{k}_hi"] = _enc(v, 15)
    rep.rows.append(row)
    if n >= 7:
        rep.verdicts.append(_check("U1 < U0 < U2 and K3(U0) > 0", u0(n, p).ok))
        for name, ok in m2(n, p).checks.items():
            rep.verdicts.append(_check(f"M2 {name.replace('_', ' ')}", ok))
    if n == 7 and p == critical_p(7):
        rep.verdicts.append(_check("M1 > 2.6", tr.M1.certainly_gt(Fraction(26, 10))))
        rep.verdicts.append(_check("Delta > 0.284", tr.Delta.certainly_gt(Fraction(284, 1000))))
    if n == 8 and p == critical_p(8):
        rep.verdicts.append(_check("Delta > 0.322", tr.Delta.certainly_gt(Fraction(322, 1000))))
    if args.lemma:
        table = lemma_m2_lt_m1(range(args.n_min, args.n_max + 1), args.p_points, args.jobs)
        status = "certified" if table.certified else (
            "inconclusive" if table.inconclusive and not any(
                r.verdict == "violated" for r in table.rows) else "failed")
        rep.verdicts.append(_verdict(f"M2 < M1 for n in [{args.n_min}, {args.n_max}]", status))
        rep.verdicts.append(_check("closing polynomial 0.6n^3 + 4n^2 + 3n - 2 > 0 on [8, inf)",
                                   closing_certificate().positive))
        rep.rows = [{"n": r.n, "p": r.p, "verdict": r.verdict, "bits": r.bits,
                     "M1_lo": _enc(r.m1, 15)[0] if r.m1 else "",
                     "M2_hi": _enc(r.m2, 15)[1] if r.m2 else ""} for r in table.rows]
        rep.results["lemma"] = [{"n": r.n, "p": r.p, "verdict": r.verdict, "M1": r.m1,
                                 "M2": r.m2} for r in table.rows]
    return rep


def run_identities(args, rep=None):
    from .identities import TOL, run_suite
    rep = rep or Report("identities", _config(args, "trials", "dims", "frames", "M"), args.seed)
    s = run_suite(args.trials, args.seed, tuple(args.dims), tuple(args.frames), args.M, args.jobs)
    d = s.to_dict()
    for c in s.configs:
        worst = max(c.max_residual.values())
        rep.verdicts.append(_verdict(f"identities n={c.n} {c.frame}",
                                     "passed" if c.passed else "failed",
                                     f"max residual {worst:.3e}"))
        rep.rows.append({"n": c.n, "frame": c.frame, "passed": c.passed,
                         **{f"res_{k}": f"{r:.3e}" for k, r in c.max_residual.items()}})
    neg = s.negative_control
    rep.verdicts.append(_verdict("negative control (free jet, master identity)",
                                 "passed" if neg["median"] > 1e-3 and neg["min"] > TOL
                                 else "failed", f"median residual {neg['median']:.3e}"))
    passing = [k for k, v in s.toggle.items() if k.startswith("g11_base") and v["passes"]]
    rep.verdicts.append(_verdict("G11^2 base disambiguation", "passed" if len(passing) == 1
                                 else "inconclusive", f"passing reading: {', '.join(passing)}"))
    rep.results["identities"] = d
    return rep


def run_young(args, rep=None):
    from .young import scan
    rep = rep or Report("young", _config(args, "n_min", "n_max", "points", "choices"))
    out = []
    for choice in args.choices:
        for n in range(args.n_min, args.n_max + 1):
            if choice == "large-gamma" and n < 7:
                continue
            sc = scan(n, choice, args.points)
            rep.verdicts.append(_check(f"young {choice} n={n}", sc.feasible))
            for p, ex in sc.rows:
                row = {"choice": choice, "n": n, "p": p, "feasible": ex.feasible}
                if ex.feasible:
                    row.update(G=ex.G, p1=ex.p1, q1=ex.q1, sigma1=ex.sigma1, delta=ex.delta)
                else:
                    row["constraint"] = ex.constraint
                rep.rows.append(row)
            out.append({"choice": choice, "n": n, "feasible": sc.feasible,
                        "monotone": sc.monotone})
    rep.results["young"] = out
    return rep


def run_shoot(args, rep=None):
    from .shooter import ShotConfig, shoot
    cfg = ShotConfig(args.n, args.p, M=args.M, N=args.N, a=args.a, r_max=args.r_max)
    rep = rep or Report("shoot", _config(args, "n", "p", "M", "N", "a", "r_max"))
    tr = shoot(cfg)
    status = {"crossed": "passed", "decayed": "passed"}.get(tr.classification, "inconclusive")
    rep.verdicts.append(_verdict("shot classified", status, tr.classification))
    rep.verdicts.append(_check("v non-increasing while positive", tr.monotone))
    rep.results["shot"] = tr.summary()
    rep.rows = [{"r": float(r), "v": float(v), "dv": float(w)}
                for r, v, w in zip(tr.r, tr.v, tr.dv)]
    return rep


def run_sweep(args, rep=None):
    from .shooter import default_heights, sweep
    rep = rep or Report("sweep", _config(args, "n", "p", "M", "N", "heights", "r_max"))
    res = sweep(args.n, args.p, args.M, default_heights(args.heights), args.r_max, args.N)
    unresolved = [c for c in res.classes if c == "inconclusive"]
    rep.verdicts.append(_check(f"classification independent of height (n={args.n}, p={args.p}, M={args.M})",
                              res.consistent))
    if unresolved:
        rep.verdicts.append(_verdict("every height resolved", "inconclusive",
                                     f"{len(unresolved)} inconclusive shots"))
    d = res.to_dict()
    rep.results["sweep"] = d
    rep.rows = d["rows"]
    return rep


def run_report(args):
    rep = Report("report", _config(args, "n_max", "trials", "precision"), args.seed)
    ns = argparse.Namespace
    run_claims(ns(n_max=args.n_max, claims=list(range(1, 11)), precision=args.precision,
                  jobs=args.jobs), rep)
    for n in (7, 8):
        sub = run_thresholds(ns(n=n, p=None, lemma=False, precision=args.precision,
                                jobs=args.jobs))
        rep.verdicts += [{**v, "name": f"{v['name']} (n={n})"} for v in sub.verdicts]
        rep.enclosures.update({f"{k} (n={n})": v for k, v in sub.enclosures.items()})
        rep.results[f"thresholds n={n}"] = sub.results["thresholds"]
    run_identities(ns(trials=args.trials, seed=args.seed, dims=[3, 5, 7, 10],
                      frames=["small-gamma", "large-gamma"], M=Fraction(1), jobs=args.jobs), rep)
    run_young(ns(n_min=3, n_max=50, points=20, choices=["small-gamma", "large-gamma"]), rep)
    for M in (Fraction(1, 2), Fraction(1), Fraction(4)):
        run_sweep(ns(n=5, p=Fraction(2), M=M, N=Fraction(1), heights=10, r_max=200.0), rep)
        rep.results[f"sweep M={M}"] = rep.results.pop("sweep")
    rep.rows = []
    return rep


COMMANDS = {"claims": run_claims, "thresholds": run_thresholds, "identities": run_identities,
            "young": run_young, "shoot": run_shoot, "sweep": run_sweep, "report": run_report}


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except SystemExit as exc:
        # argparse exits for --help, --version and malformed arguments
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"liouville-verify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"liouville-verify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.jobs < 1:
        print("liouville-verify: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    bits = args.precision or get_precision()
    try:
        with workprec(bits):
            rep = COMMANDS[args.command](args)
    except (DomainError, GatingError) as exc:
        print(f"liouville-verify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = rep.render(args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return rep.exit_code()


def main():
    sys.exit(dispatch())
