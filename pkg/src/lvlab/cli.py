"""Command-line entry point: ``lvlab <subcommand> [flags]``.

Every subcommand prints either CSV (RFC 4180) or a JSON report with sorted keys
and floats rounded to 12 significant digits, so identical inputs give
byte-identical output.  Exit codes: 0 success, 1 ratio alarm or failed
invariant, 2 invalid input, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidInputError, LvlabError

DEFAULT_SEED = 0
DEFAULT_ALARM = 50.0
DEFAULT_EPS = 0.05


class ConfigError(InvalidInputError):
    pass


# ---------------------------------------------------------------------------
# Serialization


def _clean(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt_cell(v) for v in r])
    return buf.getvalue()


def _fmt_cell(v):
    v = _clean(v)
    return json.dumps(v) if isinstance(v, list) else v


@dataclass
class Report:
    command: str
    params: dict
    results: dict
    checks: dict = field(default_factory=dict)
    wall_time: float | None = None

    @property
    def alarm(self) -> bool:
        return any(not c["ok"] for c in self.checks.values())

    def check(self, name: str, value, limit=None, ok=None):
        """Record a named check; with ``limit`` it is a ratio alarm ``value <= limit``."""
        if ok is None:
            ok = value <= limit
        self.checks[name] = {"value": value, "limit": limit, "ok": bool(ok)}

    def to_json(self) -> str:
        out = {
            "command": self.command,
            "params": self.params,
            "results": self.results,
            "checks": self.checks,
            "alarm": self.alarm,
            "version": __version__,
        }
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return dumps(out)


# ---------------------------------------------------------------------------
# Argument parsing and configuration


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _words(text: str) -> list[str]:
    return [x.strip() for x in str(text).split(",") if x.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInputError(f"{self.prog}: {message}")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file; flags override it")
    common.add_argument("--threads", type=int, default=None, help="worker cap (also LVLAB_THREADS)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--eps", type=float, default=DEFAULT_EPS)
    common.add_argument("--alarm", type=float, default=DEFAULT_ALARM, help="ratio alarm threshold")
    common.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")
    common.add_argument("--timing", type=_bool, nargs="?", const=True, default=False, help="include wall time in JSON")

    parser = _Parser(prog="lvlab", description="Large values of Dirichlet polynomials: numerical laboratory.")
    parser.add_argument("--version", action="version", version=f"lvlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = sub.add_parser("characters", parents=[common], help="list the characters mod q (CSV)")
    p.add_argument("--q", type=int, required=True)
    subs["characters"] = p

    p = sub.add_parser("polyeval", parents=[common], help="evaluate a Dirichlet polynomial (CSV)")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--chi", type=_ints, default=None, help="character indices; default all")
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--t-min", type=float, default=0.0, dest="t_min")
    p.add_argument("--t-max", type=float, default=10.0, dest="t_max")
    p.add_argument("--t-step", type=float, default=1.0, dest="t_step")
    p.add_argument("--coeffs", choices=["one", "random", "mollifier"], default="one")
    p.add_argument("--X", type=float, default=1.0)
    p.add_argument("--smoothed", type=_bool, nargs="?", const=True, default=False)
    subs["polyeval"] = p

    p = sub.add_parser("large-values", parents=[common], help="extract W and report moments (JSON)")
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--N", type=float, default=40.0)
    p.add_argument("--sigma", type=float, default=0.6)
    p.add_argument("--delta", type=float, default=None, help="separation; default (qT)^eps")
    p.add_argument("--smoothed", type=_bool, nargs="?", const=True, default=False)
    p.add_argument("--moments", type=_words, default=["second", "fourth", "energy", "discrete", "hb"])
    p.add_argument("--M", type=float, default=None, help="discrete-moment scale; default N")
    subs["large-values"] = p

    p = sub.add_parser("spectral", parents=[common], help="Gram matrix traces and lattice buckets (JSON)")
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--N", type=float, default=2000.0)
    p.add_argument("--sigma", type=float, default=0.75)
    p.add_argument("--source", choices=["random", "extract"], default="random")
    p.add_argument("--size", type=int, default=8, help="|W| for --source random")
    p.add_argument("--cutoff", type=int, default=None, help="lattice cutoff; default ceil((qT)^eps qT/N)")
    p.add_argument("--max-w", type=int, default=20, dest="max_w")
    subs["spectral"] = p

    p = sub.add_parser("zeros", parents=[common], help="count and locate zeros of one L(s, chi) (JSON)")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--chi", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--classify", type=_floats, default=None, help="X,Y for the zero classification")
    subs["zeros"] = p

    p = sub.add_parser("density", parents=[common], help="zero-density scan over all chi mod q (JSON)")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--sigma", type=_floats, required=True)
    p.add_argument("--csv", type=Path, default=None, help="also write (sigma, chi_index, count) rows here")
    subs["density"] = p

    p = sub.add_parser("apps", parents=[common], help="least primes / Goldbach numbers in progressions (CSV)")
    p.add_argument("--kind", choices=["ap", "goldbach"], default="ap")
    p.add_argument("--moduli", type=_ints, default=None)
    p.add_argument("--base", type=int, default=None, help="use moduli base^n for n in --range")
    p.add_argument("--range", type=_ints, default=None, dest="exp_range", help="lo,hi exponents (inclusive)")
    p.add_argument("--ceiling", type=int, default=None)
    p.add_argument("--summary", type=_bool, nargs="?", const=True, default=False, help="one row per modulus")
    subs["apps"] = p

    p = sub.add_parser("selftest", parents=[common], help="fast deterministic cross-module checks (JSON)")
    subs["selftest"] = p
    return parser, subs


def load_config(path: Path, sub: argparse.ArgumentParser) -> dict:
    """Parse ``key = value`` lines into typed values for the subcommand's flags."""
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest == "range":
            dest = "exp_range"
        if dest not in actions:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        act = actions[dest]
        try:
            conv = act.type(value) if act.type else value
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
        if act.choices is not None and conv not in act.choices:
            raise ConfigError(f"{path}:{lineno}: {key!r} must be one of {sorted(act.choices)}")
        out[dest] = conv
    return out


def parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    # required flags may come from the config file, so they are checked after merging
    required = {}
    for name, sub in subs.items():
        required[name] = [a for a in sub._actions if a.required]
        for a in required[name]:
            a.required = False
    args = parser.parse_args(argv)
    if args.config is not None:
        subs[args.command].set_defaults(**load_config(args.config, subs[args.command]))
        args = parser.parse_args(argv)
    missing = [a.option_strings[0] for a in required[args.command] if getattr(args, a.dest) is None]
    if missing:
        raise InvalidInputError(f"lvlab {args.command}: missing required {', '.join(missing)}")
    threads = args.threads if args.threads is not None else os.environ.get("LVLAB_THREADS")
    args.threads = int(threads) if threads is not None else 1
    if args.threads < 1:
        raise InvalidInputError("--threads must be positive")
    return args


def _character(mod, index: int):
    try:
        return mod.character(index)
    except IndexError as exc:
        raise InvalidInputError(str(exc)) from exc


def _positive(**kw):
    for k, v in kw.items():
        if v is None or not v > 0:
            raise InvalidInputError(f"{k} must be positive, got {v}")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_characters(args) -> str:
    from .characters import build_group

    _, chars = build_group(args.q)
    rows = [
        (args.q, c.index, " ".join(map(str, c.exponents)), c.order, c.conductor, c.is_primitive, c.parity, c.is_principal)
        for c in chars
    ]
    return csv_text(["q", "index", "exponents", "order", "conductor", "primitive", "parity", "principal"], rows)


def cmd_polyeval(args) -> str:
    from .characters import Modulus
    from .dirichlet_poly import PolySpec, eval_grid

    _positive(N=args.N, q=args.q, t_step=args.t_step)
    if args.t_max < args.t_min:
        raise InvalidInputError("t-max must be at least t-min")
    mod = Modulus.build(args.q)
    chars = mod.characters() if args.chi is None else [_character(mod, i) for i in sorted(set(args.chi))]
    spec = PolySpec(args.N, args.coeffs, smoothed=args.smoothed, seed=args.seed, X=args.X)
    count = int(math.floor((args.t_max - args.t_min) / args.t_step + 1e-9)) + 1
    t = args.t_min + args.t_step * np.arange(count)
    vals = eval_grid(spec, chars, t)
    rows = [(x, chi.index, v.real, v.imag, abs(v)) for chi, row in zip(chars, vals) for x, v in zip(t, row)]
    return csv_text(["t", "chi_index", "re", "im", "abs"], rows)


def cmd_large_values(args) -> Report:
    from .characters import build_group
    from .dirichlet_poly import PolySpec
    from .large_values import (
        continuous_moments,
        discrete_moment_reports,
        energy,
        extract_W,
        heath_brown_lhs,
        predicted_bounds,
        rbaver_constant,
    )
    from .spectral import AffineSumSpec, bsoat_check, rtilde_profiles

    _positive(q=args.q, T=args.T, N=args.N, sigma=args.sigma, eps=args.eps)
    qT = args.q * args.T
    delta = args.delta if args.delta is not None else qT**args.eps
    params = {k: getattr(args, k) for k in ("q", "T", "N", "sigma", "eps", "seed", "smoothed", "moments")}
    params["delta"] = delta
    _, chars = build_group(args.q)
    spec = PolySpec(args.N, "random", smoothed=args.smoothed, seed=args.seed)
    V = args.N**args.sigma
    W = extract_W(spec, chars, args.T, V, delta)
    bounds = predicted_bounds(args.N, V, args.q, args.T, args.eps)
    rep = Report("large-values", params, {"size": len(W), "V": V, "predicted_bounds": bounds})
    rep.check("separation", None, ok=W.check_separation())
    rep.check("size_vs_mvt", len(W) / (bounds["mvt"] * bounds["eps_factor"]), 20.0)
    if len(W) == 0:
        return rep
    res = rep.results
    want = set(args.moments)
    E = energy(W) if want & {"energy", "fourth", "discrete"} else None
    if "energy" in want:
        res["energy"] = E
    if want & {"second", "fourth"}:
        m2, m4 = continuous_moments(W, E)
        res["moments"] = {"second": m2.as_dict(), "fourth": m4.as_dict()}
        rep.check("secm_ratio", m2.ratio, args.alarm)
        rep.check("fourthm_ratio", m4.ratio, args.alarm)
    if "discrete" in want:
        M = args.M if args.M is not None else args.N
        reps = discrete_moment_reports(W, M, E, sigma=args.sigma)
        res["discrete"] = {r.kind: r.as_dict() for r in reps}
        for r in reps:
            rep.check(f"{r.kind}_ratio", r.ratio, args.alarm)
    if "hb" in want:
        hb = heath_brown_lhs(W, args.M if args.M is not None else args.N)
        res["heath_brown"] = {"lhs": hb.lhs, "rhs": hb.rhs, "ratio": hb.ratio, "nonprimitive": list(hb.nonprimitive)}
        rep.check("heath_brown_ratio", hb.ratio, args.alarm)
    if "bsoat" in want:
        profiles, feature = rtilde_profiles(W, 2.0, args.N, args.eps)
        b = bsoat_check(AffineSumSpec(args.q, 4, profiles, support=2.0, feature=feature))
        res["bsoat"] = b
        rep.check("bsoat_ratio", b["ratio"], args.alarm)
    rng = np.random.default_rng(args.seed)
    C = max(rbaver_constant(W, a, rng, eps=args.eps) for a in (1, 2 % args.q or 1))
    res["rbaver_constant"] = C
    rep.check("rbaver_constant", C, 10.0)
    return rep


def cmd_spectral(args) -> Report:
    from .characters import build_group
    from .dirichlet_poly import PolySpec
    from .large_values import extract_W, random_pointset
    from .spectral import build_gram, decompose_S, rtls_check, trace_identities

    _positive(q=args.q, T=args.T, N=args.N, sigma=args.sigma, eps=args.eps)
    params = {k: getattr(args, k) for k in ("q", "T", "N", "sigma", "eps", "seed", "source", "size", "cutoff")}
    if args.source == "random":
        W = random_pointset(args.q, args.size, args.T, 1.0, np.random.default_rng(args.seed))
    else:
        _, chars = build_group(args.q)
        spec = PolySpec(args.N, "random", smoothed=True, seed=args.seed)
        W = extract_W(spec, chars, args.T, args.N**args.sigma / 6, (args.q * args.T) ** args.eps)
    if len(W) == 0:
        raise InvalidInputError("W is empty; lower sigma or raise T")
    g = build_gram(W, args.N)
    d = decompose_S(g, args.eps, sigma=args.sigma, cutoff=args.cutoff, max_w=args.max_w)
    tr = trace_identities(g, args.eps, d)
    rep = Report("spectral", params, {"size": len(W), "traces": tr, "bucket_ratios": d.ratios, "bucket_counts": d.counts})
    rep.check("est1_residual", abs(tr["est1_residual"]), tr["est1_budget"])
    rep.check("lattice_relative_residual", d.relative_residual, 1e-2)
    rep.check("jensen", None, ok=tr["jensen_ok"])
    rep.check("lsvt_plus", tr["s1"], ok=tr["lsvt_plus_ok"])
    for k, v in d.ratios.items():
        rep.check(f"{k}_ratio", v, args.alarm)
    if args.source == "extract":
        r = rtls_check(W, args.N, args.sigma, tr["s1"])
        rep.results["rtls"] = r
        rep.check("rtls", r["size"], r["bound"])
    return rep


def cmd_zeros(args) -> Report:
    from .characters import Modulus
    from .lfunc import classify_zero, count_zeros

    _positive(q=args.q, T=args.T)
    chi = _character(Modulus.build(args.q), args.chi)
    count, zeros = count_zeros(args.sigma, args.T, chi)
    params = {k: getattr(args, k) for k in ("q", "chi", "sigma", "T", "classify")}
    out = {"count": count, "zeros": [{"beta": z.beta, "t": z.t, "residual": z.residual} for z in zeros]}
    rep = Report("zeros", params, out)
    rep.check("residuals", max((z.residual for z in zeros), default=0.0), 1e-6)
    if args.classify:
        if len(args.classify) != 2:
            raise InvalidInputError("--classify takes X,Y")
        X, Y = args.classify
        cls = [classify_zero(z.rho, chi, X, Y, args.T) for z in zeros]
        for z, c in zip(out["zeros"], cls):
            z.update({k: c[k] for k in ("classI", "classII", "class1_magnitude", "class2_magnitude", "outside_dichotomy")})
        rep.check("dichotomy", None, ok=all(c["classI"] or c["classII"] or c["outside_dichotomy"] for c in cls))
    return rep


def cmd_density(args) -> Report:
    from .lfunc import density_scan

    _positive(q=args.q, T=args.T)
    scan = density_scan(args.q, args.T, args.sigma)
    d = scan.as_dict()
    rep = Report("density", {"q": args.q, "T": args.T, "sigma": args.sigma}, d)
    totals = d["totals"]
    rep.check("monotone", None, ok=all(a >= b for a, b in zip(totals, totals[1:])))
    if args.csv is not None:
        args.csv.write_text(csv_text(["sigma", "chi_index", "count"], d["counts"]), encoding="utf-8")
    return rep


def cmd_apps(args) -> str:
    from .arithmetic_apps import exponent_table

    if args.moduli is not None:
        moduli = args.moduli
    elif args.base is not None and args.exp_range is not None and len(args.exp_range) == 2:
        lo, hi = args.exp_range
        moduli = [args.base**n for n in range(lo, hi + 1)]
    else:
        raise InvalidInputError("give --moduli, or --base with --range lo,hi")
    if any(m < 2 for m in moduli):
        raise InvalidInputError("moduli must be at least 2")
    rows = exponent_table(args.kind, moduli, args.ceiling)
    if args.summary:
        return csv_text(
            ["modulus", "max", "exponent", "target", "exceeds", "below_asymptotic_regime"],
            [(r["modulus"], r["max"], r["exponent"], r["target"], r["exceeds"], r["below_asymptotic_regime"]) for r in rows],
        )
    return csv_text(["modulus", "k", "value"], [(r["modulus"], k, v) for r in rows for k, v in r["values"].items()])


def cmd_selftest(args) -> Report:
    from .selftest import run_selftest

    results, checks = run_selftest(seed=args.seed, eps=args.eps)
    rep = Report("selftest", {"seed": args.seed, "eps": args.eps}, results)
    for name, (value, ok) in checks.items():
        rep.check(name, value, ok=ok)
    return rep


COMMANDS = {
    "characters": cmd_characters,
    "polyeval": cmd_polyeval,
    "large-values": cmd_large_values,
    "spectral": cmd_spectral,
    "zeros": cmd_zeros,
    "density": cmd_density,
    "apps": cmd_apps,
    "selftest": cmd_selftest,
}


def dispatch(args) -> tuple[str, int]:
    start = time.perf_counter()
    out = COMMANDS[args.command](args)
    if isinstance(out, Report):
        if args.timing:
            out.wall_time = time.perf_counter() - start
        return out.to_json(), int(out.alarm)
    return out, 0


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        text, code = dispatch(args)
    except LvlabError as exc:
        print(f"lvlab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
