"""Command-line front end.

Walk files are ``key=value`` lines with ``#`` comments::

    # symmetric linear walk
    q1 = n
    q2 = -n
    p  = 1/2
    y0 = 100

Expressions follow ``term (('+'|'-') term)*`` with terms ``coeff? n (^ exponent)?``
or a bare coefficient; coefficients and exponents are decimals or
fractions ``a/b``.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 precondition
failed, 4 verification failed.
"""

import argparse
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import bound, mc, search
from .constants import CERTIFIED, EXPONENT_ONLY, MODES
from .errors import (
    DegenerateVariance,
    PastwalkError,
    PreconditionViolated,
    SemanticError,
    WalkSyntaxError,
)
from .poly import Polynomial
from .walk import WalkSpec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_VERIFY = 4

WALK_KEYS = ("q1", "q2", "p", "y0")

# -- expression language ------------------------------------------------

_NUMBER = re.compile(r"\d+(?:\.\d*)?|\.\d+")


class _Scanner:
    def __init__(self, text, line, col0):
        self.text = text
        self.pos = 0
        self.line = line
        self.col0 = col0

    def error(self, msg, pos=None):
        pos = self.pos if pos is None else pos
        return WalkSyntaxError(msg, self.line, self.col0 + pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def number(self):
        """``decimal`` or ``decimal / decimal``, optionally in parentheses."""
        if self.take("("):
            val = self.number()
            if not self.take(")"):
                raise self.error("expected ')'")
            return val
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            raise self.error("expected a number")
        self.pos = m.end()
        val = Fraction(m.group())
        save = self.pos
        if self.take("/"):
            self.skip()
            m = _NUMBER.match(self.text, self.pos)
            if not m:
                raise self.error("expected a denominator")
            den = Fraction(m.group())
            if den == 0:
                raise self.error("division by zero", m.start())
            self.pos = m.end()
            return val / den
        self.pos = save
        return val


def parse_expression(text, line=1, column=1):
    """Parse a polynomial expression in ``n``.

    Raises
    ------
    WalkSyntaxError
        With the line and column of the offending character.
    """
    sc = _Scanner(text, line, column)
    terms = {}
    first = True
    while True:
        sign = 1
        if sc.take("+"):
            pass
        elif sc.take("-"):
            sign = -1
        elif not first:
            raise sc.error(f"expected '+' or '-', found {sc.peek()!r}")
        first = False
        ch = sc.peek()
        if ch == "":
            raise sc.error("expected a term")
        coeff = None
        if ch != "n":
            coeff = sc.number()
            sc.take("*")
        if sc.peek() == "n":
            sc.pos += 1
            exponent = Fraction(1)
            if sc.take("^"):
                at = sc.pos
                exponent = sc.number()
                if exponent <= 0:
                    raise sc.error("exponent must be positive", at)
        else:
            if coeff is None:
                raise sc.error("expected a term")
            exponent = Fraction(0)
        c = sign * (Fraction(1) if coeff is None else coeff)
        terms[exponent] = terms.get(exponent, Fraction(0)) + c
        if sc.peek() == "":
            break
    return Polynomial.from_terms(terms)


def _fmt_number(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_expression(q):
    """Render a polynomial in the walk-file grammar (inverse of :func:`parse_expression`)."""
    if q.is_zero:
        return "0"
    out = []
    for e, c in reversed(q.terms):
        mag = abs(c)
        if e == 0:
            body = _fmt_number(mag)
        else:
            body = ("" if mag == 1 else _fmt_number(mag)) + "n"
            if e != 1:
                body += "^" + _fmt_number(e)
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out)


def parse_document(text):
    """Split walk-file text into ``{key: (value, line, column)}``."""
    doc = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise WalkSyntaxError("expected 'key = value'", lineno, col)
        key, value = body.split("=", 1)
        name = key.strip()
        if name not in WALK_KEYS:
            col = len(key) - len(key.lstrip()) + 1
            raise WalkSyntaxError(f"unknown key {name!r}", lineno, col)
        if name in doc:
            raise WalkSyntaxError(f"duplicate key {name!r}", lineno, 1)
        col = len(key) + 2 + (len(value) - len(value.lstrip()))
        doc[name] = (value.strip(), lineno, col)
    return doc


def _scalar(value, line, col):
    sc = _Scanner(value, line, col)
    sign = -1 if sc.take("-") else 1
    val = sign * sc.number()
    if sc.peek():
        raise sc.error(f"unexpected {sc.peek()!r}")
    return val


def parse_walk(doc):
    """Build a :class:`WalkSpec` from walk-file text or a mapping of strings.

    Raises
    ------
    WalkSyntaxError
        For malformed text.
    SemanticError
        For missing keys, ``p`` outside (0, 1) or ``y0 <= 0``.
    """
    if isinstance(doc, str):
        doc = parse_document(doc)
    else:
        doc = {k: v if isinstance(v, tuple) else (str(v), 1, 1) for k, v in doc.items()}
    missing = [k for k in WALK_KEYS if k not in doc]
    if missing:
        raise SemanticError(f"missing keys: {', '.join(missing)}")
    q1 = parse_expression(*doc["q1"])
    q2 = parse_expression(*doc["q2"])
    p = _scalar(*doc["p"])
    y0 = _scalar(*doc["y0"])
    if not 0 < p < 1:
        raise SemanticError(f"p must lie in (0, 1), got {p}")
    if y0 <= 0:
        raise SemanticError(f"y0 must be positive, got {y0}")
    return WalkSpec(q1, q2, p, y0)


def serialize_walk(w):
    return (
        f"q1 = {format_expression(w.q1)}\n"
        f"q2 = {format_expression(w.q2)}\n"
        f"p = {_fmt_number(w.p)}\n"
        f"y0 = {_fmt_number(w.y0)}\n"
    )


# -- argument handling --------------------------------------------------


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="master random seed")
    parser.add_argument("--mode", choices=MODES, default=default(CERTIFIED))
    parser.add_argument("--generations", type=int, default=default(None),
                        help="search generations (default from config)")
    parser.add_argument("--json", action="store_true", default=default(False),
                        help="emit JSON (the default)")
    parser.add_argument("--pretty", action="store_true", default=default(False),
                        help="human-readable rendering of the same report")


def build_parser():
    parser = _Parser(prog="pastwalk", description="PAST analysis of polynomial random walks")
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="search for a certified bound")
    p.add_argument("walk")
    p.add_argument("--out")
    p.add_argument("--config", help="SearchConfig JSON file")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--d-min", action="store_true", help="also estimate the degree threshold")

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo stopping times")
    p.add_argument("walk")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--cap", type=int, default=1_000_000)
    p.add_argument("--out")
    p.add_argument("--csv", help="write the survival curve here")

    p = sub.add_parser("verify", parents=[common], help="check a certificate")
    p.add_argument("certificate")

    p = sub.add_parser("bound", parents=[common], help="one-shot feasibility solve")
    for name in ("epsilon", "d", "c0", "C1", "delta1", "s", "c"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--g", type=int, required=True)

    p = sub.add_parser("compare", parents=[common], help="analyze, simulate and cross-check")
    p.add_argument("walk")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--cap", type=int, default=1_000_000)
    p.add_argument("--config")
    p.add_argument("--workers", type=int, default=None)
    return parser


def _read_walk(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    return parse_walk(text)


def _config(args):
    if getattr(args, "config", None):
        try:
            cfg = search.SearchConfig.from_json(Path(args.config).read_text())
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad config: {exc}") from exc
    else:
        cfg = search.SearchConfig()
    cfg.mode = args.mode
    cfg.seed = args.seed
    if args.generations is not None:
        cfg.generations = args.generations
    return cfg


def _emit(doc, args, out=None, pretty=None):
    if args.pretty and pretty is not None:
        text = pretty(doc)
    else:
        text = json.dumps(doc, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _pretty_report(doc):
    lines = [f"verdict        {doc['verdict']}", f"mode           {doc['mode']}"]
    lines.append(f"exponent m     {doc['exponent']:.6g}")
    for key, label in (("B", "B"), ("k", "k"), ("explicit_bound", "E(T) bound")):
        if doc.get(key) is not None:
            lines.append(f"{label:<15}{doc[key]:.6g}")
    lines.append(f"finite moments {doc['finite_moments']}")
    if doc.get("individual"):
        ind = doc["individual"]
        lines.append("parameters     " + ", ".join(f"{k}={v:.6g}" for k, v in ind.items()))
    if "d_min_estimate" in doc:
        lines.append(f"d_min estimate {doc['d_min_estimate']}")
    return "\n".join(lines)


def _pretty_sim(doc):
    st = doc["stop_times"]
    lines = [
        f"samples {doc['samples']}  cap {doc['cap']}  censored {doc['censored']}",
        f"mean T  {st['mean']}  (stderr {st['mean_stderr']})",
        "n        P(T>=n)     stderr",
    ]
    for n, s, e in doc["survival"][:: max(1, len(doc["survival"]) // 20)]:
        lines.append(f"{n:<8d} {s:<11.5g} {e:.2g}")
    return "\n".join(lines)


def cmd_analyze(args):
    w = _read_walk(args.walk)
    cfg = _config(args)
    rep = search.evolve(w, mode=cfg.mode, config=cfg, seed=cfg.seed, workers=args.workers)
    if args.d_min:
        rep.d_min = search.estimate_d_min(w.p, config=cfg, seed=cfg.seed)
    _emit(rep.to_dict(), args, args.out, _pretty_report)
    return EXIT_PRECONDITION if rep.verdict == search.PRECONDITION_FAILED else EXIT_OK


def cmd_simulate(args):
    w = _read_walk(args.walk)
    if args.samples < 1 or args.cap < 1:
        raise UsageError("--samples and --cap must be positive")
    r = mc.simulate(w, args.samples, args.cap, seed=args.seed)
    doc = r.to_dict()
    try:
        slope, _ = mc.fit_exponent(r)
        doc["fitted_exponent"] = slope
    except PastwalkError:
        doc["fitted_exponent"] = None
    if args.csv:
        Path(args.csv).write_text(r.survival_csv())
    _emit(doc, args, args.out, _pretty_sim)
    return EXIT_OK


def _load_cert_file(path):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise WalkSyntaxError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if isinstance(doc, dict) and isinstance(doc.get("certificate"), dict):
        doc = doc["certificate"]
    try:
        return bound.load_certificate(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise SemanticError(f"malformed certificate: {exc}") from exc


def cmd_verify(args):
    B, P, decimals = _load_cert_file(args.certificate)
    exact = bound.is_inductive(B, P)
    ok = exact or bound.verify_certificate(B, P, decimals)
    doc = {
        "inductive": bool(ok),
        "exact": bool(exact),
        "rounding_decimals": decimals,
        "anchors": B.m,
        "min_margin": float((bound.update(B, P).b - B.b).min()),
    }
    if args.pretty:
        how = "exactly" if exact else f"within {decimals}-decimal rounding"
        print(f"inductive ({how})" if ok else "NOT inductive")
    else:
        print(json.dumps(doc, indent=1))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bound(args):
    if args.g < 2 or not 0 < args.s < args.c:
        raise UsageError("need --g >= 2 and 0 < --s < --c")
    P = bound.BoundParams.derive(args.epsilon, args.d, args.c0, args.C1, args.delta1)
    a = [args.s * i / (args.g - 1) for i in range(args.g)]
    B = bound.solve_feasibility(P, a, [args.c])
    if B is None:
        print("INFEASIBLE")
    else:
        print(bound.dumps_certificate(B, P))
    return EXIT_OK


def soundness(rep, sim):
    """Compare a certified bound with simulated stopping times.

    The survival bound must dominate ``P(T >= n) - 3 stderr`` at every
    grid point and the explicit bound must exceed the simulated mean.
    """
    out = {"survival_ok": None, "worst_gap": None, "mean_ok": None}
    if rep.certificate is None or not math.isfinite(rep.B):
        return out
    n, s, e = sim.survival[:, 0], sim.survival[:, 1], sim.survival[:, 2]
    curve = [min(1.0, rep.B * float(k) ** rep.exponent) for k in n]
    gaps = [c - (si - 3 * ei) for c, si, ei in zip(curve, s, e)]
    out["survival_ok"] = bool(min(gaps) >= 0)
    out["worst_gap"] = float(min(gaps))
    if rep.explicit_bound is not None and math.isfinite(sim.mean):
        out["mean_ok"] = bool(rep.explicit_bound >= sim.mean)
    return out


def cmd_compare(args):
    w = _read_walk(args.walk)
    cfg = _config(args)
    rep = search.evolve(w, mode=cfg.mode, config=cfg, seed=cfg.seed, workers=args.workers)
    if rep.verdict == search.PRECONDITION_FAILED:
        _emit({"analysis": rep.to_dict()}, args)
        return EXIT_PRECONDITION
    sim = mc.simulate(w, args.samples, args.cap, seed=args.seed)
    check = soundness(rep, sim)
    doc = {
        "analysis": rep.to_dict(),
        "simulation": {
            "mean": sim.mean,
            "censored": sim.censored,
            "samples": sim.samples,
            "cap": sim.cap,
        },
        "soundness": check,
    }
    try:
        doc["simulation"]["fitted_exponent"] = mc.fit_exponent(sim)[0]
    except PastwalkError:
        doc["simulation"]["fitted_exponent"] = None
    _emit(doc, args)
    bad = check["survival_ok"] is False or check["mean_ok"] is False
    return EXIT_VERIFY if bad else EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "bound": cmd_bound,
    "compare": cmd_compare,
}


def run(argv=None):
    """Run the command line; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WalkSyntaxError, SemanticError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionViolated, DegenerateVariance) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except PastwalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
