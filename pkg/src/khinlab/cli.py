"""Command-line front end.

Campaigns write CSV to ``--out`` (default stdout) and a JSON summary to
``--summary`` (default stderr). Exit codes: 0 success, 1 a hard invariant
failed during the run, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import campaigns as cp
from . import numtheory as nt
from . import overlap as ov
from .approxsets import (
    LogPower,
    build_E,
    measure_E,
    parse_policy,
    parse_psi,
    parse_rational,
    psi_diagnostics,
    support_cardinality,
)
from .realarith import MIN_PRECISION, fmt_rational, fmt_real, set_precision

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2


def _rational(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _psi(text):
    try:
        return parse_psi(text)
    except (ValueError, OSError, KeyError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _policy(text):
    try:
        return parse_policy(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _pos_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("values must be >= 1")
    return vals


def _precision(text):
    v = _pos_int(text)
    if v < MIN_PRECISION:
        raise argparse.ArgumentTypeError(f"precision must be >= {MIN_PRECISION}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_pos_int, default=None)
    common.add_argument("--precision-bits", type=_precision, default=128)
    common.add_argument("--prime-limit", type=_pos_int, default=nt.DEFAULT_PRIME_LIMIT)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--summary", default=None, help="JSON summary file (default stderr)")
    common.add_argument("--timing", action="store_true", help="add runtime to the summary")

    parser = argparse.ArgumentParser(prog="khinlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("set-measure", "measure of one E_n^D")
    p.add_argument("--n", type=_pos_int, required=True)
    p.add_argument("--psi", type=_psi, required=True)
    p.add_argument("--policy", type=_policy, default=parse_policy("full"))
    p.add_argument("--dump", action="store_true", help="also print the intervals")

    p = add("overlap", "B1/B2 decomposition of one pair")
    p.add_argument("--m", type=_pos_int, required=True)
    p.add_argument("--n", type=_pos_int, required=True)
    p.add_argument("--psi", type=_psi, required=True)
    p.add_argument("--policy", type=_policy, default=parse_policy("full"))

    p = add("quasi-independence", "S2 against the explicit overlap bound")
    p.add_argument("--N", type=_int_list, required=True, help="comma-separated N values")
    p.add_argument("--psi", type=_psi, default=parse_psi("const:1/2"))
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--policy", type=_policy, default=None, help="default logpower:eps/4")
    p.add_argument("--pair-cap", type=_pos_int, default=ov.DEFAULT_PAIR_CAP)

    p = add("borel-cantelli", "S1^2/S2 lower bound against the exact union")
    p.add_argument("--N", type=_int_list, required=True)
    p.add_argument("--psi", type=_psi, default=parse_psi("const:1/2"))
    p.add_argument("--policy", type=_policy, default=parse_policy("logpower:1/4"))

    p = add("union-growth", "exact measure of truncated unions")
    p.add_argument("--M", type=_pos_int, default=1)
    p.add_argument("--N", type=_int_list, required=True)
    p.add_argument("--psi", type=_psi, default=parse_psi("const:1/2"))
    p.add_argument("--policy", type=_policy, default=parse_policy("logpower:1/4"))

    p = add("lemma-scan", "|S| >= n eps/10 and the measure corollary over a range")
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--n-min", type=_pos_int, required=True)
    p.add_argument("--n-max", type=_pos_int, required=True)
    p.add_argument("--psi", type=_psi, default=parse_psi("const:1/2"))

    p = add("proof-audit", "inequality-by-inequality audit over a range")
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--n-min", type=_pos_int, required=True)
    p.add_argument("--n-max", type=_pos_int, required=True)

    p = add("primorial-optimality", "least admissible cutoff for primorial n")
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--k-max", type=_pos_int, required=True)

    p = add("blocks", "dyadic-exponent block sums")
    p.add_argument("--psi", type=_psi, required=True)
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--k-max", type=_pos_int, default=3)
    p.add_argument("--cap", type=_pos_int, default=10**6)

    p = add("theorem3-check", "pairs violating the gcd-separation hypothesis")
    p.add_argument("--psi", type=_psi, required=True)
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--N", type=_pos_int, required=True)

    p = add("psi-diagnostics", "partial sums of the divergence series")
    p.add_argument("--psi", type=_psi, required=True)
    p.add_argument("--N", type=_pos_int, required=True)
    p.add_argument("--eps", type=_rational, required=True)
    return parser


_GLOBAL = ("threads", "precision_bits", "prime_limit", "out", "summary", "timing")


@dataclass(frozen=True)
class Command:
    name: str
    options: tuple[tuple[str, object], ...]

    @property
    def opts(self) -> dict:
        return dict(self.options)

    def to_argv(self) -> list[str]:
        """Textual form; ``parse(cmd.to_argv()) == cmd``."""
        argv = [self.name]
        for key, val in self.options:
            flag = "--" + key.replace("_", "-")
            if val is None or val is False:
                continue
            if val is True:
                argv.append(flag)
            else:
                argv += [flag, _text(val)]
        return argv


def _text(val) -> str:
    if isinstance(val, Fraction):
        return fmt_rational(val)
    if isinstance(val, list):
        return ",".join(map(str, val))
    return str(val)


def parse(argv: list[str]) -> Command:
    """Parse argv; raises SystemExit(2) with usage text on bad input."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "overlap" and ns.m >= ns.n:
        parser.error("overlap needs --m < --n")
    if ns.command in ("lemma-scan", "proof-audit"):
        if ns.n_min > ns.n_max:
            parser.error("--n-min must not exceed --n-max")
        if not 0 < ns.eps < 1:
            parser.error("--eps must lie in (0, 1)")
    if ns.command in ("quasi-independence", "blocks", "theorem3-check", "psi-diagnostics",
                      "primorial-optimality") and ns.eps <= 0:
        parser.error("--eps must be positive")
    if ns.command == "blocks" and ns.k_max > 4:
        parser.error("--k-max must be <= 4")
    if ns.command == "primorial-optimality" and ns.k_max > 40:
        parser.error("--k-max must be <= 40")
    if ns.command == "theorem3-check" and ns.N < 3:
        parser.error("--N must be >= 3")
    if ns.command == "psi-diagnostics" and ns.N < 2:
        parser.error("--N must be >= 2")
    opts = tuple((k, v) for k, v in vars(ns).items() if k != "command")
    return Command(ns.command, opts)


# --------------------------------------------------------------------------


def _write_csv(stream, header: str, rows) -> None:
    stream.write(header + "\n")
    for row in rows:
        stream.write(row + "\n")


def _run_set_measure(o, out):
    n, psi, pol = o["n"], o["psi"], o["policy"]
    fast = measure_E(n, psi, pol)
    s = build_E(n, psi, pol)
    out.write(fmt_rational(s.measure()) + "\n")
    if o["dump"]:
        out.write(s.dump())
    ok = s.measure() == fast
    return ok, {"n": n, "cardinality": support_cardinality(n, pol.cut(n)), "measure": fmt_rational(fast)}


def _run_overlap(o, out):
    rep = ov.intersect_pair(o["m"], o["n"], o["psi"], o["policy"])
    out.write(json.dumps(rep.as_dict(), sort_keys=True) + "\n")
    return not rep.violations, {"violations": rep.violations}


def _run_quasi(o, out):
    eps = o["eps"]
    pol = o["policy"] or LogPower(eps / 4)
    header = (
        "N,S1,S2,offdiag_b1,offdiag_b2,ratio_S2_over_S1sq,log_term,explicit_bound,holds,"
        "direct_bound,direct_holds,partial_summation_rhs,partial_summation_holds,b1_exact"
    )
    rows, tally = [], []
    for N in o["N"]:
        q = ov.quasi_independence(N, o["psi"], pol, eps, workers=o["threads"], pair_cap=o["pair_cap"])
        s = q.sums
        ratio = fmt_rational(q.ratio) if q.ratio is not None else ""
        rows.append(
            f"{N},{fmt_rational(s.S1)},{fmt_rational(s.S2)},{fmt_rational(s.offdiag_b1)},"
            f"{fmt_rational(s.offdiag_b2)},{ratio},{fmt_real(q.log_term)},{fmt_real(q.explicit_bound)},"
            f"{str(q.holds).lower()},{fmt_real(q.direct_bound)},{str(q.direct_holds).lower()},"
            f"{fmt_real(q.partial_summation_rhs)},{str(q.partial_summation_holds).lower()},"
            f"{str(s.b1_exact).lower()}"
        )
        tally.append({"N": N, "holds": q.holds, "partial_summation_holds": q.partial_summation_holds})
    _write_csv(out, header, rows)
    return True, {"policy": str(pol), "results": tally}


def _run_borel(o, out):
    rows, ok = [], True
    for N in o["N"]:
        bc = ov.borel_cantelli_bound(N, o["psi"], o["policy"], workers=o["threads"])
        ok &= bc.ratio_le_union and bc.union_le_bound
        rows.append(
            f"{N},{fmt_rational(bc.S1)},{fmt_rational(bc.S2)},{fmt_rational(bc.ratio)},"
            f"{fmt_rational(bc.union)},{fmt_real(bc.ratio)},{str(bc.ratio_le_union).lower()},"
            f"{str(bc.union_le_bound).lower()}"
        )
    _write_csv(out, "N,S1,S2,ratio,union,ratio_decimal,ratio_le_union,union_le_bound", rows)
    return ok, {"configurations": len(rows)}


def _run_union(o, out):
    rows, prev, ok = [], None, True
    for N in sorted(o["N"]):
        if N < o["M"]:
            continue
        u = ov.union_measure(o["M"], N, o["psi"], o["policy"])
        ok &= prev is None or u >= prev
        prev = u
        rows.append(f"{o['M']},{N},{fmt_rational(u)},{fmt_real(u)}")
    _write_csv(out, "M,N,union,union_decimal", rows)
    return ok, {"monotone": ok}


def _run_lemma(o, out):
    cfg = cp.CampaignConfig(o["eps"], psi=o["psi"], n_min=o["n_min"], n_max=o["n_max"])
    res = cp.lemma_corollary_scan(cfg)
    _write_csv(out, res.header, res.rows())
    return True, res.summary()


def _run_audit(o, out):
    res = cp.audit_scan(o["eps"], o["n_min"], o["n_max"])
    _write_csv(out, res.header, res.rows())
    return True, res.summary()


def _run_primorial(o, out):
    res = cp.primorial_optimality(o["eps"], o["k_max"])
    _write_csv(out, res.header, res.rows())
    summ = res.summary()
    return summ["identity_all_ok"], summ


def _run_blocks(o, out):
    res = cp.block_divergence(o["psi"], o["eps"], o["k_max"], o["cap"])
    _write_csv(out, res.header, res.rows())
    summ = res.summary()
    return summ["partition_consistent"], summ


def _run_theorem3(o, out):
    res = cp.theorem3_check(o["psi"], o["eps"], o["N"])
    _write_csv(out, res.header, res.rows())
    return not res.crosscheck_failures, res.summary()


def _run_diag(o, out):
    d = psi_diagnostics(o["psi"], o["N"], o["eps"])
    _write_csv(
        out,
        "N,eps,sum_psi,sum_phi_weighted,sum_log_weighted",
        [f"{d.N},{fmt_rational(d.eps)},{fmt_rational(d.sum_psi)},{fmt_rational(d.sum_phi_weighted)},"
         f"{fmt_real(d.sum_log_weighted)}"],
    )
    return True, {}


_RUNNERS = {
    "set-measure": _run_set_measure,
    "overlap": _run_overlap,
    "quasi-independence": _run_quasi,
    "borel-cantelli": _run_borel,
    "union-growth": _run_union,
    "lemma-scan": _run_lemma,
    "proof-audit": _run_audit,
    "primorial-optimality": _run_primorial,
    "blocks": _run_blocks,
    "theorem3-check": _run_theorem3,
    "psi-diagnostics": _run_diag,
}


def run(cmd: Command) -> int:
    o = cmd.opts
    set_precision(o["precision_bits"])
    nt.set_prime_limit(o["prime_limit"])
    if o["threads"] is None:
        o["threads"] = os.cpu_count() or 1
    start = time.perf_counter()
    try:
        out = open(o["out"], "w", newline="") if o["out"] else sys.stdout
    except OSError as exc:
        print(f"khinlab: cannot open output: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    try:
        ok, summary = _RUNNERS[cmd.name](o, out)
    except ValueError as exc:
        print(f"khinlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if out is not sys.stdout:
            out.close()
        else:
            out.flush()
    summary = {
        "command": cmd.name,
        "argv": [a for a in cmd.to_argv() if a != "--timing"],
        "precision_bits": o["precision_bits"],
        "invariants_ok": ok,
        **summary,
    }
    if o["timing"]:
        summary["runtime_seconds"] = round(time.perf_counter() - start, 3)
    text = json.dumps(summary, sort_keys=True, default=str) + "\n"
    if o["summary"]:
        with open(o["summary"], "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK if ok else EXIT_INVARIANT


def main(argv: list[str] | None = None) -> int:
    try:
        cmd = parse(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return run(cmd)


if __name__ == "__main__":
    sys.exit(main())
