import json
import subprocess
import sys
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khinlab import cli
from khinlab import overlap as ov
from khinlab.approxsets import Const, Full


def test_parse_examples():
    cmd = cli.parse(["overlap", "--m", "2", "--n", "3", "--psi", "const:1/10", "--policy", "full"])
    assert cmd.name == "overlap"
    o = cmd.opts
    assert (o["m"], o["n"], o["psi"], o["policy"]) == (2, 3, Const(F(1, 10)), Full())
    cmd = cli.parse(["lemma-scan", "--eps", "1/2", "--n-min", "1000", "--n-max", "100000", "--out", "scan.csv"])
    assert cmd.opts["eps"] == F(1, 2) and cmd.opts["out"] == "scan.csv"


@pytest.mark.parametrize("argv", [
    ["overlap", "--m", "5", "--n", "3", "--psi", "const:1/10"],
    ["overlap", "--m", "3", "--n", "3", "--psi", "const:1/10"],
    ["set-measure", "--n", "6", "--psi", "const:0.1"],
    ["lemma-scan", "--eps", "0.5", "--n-min", "3", "--n-max", "9"],
    ["lemma-scan", "--eps", "3/2", "--n-min", "3", "--n-max", "9"],
    ["set-measure", "--n", "6", "--psi", "const:1/10", "--bogus"],
    ["set-measure", "--n", "6", "--psi", "const:1/10", "--precision-bits", "64"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "usage" in capsys.readouterr().err


_flags = st.one_of(
    st.builds(lambda m, d, p: ["overlap", "--m", str(m), "--n", str(m + d), "--psi", p, "--policy", "cut:3"],
              st.integers(1, 50), st.integers(1, 50), st.sampled_from(["const:1/10", "power:c=1,alpha=1/2"])),
    st.builds(lambda e, lo: ["lemma-scan", "--eps", e, "--n-min", str(lo), "--n-max", str(lo + 10), "--threads", "2"],
              st.sampled_from(["1/4", "2/3"]), st.integers(3, 100)),
    st.builds(lambda N: ["quasi-independence", "--N", N, "--eps", "1/2", "--policy", "logpower:1/8"],
              st.sampled_from(["10", "20,40"])),
    st.builds(lambda s: ["theorem3-check", "--psi", s, "--eps", "1", "--N", "30", "--timing"],
              st.sampled_from(["indicator:1/2:10,20", "primes:1/3", "logpow:c=1,beta=-1"])),
)


@settings(max_examples=60, deadline=None)
@given(_flags)
def test_flags_round_trip(argv):
    cmd = cli.parse(argv)
    again = cli.parse(cmd.to_argv())
    assert again == cmd
    assert again.to_argv() == cmd.to_argv()


def test_overlap_json(capsys):
    assert cli.main(["overlap", "--m", "2", "--n", "3", "--psi", "const:1/10", "--policy", "full"]) == 0
    cap = capsys.readouterr()
    body = json.loads(cap.out)
    assert (body["total"], body["b1"], body["b2"]) == ("1/15", "0", "1/15")
    summary = json.loads(cap.err)
    assert summary["invariants_ok"] is True and "runtime_seconds" not in summary


def test_set_measure(capsys):
    assert cli.main(["set-measure", "--n", "6", "--psi", "const:1/10", "--policy", "cut:2"]) == 0
    assert capsys.readouterr().out == "2/15\n"


def test_theorem3_primes_support(capsys, tmp_path):
    side = tmp_path / "summary.json"
    assert cli.main(["theorem3-check", "--psi", "primes:1/2", "--eps", "1/2", "--N", "2000",
                     "--summary", str(side)]) == 0
    cap = capsys.readouterr()
    assert cap.out == "m,n,gcd,threshold\n" and cap.err == ""
    assert json.loads(side.read_text())["violations"] == 0


def test_hard_invariant_gives_exit_1(monkeypatch, capsys):
    real = ov.intersect_pair

    def broken(*args):
        r = real(*args)
        return ov.OverlapReport(r.m, r.n, r.gcd_mn, r.total + 1, r.b1, r.b2, r.b2_closed_form,
                                r.b1_bound, r.coinciding_centers, r.b2_forced_zero)

    monkeypatch.setattr(ov, "intersect_pair", broken)
    assert cli.main(["overlap", "--m", "2", "--n", "3", "--psi", "const:1/10"]) == 1


def test_unwritable_output_is_nonzero(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    assert cli.main(["set-measure", "--n", "6", "--psi", "const:1/10", "--out", str(target)]) != 0


_HEADERS = {
    "quasi-independence": (["--N", "20", "--eps", "1/2"],
                           "N,S1,S2,offdiag_b1,offdiag_b2,ratio_S2_over_S1sq,log_term,explicit_bound,holds,"
                           "direct_bound,direct_holds,partial_summation_rhs,partial_summation_holds,b1_exact"),
    "borel-cantelli": (["--N", "20"], "N,S1,S2,ratio,union,ratio_decimal,ratio_le_union,union_le_bound"),
    "union-growth": (["--N", "5,20"], "M,N,union,union_decimal"),
    "lemma-scan": (["--eps", "1/2", "--n-min", "3", "--n-max", "50"],
                   "n,dcut,cardinality,phi,lower_bound,measure,corollary_bound,lemma_pass,corollary_pass"),
    "proof-audit": (["--eps", "1/2", "--n-min", "3", "--n-max", "50"],
                    "step,exact,informational,checked,failures,largest_failing_n,min_slack,min_slack_n"),
    "primorial-optimality": (["--eps", "1/2", "--k-max", "5"],
                             "k,n,phi,d_star,card_at_d_star,identity_checked,identity_ok,target,ratio,"
                             "phi_loglog_over_n"),
    "blocks": (["--psi", "const:1/2", "--eps", "1", "--k-max", "2"],
               "k,lo,hi,summed_to,truncated,sum_psi,sum_weighted,threshold,block_holds,cumulative_psi,"
               "log_target,cumulative_holds"),
    "theorem3-check": (["--psi", "const:1/2", "--eps", "1", "--N", "40"], "m,n,gcd,threshold"),
    "psi-diagnostics": (["--psi", "const:1/2", "--N", "40", "--eps", "1/2"],
                        "N,eps,sum_psi,sum_phi_weighted,sum_log_weighted"),
}


@pytest.mark.parametrize("name", sorted(_HEADERS))
def test_campaign_headers_and_determinism(name, capsys):
    args, header = _HEADERS[name]
    assert cli.main([name, *args]) == 0
    first = capsys.readouterr()
    assert first.out.splitlines()[0] == header
    assert cli.main([name, *args]) == 0
    second = capsys.readouterr()
    assert (first.out, first.err) == (second.out, second.err)


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "khinlab", "set-measure", "--n", "3", "--psi", "const:1/10"],
                         capture_output=True, text=True, check=True)
    assert res.stdout == "1/5\n"
