import itertools
import random

import pytest
from hypothesis import given, strategies as st

from surgery_calc import cli
from surgery_calc.dsl import (
    ExecutionError,
    ParseError,
    execute,
    format_script,
    load_script,
    nondiffeo_certificate,
    parse,
    render_certificate,
    render_report,
    run_script,
    scripts_dir,
    shipped_scripts,
)
from surgery_calc.dsl.parser import eval_expr, parse_combo, render_combo
from surgery_calc.dsl.report import render_final, summary

SMALL = """\
generator A square=-1
generator B square=-1
start E2
blowup A
"""


@pytest.fixture(scope="module")
def z1():
    return run_script("z_construction", 1)


def test_shipped_scripts_listed():
    assert shipped_scripts() == ["ss_y", "z_construction", "z_construction_swapped",
                                 "ztilde_construction"]


def test_parse_small():
    s = parse(SMALL)
    assert len(s.statements) == 4
    assert [st.render() for st in s.statements][2:] == ["start E2", "blowup A"]


@pytest.mark.parametrize("text,fragment", [
    ("generator A square=-1\nstart E2\nrbd C_unknown\n", "undeclared config"),
    ("start E2\nblowup E1\n", "undeclared generator"),
    ("generator A square=-1\nblowup A\n", "before start"),
    ("frobnicate 3\n", "unknown statement"),
    ("generator A square=-1\nstart E2\nstart E2\n", "twice"),
    ("start E2\nassert_type 3\n", ""),
    ("generator A = x\n", ""),
    ("start E2\nassert_sw class=A value=n^\n", ""),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert fragment in str(info.value)
    assert info.value.line >= 1


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("# comment\n\ngenerator A square=-1\nstart E2\nblowup Q\n")
    assert info.value.line == 5
    assert str(info.value).startswith("line 5")


def test_rbd_twice_rejected():
    text = ("generator A square=-1\ngenerator B square=-1\npair A B = 1\nconfig C plumbing=(-2) spheres=[A - B]\n"
            "start E2\nrbd C\nrbd C\n")
    with pytest.raises(ParseError, match="already blown down"):
        parse(text)


@pytest.mark.parametrize("name", ["z_construction", "z_construction_swapped",
                                  "ztilde_construction", "ss_y"])
def test_shipped_round_trip(name):
    s = load_script(name)
    text = format_script(s)
    again = parse(text, base_dir=scripts_dir(), name=name)
    assert again == s
    assert format_script(again) == text


@pytest.mark.parametrize("text", ["6T + sum(E1..E24)", "A - 2B", "-C + D + E", "E1 + E2 - E3",
                                  "6T + sum(E1..E6) - E7 + sum(E8..E24)"])
def test_combo_round_trip(text):
    assert parse_combo(render_combo(parse_combo(text))) == parse_combo(text)


@given(st.dictionaries(st.sampled_from([f"E{i}" for i in range(1, 12)] + ["T", "S", "F"]),
                       st.integers(-5, 5).filter(bool), min_size=1))
def test_combo_round_trip_property(d):
    combo = parse_combo(" + ".join(f"{v}*{k}" for k, v in d.items()).replace("+ -", "- "))
    assert dict(parse_combo(render_combo(combo))) == dict(combo)


@pytest.mark.parametrize("expr,n,want", [("n^3", 2, 8), ("2*n+1", 3, 7), ("(n-1)^2", 4, 9), ("7", 9, 7)])
def test_eval_expr(expr, n, want):
    assert eval_expr(expr, n) == want


def test_undeclared_use_fuzz():
    """Moving a use above its declaration is always a parse error."""
    lines = ["generator A square=-1", "generator B square=-1", "generator C square=-1", "pair A B = 1", "class D = A + B",
             "config K plumbing=(-5, -2) spheres=[A - B, B - C]", "start E2",
             "blowup C", "rbd K", "assert_sw class=D value=0"]
    parse("\n".join(lines))
    rnd = random.Random(3)
    uses = {4: 1, 5: 2, 8: 5, 9: 4}  # line index -> index of the declaration it needs
    for i, decl in uses.items():
        for _ in range(3):
            perm = list(lines)
            stmt = perm.pop(i)
            perm.insert(rnd.randint(0, decl), stmt)
            with pytest.raises(ParseError):
                parse("\n".join(perm))


def test_report_is_deterministic(z1):
    again = run_script("z_construction", 1)
    assert render_report(again) == render_report(z1)


def test_z_n1_report(z1):
    assert z1.ok
    assert z1.homeomorphism_type == (3, 8)
    assert z1.sw_values == (1, 1)
    assert z1.ledger.numbers == (13, -5, 3, 8)
    text = render_report(z1)
    for section in ("## steps", "## descent through C305", "## descent through C31",
                    "## coprimality certificates", "## assertions", "## final state", "## summary"):
        assert section in text
    assert "homeomorphism type: 3CP^2 # 8(-CP^2)" in text
    s = summary(z1)
    assert s["final.type"] == "3,8" and s["assertions.failed"] == 0


def test_ztilde_n2():
    r = run_script("ztilde_construction", 2)
    assert r.ok and r.sw_values == (8, 8)
    assert r.homeomorphism_type == (3, 8)


def test_ss_y_is_h1_zero():
    r = run_script("ss_y", 1)
    assert r.ok
    assert str(r.ledger.pi1) == "H1Zero"
    assert r.ledger.numbers == (13, -5, 3, 8)
    assert r.homeomorphism_type is None
    assert "not determined" in render_final(r)


def test_swapped_order_same_final_state(z1):
    r = run_script("z_construction_swapped", 1)
    assert render_final(r) == render_final(z1)


def test_ledger_only_mode():
    r = run_script("z_construction", 3, track_sw=False)
    assert r.ok
    assert r.homeomorphism_type == (3, 8)
    assert not r.sw_tracked
    assert any(a.skipped for a in r.assertions)
    assert "Seiberg-Witten function not tracked" in render_final(r)
    with pytest.raises(ValueError):
        nondiffeo_certificate([r, r])


def test_failed_assertion_recorded():
    s = parse("generator A square=-1\nstart E2\nblowup A\nassert_ledger e=99\n")
    r = execute(s, 1)
    assert not r.ok
    assert "[FAIL]" in render_report(r)


def test_invalid_embedding_is_execution_error():
    s = parse("generator A square=-1\ngenerator B square=-1\nconfig K plumbing=(-5, -2) spheres=[A, B] pq=(3,1)\n"
              "start E2\nblowup A\nblowup B\nrbd K\n")
    with pytest.raises(ExecutionError):
        execute(s, 1)


def test_certificate_grouping(z1):
    r2 = run_script("z_construction", 2)
    cert = nondiffeo_certificate([z1, r2, z1])
    assert cert.distinguished == 2
    text = render_certificate(cert)
    assert "not distinguished" in text and "[distinct]" in text
    with pytest.raises(ValueError):
        nondiffeo_certificate([z1])


# command line

def test_cli_check_config(capsys):
    assert cli.main(["check-config", "305", "17"]) == 0
    out = capsys.readouterr().out
    assert "continued fraction: 93025/5184 = [18, 19, 2^14, 3, 2^16]" in out
    assert "boundary: L(93025, -5184)" in out
    assert "negative definite: yes" in out


def test_cli_check_config_bad_input(capsys):
    assert cli.main(["check-config", "4", "2"]) == 2
    assert cli.main(["check-config", "x", "2"]) == 2


def test_cli_list_and_parse(capsys):
    assert cli.main(["list-scripts"]) == 0
    assert "z_construction" in capsys.readouterr().out
    assert cli.main(["parse", "ss_y"]) == 0
    assert "rbd C305 pi1=H1Zero" in capsys.readouterr().out


def test_cli_run_emit_and_verify(tmp_path, capsys):
    out = tmp_path / "report.txt"
    assert cli.main(["run", "z_construction", "--n", "1", "--no-sw", "--verify",
                     "--emit", str(out)]) == 0
    assert "final.type = 3,8" in out.read_text()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.surg"
    bad.write_text("generator A square=-1\nstart E2\nblowup A\nassert_ledger e=99\n")
    assert cli.main(["run", str(bad)]) == 0
    assert cli.main(["run", str(bad), "--verify"]) == 1
    broken = tmp_path / "broken.surg"
    broken.write_text("start E2\nrbd Nope\n")
    assert cli.main(["run", str(broken)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.surg")]) == 2
    assert cli.main(["run", "z_construction", "--n", "0"]) == 2
    assert cli.main([]) == 2


@pytest.mark.parametrize("text,want", [("3", [3]), ("1..4", [1, 2, 3, 4]), ("1,5", [1, 5]),
                                       ("1..2,7", [1, 2, 7])])
def test_parse_n_range(text, want):
    assert cli.parse_n_range(text) == want


def test_cli_multi_run_prints_certificate(capsys):
    assert cli.main(["run", "ss_y", "--n", "1,2", "--jobs", "2"]) == 0
    out = capsys.readouterr().out
    assert "2 pairwise nondiffeomorphic group(s) among 2 manifold(s)" in out


def test_z_and_ztilde_not_distinguished(z1):
    zt = run_script("ztilde_construction", 1)
    cert = nondiffeo_certificate([z1, zt])
    assert cert.distinguished == 1
    assert "[not distinguished]" in render_certificate(cert)
