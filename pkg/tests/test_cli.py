import pytest

from indeplab import cli
from indeplab import combinators as cb
from indeplab import constructions as c
from indeplab import diagonal as d
from indeplab import sexpr
from indeplab import theory as th
from indeplab import tm

MOVE_RIGHT = c.move_right().to_text()


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def machine_file(tmp_path):
    p = tmp_path / "mr.tm"
    p.write_text(MOVE_RIGHT)
    return str(p)


def test_validate_ok(capsys, machine_file):
    code, out, _ = run(capsys, "validate", machine_file)
    assert code == 0 and out.splitlines()[0] == "valid"


def test_validate_reports_violations(capsys, tmp_path):
    p = tmp_path / "bad.tm"
    p.write_text("q0 0 -> q0 0 Z\nstart q0\nhalt h\n")
    code, _, err = run(capsys, "validate", str(p))
    assert code == 1
    assert "unknown-move" in err


def test_sexpr_machine_files(capsys, tmp_path):
    p = tmp_path / "o.sx"
    p.write_text(sexpr.dumps(c.build_O(c.halts_at(2), "").sexpr()))
    code, out, _ = run(capsys, "run", str(p), "--input", "000")
    assert code == 0 and out == "Halted steps=7 output=0\n"


def test_run_halt_only(capsys):
    code, out, _ = run(capsys, "run", "builtin:halt-only", "--input", "101", "--budget", "1000")
    assert code == 0 and out == "Halted steps=0 output=101\n"


def test_run_matches_library(capsys, machine_file):
    _, out, _ = run(capsys, "run", machine_file, "--input", "101", "--budget", "100")
    assert out == tm.run_bounded(c.move_right(), "101", 100).describe() + "\n"


def test_trace_move_right(capsys):
    _, out, _ = run(capsys, "run", "builtin:move-right", "--input", "11", "--trace")
    lines = out.splitlines()
    assert lines[0] == "step 1: state=q0 head=0 read=> write=> move=R"
    assert len(lines) == 5 and lines[-1] == "Halted steps=4 output=11"


def test_trace_halt_only_and_budget(capsys):
    _, out, _ = run(capsys, "run", "builtin:halt-only", "--trace")
    assert out == "Halted steps=0 output=\n"
    _, out, _ = run(capsys, "run", "builtin:self-loop", "--trace", "--budget", "3")
    assert out.splitlines()[-1] == "Budget-Exhausted steps=3"
    assert len(out.splitlines()) == 4


def test_trace_replays_as_certificate(capsys):
    proof = th.certify_halting(c.move_right(), "11", 100)
    _, out, _ = run(capsys, "run", "builtin:move-right", "--input", "11", "--trace")
    assert len(out.splitlines()) - 1 == proof.certificate.steps
    assert th.check_proof(proof.subject, th.loads_proof(proof.text())).accepted


def test_profile(capsys):
    _, out, _ = run(capsys, "profile", "builtin:move-right", "--max-len", "3")
    assert [line.split("\t")[1] for line in out.splitlines()] == ["2", "3", "4", "5"]


def test_race(capsys):
    assert run(capsys, "race", "builtin:self-loop", "--budget", "100")[1] == "Reject proof-index=4 rounds=5\n"
    assert run(capsys, "race", "builtin:halts-at-5")[1] == "Accept halt-step=5 rounds=5\n"
    assert run(capsys, "race", "builtin:fixed-point", "--budget", "200")[1] == "StillRunning rounds=200\n"


def test_build_o_and_q(capsys):
    _, out, _ = run(capsys, "build-o", "builtin:halts-at-5")
    text, profile = out.splitlines()
    assert tm.machine_from_sexpr(sexpr.loads(text)) == c.build_O(c.halts_at(5), "")
    assert profile == "profile StepThreshold(5)"
    _, out, _ = run(capsys, "build-o", "builtin:self-loop")
    assert out.splitlines()[1] == "profile AllOnes"
    _, out, _ = run(capsys, "build-q", "builtin:halts-at-3", "builtin:lib:parity")
    assert tm.machine_from_sexpr(sexpr.loads(out.strip())) == c.build_Q(c.halts_at(3), cb.Library("parity"), "")


def test_patch_and_almost_eq(capsys, tmp_path):
    table = tmp_path / "table"
    table.write_text(" -> 1\n0 -> 1\n1 -> 0\n")
    code, out, _ = run(capsys, "patch", "builtin:lib:parity", str(table), "--m", "2", "--out", str(tmp_path / "p.sx"))
    assert code == 0 and out == ""
    patched = tmp_path / "p.sx"
    assert tm.decide(tm.machine_from_sexpr(sexpr.loads(patched.read_text().strip())), "") == 1
    _, out, _ = run(capsys, "almost-eq", str(patched), "builtin:lib:parity", "--max-len", "6")
    assert out == "Equal-beyond(2)\n"
    _, out, _ = run(capsys, "almost-eq", "builtin:lib:parity", "builtin:lib:leading")
    assert out.startswith("Divergent(")


def test_patch_rejects_incomplete_table(capsys, tmp_path):
    table = tmp_path / "table"
    table.write_text("0 -> 1\n")
    assert run(capsys, "patch", "builtin:lib:parity", str(table), "--m", "2")[0] == 1
    table.write_text("0 -> 7\n")
    assert run(capsys, "patch", "builtin:lib:parity", str(table), "--m", "2")[0] == 1


def test_enumerate(capsys):
    _, out, _ = run(capsys, "enumerate", "--start", "4", "--count", "1")
    k, text = out.rstrip("\n").split("\t")
    assert k == "4" and text == th.enumerate_theorems(4).text()


def test_encode_decode(capsys, tmp_path):
    _, out, _ = run(capsys, "encode", "builtin:halts-at-5", "builtin:lib:echo")
    bits_line, hex_line = out.splitlines()
    q = d.make_quadruplet(c.build_O(c.halts_at(5), ""), cb.Library("echo"))
    assert int(hex_line, 16) == d.t_encode(q) and bits_line == "bits=21265"
    (tmp_path / "code").write_text(hex_line)
    _, out, _ = run(capsys, "decode", "@" + str(tmp_path / "code"))
    assert [line.split("\t")[1] for line in out.splitlines()] == list(q.components())
    assert run(capsys, "decode", "0")[1] == "non-code\n"


def test_encode_uncertified_is_domain_error(capsys):
    assert run(capsys, "encode", "builtin:halts-at-5", "builtin:lib:slow-parity")[0] == 1


def test_tmo_dump_format(capsys):
    _, out, _ = run(capsys, "tmo", "--m0", "builtin:halts-at-5", "--to", "6", "--member", "3:builtin:lib:echo")
    lines = out.splitlines()
    assert lines[3] == "3\tmember:1\tT:3\tf:1"
    assert lines[5] == "5\tmember:0\tT:5\tf:0"
    _, out, _ = run(capsys, "tmo", "--m0", "builtin:halts-at-5", "--from", "2", "--to", "2",
                    "--member", "2:builtin:lib:unary")
    assert out == ""  # nothing printed on error


def test_f_switch_compare(capsys):
    _, out, _ = run(capsys, "f", "--m0", "builtin:halts-at-5", "--to", "7")
    assert [line[-1] for line in out.splitlines()] == list("11111000")
    _, out, _ = run(capsys, "switch", "--m0", "builtin:halts-at-5", "--t-l0", "builtin:lib:parity", "--to", "7")
    parity = [tm.decide(cb.Library("parity"), tm.num_bits(n)) for n in range(8)]
    expected = [p if n < 5 else 1 - p for n, p in enumerate(parity)]
    assert [int(line[-1]) for line in out.splitlines()] == expected
    _, out, _ = run(capsys, "compare", "builtin:lib:parity", "builtin:lib:parity", "--to", "4")
    assert all(line.endswith("M:1") for line in out.splitlines())


def test_demo_goldbach(capsys):
    _, out, _ = run(capsys, "demo-goldbach", "--budget", "500")
    assert out == "run Budget-Exhausted steps=500\nrace StillRunning rounds=500\n"


def test_verify_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "lemma2", "--max-len", "8")
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines()]
    assert rows and all(r[0] == "threshold" and r[3] == "PASS" for r in rows)
    assert ["threshold", "threshold-rule", "10/10", "PASS"] in rows


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        [],
        ["run"],
        ["run", "builtin:halt-only", "--input", "12"],
        ["run", "builtin:halt-only", "--budget", "-1"],
        ["run", "builtin:no-such-machine"],
        ["run", "/no/such/file"],
        ["tmo", "--m0", "builtin:halt-only", "--from", "5", "--to", "1"],
        ["tmo", "--m0", "builtin:halt-only", "--member", "x"],
        ["decode", "banana"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_budget_exhaustion_is_domain_error(capsys):
    assert run(capsys, "profile", "builtin:self-loop", "--budget", "10")[0] == 1


def test_safety_budget_env(capsys, monkeypatch):
    monkeypatch.setenv("INDEPLAB_SAFETY_BUDGET", "7")
    assert run(capsys, "run", "builtin:self-loop")[1] == "Budget-Exhausted steps=7\n"
