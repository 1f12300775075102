import subprocess
import sys

import pytest

from algcirc.cli import run
from algcirc.field import QQ
from algcirc.poly import expand, parse_polynomial
from algcirc.circuit import parse_circuit

XY_Z = "field Q\nvar x y z\na = input x\nb = input y\nc = input z\nm = mul a b\ns = add m c\noutput s\n"
SQUARE = "field Fp 101\nvar x y\na = input x\nb = input y\ns = add a b\nq = mul s s\noutput q\n"
EXPANDED = """field Fp 101
var x y
a1 = input x
a2 = input x
b1 = input y
b2 = input y
c1 = input x
c2 = input y
m1 = mul a1 a2
m2 = mul b1 b2
m3 = mul c1 c2
t = const 2
m4 = mul t m3
s1 = add m1 m2
s2 = add s1 m4
output s2
"""


@pytest.fixture
def files(tmp_path):
    (tmp_path / "xyz.circ").write_text(XY_Z)
    (tmp_path / "sq.circ").write_text(SQUARE)
    (tmp_path / "ex.circ").write_text(EXPANDED)
    return tmp_path


def test_stats(files, capsys):
    assert run(["stats", str(files / "xyz.circ")]) == 0
    out = capsys.readouterr().out
    assert "size: 2" in out and "formula: true" in out


def test_expand(files, capsys):
    assert run(["expand", str(files / "xyz.circ")]) == 0
    out = capsys.readouterr().out
    assert parse_polynomial(out, QQ) == parse_polynomial("1 * x * y\n1 * z", QQ)


def test_reduce_det_then_verify(files):
    out = files / "m.proj"
    assert run(["reduce", "det", str(files / "xyz.circ"), "-o", str(out)]) == 0
    assert run(["verify", str(out)]) == 0


def test_tampered_matrix_fails_with_witness(files, capsys):
    out = files / "m.proj"
    run(["reduce", "det", str(files / "xyz.circ"), "-o", str(out)])
    lines = out.read_text().splitlines()
    k = lines.index("matrix 3")
    lines[k + 3] = "0 0 2"
    out.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert run(["verify", str(out)]) == 1
    text = capsys.readouterr().out
    assert "result: fail" in text and "witness:" in text


def test_reduce_per_then_verify(files):
    g = "field Fp 7\nvar x y1\na = input y1\nb = input x\nm = mul a b\noutput m\n"
    (files / "g.circ").write_text(g)
    out = files / "p.proj"
    assert run(["reduce", "per", str(files / "g.circ"), "--sum", "y1", "--bound", "2", "-o", str(out)]) == 0
    assert run(["verify", str(out)]) == 0


def test_pit_exit_codes(files, capsys):
    assert run(["pit", str(files / "sq.circ"), str(files / "ex.circ")]) == 0
    assert "verdict: Zero" in capsys.readouterr().out
    (files / "x.circ").write_text("field Fp 101\nvar x y\na = input x\noutput a\n")
    assert run(["pit", str(files / "sq.circ"), str(files / "x.circ"), "--trials", "5"]) == 1


def test_gen_then_verify(files):
    out = files / "per3.circ"
    assert run(["gen", "per", "3", "-o", str(out)]) == 0
    meta = out.with_name("per3.circ.meta")
    assert meta.exists()
    assert run(["verify", str(meta)]) == 0
    text = meta.read_text()
    oracle = text.split("\noracle\n", 1)[1].split("\nend", 1)[0]
    assert expand(parse_circuit(out.read_text())) == parse_polynomial(oracle, QQ)


def test_gen_det_verifies(files):
    out = files / "det4.circ"
    assert run(["gen", "det", "n=4", "-o", str(out)]) == 0
    assert run(["verify", str(out) + ".meta"]) == 0


def test_transform_report(files):
    rep = files / "r.txt"
    assert run(["transform", "balance", str(files / "xyz.circ"), "--report", str(rep),
                "-o", str(files / "b.circ")]) == 0
    assert "verified: oracle" in rep.read_text()


def test_abp_round_trip(files):
    assert run(["to-abp", str(files / "xyz.circ"), "-o", str(files / "a.abp")]) == 0
    assert run(["to-skew", str(files / "a.abp"), "-o", str(files / "s.circ")]) == 0
    assert expand(parse_circuit((files / "s.circ").read_text())) == parse_polynomial("1 * x * y\n1 * z", QQ)


def test_eval(files, capsys):
    assert run(["eval", str(files / "xyz.circ"), "--at", "x=2,y=3,z=1/2"]) == 0
    assert capsys.readouterr().out.strip() == "s: 13/2"


def test_error_exit_codes(files):
    assert run(["frobnicate"]) == 64
    assert run(["stats", str(files / "missing.circ")]) == 2
    assert run(["--field", "Fp:7", "gen", "cut", "3", "3"]) == 2
    (files / "bad.circ").write_text("field Q\nvar x\ng1 = add g1 g1\noutput g1\n")
    assert run(["stats", str(files / "bad.circ")]) == 2


def test_same_seed_same_output(files, capsys):
    args = ["pit", str(files / "sq.circ"), str(files / "ex.circ"), "--seed", "7"]
    run(args)
    first = capsys.readouterr().out
    run(args)
    assert capsys.readouterr().out == first


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "algcirc", "stats", str(files / "sq.circ")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "skew: false" in proc.stdout
