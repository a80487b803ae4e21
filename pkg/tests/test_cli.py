import io
import subprocess
import sys

import pytest

from procfn.analysis import signalling_table
from procfn.catalog import cyclic_four
from procfn.cli import main, parse_ops, render_signalling_table, restriction_text
from procfn.pfn import INVENTORY_HEADER, parse_inventory, parse_pfn, parse_pfn_stream


def run(*argv):
    out = io.StringIO()
    code = main(list(map(str, argv)), out)
    return code, out.getvalue()


def test_signal_matches_golden(data_dir):
    code, text = run("signal", data_dir / "cyclic_four.pfn", "--vary", "3,4")
    assert code == 0
    golden = (data_dir.parent / "golden" / "signal_cyclic_four_vary_3_4.txt").read_text()
    assert text == golden


def test_signal_rendering_is_pure():
    table = signalling_table(cyclic_four(), (2, 3))
    assert render_signalling_table(table) == render_signalling_table(table)


def test_restriction_text():
    assert restriction_text((0, 0), "x3") == "0"
    assert restriction_text((1, 1), "x3") == "1"
    assert restriction_text((0, 1), "x3") == "x3"
    assert restriction_text((1, 0), "x3") == "x3 ⊕ 1"
    assert restriction_text((0, 2, 1), "x3") == "[0 2 1]"


def test_signal_bad_pair(data_dir):
    assert run("signal", data_dir / "cyclic_four.pfn", "--vary", "3,3")[0] == 3
    assert run("signal", data_dir / "cyclic_four.pfn", "--vary", "3")[0] == 3
    assert run("signal", data_dir / "cyclic_four.pfn", "--vary", "1,5")[0] == 3


def test_signal_on_two_way_table(data_dir):
    # one-way under every single freeze, so the table renders
    code, text = run("signal", data_dir / "copy_cycle3.pfn", "--vary", "1,2")
    assert code == 0
    assert "2 signals to 1" in text


def test_signal_reports_two_way_rows(tmp_path):
    path = tmp_path / "swap.pfn"
    path.write_text("pfn 1\nparties 3\nin 2 2 2\nout 2 2 2\nw 1 : 0 0 1 1\nw 2 : 0 0 1 1\nw 3 : 0 0 0 0\n")
    code, text = run("signal", path, "--vary", "1,2")
    assert code == 2
    assert text.startswith("invalid process:")


@pytest.mark.parametrize("oracle", ["brute", "pairwise", "recursive", "reduction", "all"])
def test_validate_cyclic_four(data_dir, oracle):
    code, text = run("validate", data_dir / "cyclic_four.pfn", "--oracle", oracle)
    assert code == 0
    assert "invalid" not in text


def test_validate_invalid_prints_witness(tmp_path):
    path = tmp_path / "pair.pfn"
    path.write_text("pfn 1\nparties 2\nin 2 2\nout 2 2\nw 1 : 0 1\nw 2 : 0 1\n")
    code, text = run("validate", path)
    assert code == 2
    assert "brute: invalid" in text
    assert "fixed points (2): (0, 0), (1, 1)" in text
    code, text = run("validate", path, "--oracle", "pairwise")
    assert code == 2
    assert "regions 1 and 2 signal both ways" in text


def test_validate_refusal(data_dir, monkeypatch):
    monkeypatch.setenv("PFN_BRUTE_BOUND", "10")
    assert run("validate", data_dir / "cyclic_four.pfn")[0] == 3
    assert run("validate", data_dir / "cyclic_four.pfn", "--oracle", "reduction")[0] == 0


def test_parse_errors_exit_3(tmp_path, capsys):
    path = tmp_path / "bad.pfn"
    path.write_text("pfn 1\nparties 2\nin 2 2\nout 2 2\nw 1 : 0\nw 2 : 0 1\n")
    assert run("validate", path)[0] == 3
    assert "line 5, col 9: w 1: expected 2 values, got 1" in capsys.readouterr().err
    assert run("validate", tmp_path / "missing.pfn")[0] == 3


def test_usage_errors_exit_3(data_dir):
    assert run("frobnicate")[0] == 3
    assert run("validate", data_dir / "cyclic_four.pfn", "--oracle", "guess")[0] == 3
    assert run("validate", data_dir / "cyclic_four.pfn", "--verbose")[0] == 3
    assert run()[0] == 3


def test_simulate_constant_operations(data_dir):
    code, text = run("simulate", data_dir / "cyclic_four.pfn", "--ops", "1:const0,2:const0,3:const0,4:const0")
    assert code == 0
    assert text.splitlines() == ["a* = (0, 0, 0, 0)", "x* = f(a*) = (0, 0, 0, 0)", "w(x*) = (0, 0, 0, 0)"]


def test_simulate_identities(data_dir):
    code, text = run("simulate", data_dir / "cyclic_four.pfn", "--ops", "1:id,2:id,3:id,4:id")
    assert code == 0
    assert text.splitlines()[0] == "a* = (0, 0, 0, 0)"


def test_simulate_echoes_consistency(data_dir):
    code, text = run("simulate", data_dir / "cyclic_four.pfn", "--ops", "1:not,2:01,3:const1,4:id")
    assert code == 0
    a, x, wx = text.splitlines()
    assert a.split(" = ")[1] == wx.split(" = ")[1]


def test_simulate_without_unique_history(data_dir):
    code, text = run("simulate", data_dir / "copy_cycle3.pfn", "--ops", "1:id,2:id,3:id")
    assert code == 2
    assert "2 fixed points" in text
    code, text = run("simulate", data_dir / "copy_cycle3.pfn", "--ops", "1:not,2:not,3:not")
    assert code == 2
    assert "0 fixed points" in text


def test_simulate_bad_specs(data_dir):
    cyc4 = data_dir / "cyclic_four.pfn"
    assert run("simulate", cyc4, "--ops", "1:id,2:id,3:id")[0] == 3
    assert run("simulate", cyc4, "--ops", "1:id,1:id,2:id,3:id,4:id")[0] == 3
    assert run("simulate", cyc4, "--ops", "1:id,2:id,3:id,5:id")[0] == 3
    assert run("simulate", cyc4, "--ops", "1:flip,2:id,3:id,4:id")[0] == 3
    assert run("simulate", cyc4, "--ops", "1:012,2:id,3:id,4:id")[0] == 3


def test_simulate_non_binary(tmp_path):
    path = tmp_path / "mixed.pfn"
    path.write_text("pfn 1\nparties 2\nin 3 2\nout 2 3\nw 1 : 2 2 2\nw 2 : 0 1\n")
    code, text = run("simulate", path, "--ops", "1:0.1.1,2:2.0")
    assert code == 0
    assert text.splitlines()[0] == "a* = (2, 1)"
    assert run("simulate", path, "--ops", "1:id,2:id")[0] == 3


def test_parse_ops_digit_tables():
    w = parse_pfn("pfn 1\nparties 2\nin 3 2\nout 2 3\nw 1 : 2 2 2\nw 2 : 0 1\n").process
    assert parse_ops("2:2.0,1:011", w) == ((0, 1, 1), (2, 0))


def test_enumerate_count(capsys):
    code, text = run("enumerate", "-n", 3, "--binary")
    assert code == 0 and text == "processes 744\n"
    err = capsys.readouterr().err
    assert "shard 0: explored 100%, found" in err


def test_enumerate_pairwise_only():
    assert run("enumerate", "-n", 3, "--binary", "--pairwise-only", "-q") == (0, "processes 760\n")


def test_enumerate_shards_match(tmp_path):
    whole = tmp_path / "all.pfn"
    assert run("enumerate", "-n", 3, "--binary", "--emit", "pfn", "-o", whole, "-q")[0] == 0
    parts = []
    for s in range(8):
        path = tmp_path / f"s{s}.pfn"
        assert run("enumerate", "-n", 3, "--binary", "--shards", 8, "--shard", s,
                   "--emit", "pfn", "-o", path, "-q")[0] == 0
        parts += [d.process for d in parse_pfn_stream(path.read_text())]
    full = [d.process for d in parse_pfn_stream(whole.read_text())]
    assert len(full) == 744
    assert sorted(w.to_code() for w in parts) == sorted(w.to_code() for w in full)


def test_enumerate_refusals():
    assert run("enumerate", "-n", 3)[0] == 3
    assert run("enumerate", "-n", 5, "--binary")[0] == 3
    assert run("enumerate", "-n", 3, "--binary", "--shards", 2, "--shard", 2)[0] == 3
    assert run("enumerate", "-n", 3, "--binary", "--shards", 0)[0] == 3


def test_enumerate_classes_and_classify_agree(tmp_path):
    code, inventory = run("enumerate", "-n", 3, "--binary", "--emit", "classes", "-q")
    assert code == 0
    lines = parse_inventory(inventory)
    assert len(lines) == 10 and sum(l.count for l in lines) == 744
    assert [l for l in lines if "genuine-noncausal" in l.flags][0].count == 64
    stream = tmp_path / "all.pfn"
    run("enumerate", "-n", 3, "--binary", "--emit", "pfn", "-o", stream, "-q")
    out = tmp_path / "inv.txt"
    assert run("classify", stream, "-o", out)[0] == 0
    assert out.read_text() == inventory


def test_classify_files_and_stream(data_dir, tmp_path, monkeypatch):
    code, text = run("classify", data_dir / "cyclic_four.pfn", data_dir / "asymmetric_four.pfn")
    assert code == 0
    lines = parse_inventory(text)
    assert len(lines) == 2
    assert all(l.flags == {"genuine-noncausal"} for l in lines)
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    assert run("classify", "--from-stream") == (0, INVENTORY_HEADER + "\n")
    assert run("classify")[0] == 3
    assert run("classify", data_dir / "cyclic_four.pfn", data_dir / "tri_noncausal.pfn")[0] == 3


def test_classify_marks_invalid_classes(data_dir):
    code, text = run("classify", data_dir / "copy_cycle3.pfn")
    assert code == 0
    assert text.splitlines()[1].endswith(" 1 invalid")


def test_module_entry_point(data_dir):
    proc = subprocess.run([sys.executable, "-m", "procfn", "signal", str(data_dir / "cyclic_four.pfn"), "--vary", "3,4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == (data_dir.parent / "golden" / "signal_cyclic_four_vary_3_4.txt").read_text()
