import io
import json
from fractions import Fraction

import pytest

from concavebp import Instance
from concavebp.cli import main
from concavebp.serialize import (
    ParseError,
    instance_digest,
    parse_cost_spec,
    read_instance,
    read_solution,
    write_instance,
    write_solution,
)


def _write_instance(tmp_path, name, sizes):
    inst = Instance.from_values(sizes)
    path = tmp_path / name
    with open(path, "w") as fh:
        write_instance(inst, fh)
    return path, inst


class TestSerialization:
    def test_instance_round_trip(self):
        inst = Instance.from_values(["3/4", "1/16", "1/3", "0"])
        buf = io.StringIO()
        write_instance(inst, buf)
        buf.seek(0)
        back = read_instance(buf)
        assert back == inst

    def test_solution_round_trip_fractional(self):
        from concavebp import fnfi

        inst = Instance.from_values(["3/5"] * 3)
        p = fnfi(inst)
        buf = io.StringIO()
        write_solution(p, inst, "fnfi", "fq:1", 2.0, buf)
        buf.seek(0)
        sol = read_solution(buf)
        assert sol["packing"].bins == p.bins
        assert sol["cost"] == 2.0
        assert sol["digest"] == instance_digest(inst)

    def test_malformed_instance_rejected(self):
        with pytest.raises(ParseError):
            read_instance(io.StringIO("format: nope\n"))
        with pytest.raises(ParseError):
            read_instance(
                io.StringIO("format: concavebp-instance-v1\nn: 2\nsizes: 1/2\n")
            )

    def test_cost_spec_parsing(self):
        f = parse_cost_spec("fq:3", 5)
        assert f.values == (0.0, 1.0, 2.0, 3.0, 3.0, 3.0)
        g = parse_cost_spec("table:0,1,1.5", 4)
        assert g.values == (0.0, 1.0, 1.5, 1.5, 1.5)
        with pytest.raises(ParseError):
            parse_cost_spec("fq:x", 5)
        with pytest.raises(ParseError):
            parse_cost_spec("splines", 5)


class TestGen:
    def test_deterministic_output(self, tmp_path):
        out1, out2 = tmp_path / "a.inst", tmp_path / "b.inst"
        assert main(["gen", "uniform_random", "--param", "n=10", "--seed", "7",
                     "--out", str(out1)]) == 0
        assert main(["gen", "uniform_random", "--param", "n=10", "--seed", "7",
                     "--out", str(out2)]) == 0
        assert out1.read_text() == out2.read_text()

    def test_adversarial_family_contents(self, tmp_path):
        out = tmp_path / "k4.inst"
        assert main(["gen", "sec2_single_large", "--param", "K=4",
                     "--out", str(out)]) == 0
        inst = read_instance(open(out))
        assert inst.sizes[0] == Fraction(3, 4)
        assert inst.sizes[1:] == (Fraction(1, 16),) * 8

    def test_missing_param_is_input_error(self, tmp_path):
        assert main(["gen", "sec2_single_large", "--out", str(tmp_path / "x")]) == 2

    def test_empty_random_instance(self, tmp_path):
        out = tmp_path / "e.inst"
        assert main(["gen", "uniform_random", "--param", "n=0", "--out", str(out)]) == 0
        assert read_instance(open(out)).n == 0

    def test_matching_family_contents(self, tmp_path):
        out = tmp_path / "mh.inst"
        assert main(["gen", "mh_tight", "--param", "N=8", "--param", "K=2",
                     "--out", str(out)]) == 0
        inst = read_instance(open(out))
        assert inst.sizes[:8] == (Fraction(3, 4),) * 8
        assert inst.sizes[8:] == (Fraction(1, 4),) * 8


class TestSolve:
    def test_nfd_on_adversarial_fixture(self, tmp_path, capsys):
        path, _ = _write_instance(
            tmp_path, "k4.inst", [Fraction(3, 4)] + [Fraction(1, 16)] * 8
        )
        out = tmp_path / "k4.sol"
        code = main(["solve", str(path), "--alg", "nfd", "--cost", "fq:4",
                     "--out", str(out)])
        assert code == 0
        assert "cost: 8.0" in capsys.readouterr().out
        sol = read_solution(open(out))
        assert sol["cost"] == 8.0

    def test_exact_single_item(self, tmp_path, capsys):
        path, _ = _write_instance(tmp_path, "one.inst", [Fraction(1, 2)])
        assert main(["solve", str(path), "--alg", "exact", "--cost", "fq:1",
                     "--out", str(tmp_path / "one.sol")]) == 0
        assert "cost: 1.0" in capsys.readouterr().out

    def test_exact_limit_exit_code(self, tmp_path):
        path, _ = _write_instance(tmp_path, "big.inst", [Fraction(1, 2)] * 20)
        assert main(["solve", str(path), "--alg", "exact", "--cost", "fq:1",
                     "--out", str(tmp_path / "big.sol")]) == 4

    def test_afptas_writes_provenance(self, tmp_path):
        import random

        rng = random.Random(5)
        path, inst = _write_instance(
            tmp_path, "r.inst", [Fraction(rng.randint(1, 64), 64) for _ in range(24)]
        )
        out = tmp_path / "r.sol"
        prov = tmp_path / "r.prov.json"
        code = main(["solve", str(path), "--alg", "afptas", "--cost", "fq:3",
                     "--eps", "1/3", "--out", str(out), "--provenance-out", str(prov)])
        assert code == 0
        report = json.loads(prov.read_text())
        assert report["n"] == 24
        assert report["eps"] == "1/3"
        assert main(["verify", str(path), str(out)]) == 0

    def test_afptas_requires_eps(self, tmp_path):
        path, _ = _write_instance(tmp_path, "x.inst", [Fraction(1, 2)] * 6)
        assert main(["solve", str(path), "--alg", "afptas", "--cost", "fq:1",
                     "--out", str(tmp_path / "x.sol")]) == 2

    def test_bad_eps_strings(self, tmp_path):
        path, _ = _write_instance(tmp_path, "y.inst", [Fraction(1, 2)] * 6)
        for bad in ("0.33", "1/2", "2/6", "1/0"):
            assert main(["solve", str(path), "--alg", "afptas", "--cost", "fq:1",
                         "--eps", bad, "--out", str(tmp_path / "y.sol")]) == 2

    def test_fnfi_solution_verifies(self, tmp_path):
        path, _ = _write_instance(tmp_path, "f.inst", [Fraction(3, 5)] * 3)
        out = tmp_path / "f.sol"
        assert main(["solve", str(path), "--alg", "fnfi", "--cost", "fq:1",
                     "--out", str(out)]) == 0
        assert main(["verify", str(path), str(out)]) == 0


class TestVerify:
    def _solved(self, tmp_path):
        path, inst = _write_instance(
            tmp_path, "v.inst", [Fraction(3, 4)] + [Fraction(1, 16)] * 8
        )
        out = tmp_path / "v.sol"
        main(["solve", str(path), "--alg", "nfd", "--cost", "fq:4", "--out", str(out)])
        return path, out

    def test_valid_pair_passes(self, tmp_path):
        path, out = self._solved(tmp_path)
        assert main(["verify", str(path), str(out)]) == 0

    def test_overfull_bin_rejected(self, tmp_path, capsys):
        path, out = self._solved(tmp_path)
        text = out.read_text().replace("bins: 2", "bins: 2")
        lines = text.splitlines()
        # move every item into the first bin: overfull and duplicates gone wrong
        bin_lines = [l for l in lines if l.startswith("bin: ")]
        merged = "bin: " + " ".join(l[5:] for l in bin_lines)
        rest = [l for l in lines if not l.startswith("bin: ")]
        rest = [l.replace("bins: 2", "bins: 1") for l in rest]
        out.write_text("\n".join(rest + [merged]) + "\n")
        assert main(["verify", str(path), str(out)]) == 3
        assert "overfull" in capsys.readouterr().out

    def test_tampered_cost_rejected(self, tmp_path, capsys):
        path, out = self._solved(tmp_path)
        out.write_text(out.read_text().replace("cost: 8.0", "cost: 7.0"))
        assert main(["verify", str(path), str(out)]) == 3
        assert "recomputed" in capsys.readouterr().out

    def test_digest_mismatch_rejected(self, tmp_path):
        path, out = self._solved(tmp_path)
        other, _ = _write_instance(tmp_path, "other.inst", [Fraction(1, 2)] * 9)
        assert main(["verify", str(other), str(out)]) == 3

    def test_missing_file_is_input_error(self, tmp_path):
        path, out = self._solved(tmp_path)
        assert main(["verify", str(path), str(tmp_path / "nope.sol")]) == 2


class TestCompare:
    def test_csv_report(self, tmp_path):
        p1, _ = _write_instance(tmp_path, "a.inst", [Fraction(3, 4)] + [Fraction(1, 16)] * 8)
        p2, _ = _write_instance(tmp_path, "b.inst", [Fraction(1, 2)] * 30)
        out = tmp_path / "report.csv"
        code = main(["compare", "--instances", str(p1), str(p2),
                     "--algs", "nfd,nfi,mh", "--costs", "fq:1,fq:4",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("instance,algorithm,cost_spec")
        # 12 result rows plus mean/max aggregate rows per (algorithm, cost)
        assert len(lines) == 1 + 2 * 3 * 2 + 2 * 3 * 2
        assert any("exact" in l for l in lines[1:])  # small instance gets a ratio
        assert sum("(aggregate)" in l for l in lines) == 12

    def test_aggregate_ratio_values(self, tmp_path):
        # the adversarial fixture pins the nfd aggregate at exactly 8/5
        p1, _ = _write_instance(tmp_path, "a.inst", [Fraction(3, 4)] + [Fraction(1, 16)] * 8)
        out = tmp_path / "r.json"
        main(["compare", "--instances", str(p1), "--algs", "nfd", "--costs", "fq:4",
              "--format", "json", "--out", str(out)])
        rows = json.loads(out.read_text())
        agg = [r for r in rows if r["instance"] == "(aggregate)"]
        assert len(agg) == 2
        assert agg[0]["ratio"] == 1.6 and agg[1]["ratio"] == 1.6

    def test_json_report_with_partial_failure(self, tmp_path):
        p1, _ = _write_instance(tmp_path, "a.inst", [Fraction(1, 2)] * 25)
        out = tmp_path / "report.json"
        code = main(["compare", "--instances", str(p1), str(tmp_path / "missing.inst"),
                     "--algs", "nfi", "--costs", "fq:2", "--format", "json",
                     "--out", str(out)])
        assert code == 0
        rows = json.loads(out.read_text())
        assert len(rows) == 4  # one result, one failure, two aggregate rows
        assert "error" in rows[1]
        assert rows[0]["baseline"] == "overflowed-lower-bound"
        assert rows[0]["ratio"] >= 1.0
        assert {r["instance"] for r in rows[2:]} == {"(aggregate)"}

    def test_rows_follow_input_order(self, tmp_path):
        p1, _ = _write_instance(tmp_path, "a.inst", [Fraction(1, 2)] * 4)
        p2, _ = _write_instance(tmp_path, "b.inst", [Fraction(1, 3)] * 4)
        out = tmp_path / "r.csv"
        main(["compare", "--instances", str(p2), str(p1), "--algs", "nfi",
              "--costs", "fq:1", "--out", str(out)])
        lines = out.read_text().strip().splitlines()[1:]
        assert "b.inst" in lines[0] and "a.inst" in lines[1]
