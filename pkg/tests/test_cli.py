import csv
import io
import json

import pytest

from randcorr.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestTensor:
    def test_ghz_csv(self, capsys):
        code, out, _ = run(capsys, "tensor", "--named", "ghz", "--n", "3", "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "index,value"
        assert "xxx,1.0" in lines
        assert "zzz,0.0" in lines
        assert len(lines) == 1 + 27

    def test_bell_json(self, capsys):
        code, out, _ = run(capsys, "tensor", "--named", "bell")
        data = json.loads(out)
        assert code == 0 and data["schema"] == 1 and data["num_parties"] == 2
        entries = dict(data["entries"])
        assert list(entries)[:2] == ["xx", "xy"]
        assert entries["zz"] == 1.0
        assert entries["yy"] == -1.0

    def test_state_file(self, capsys, tmp_path):
        f = tmp_path / "s.json"
        f.write_text(json.dumps({"kind": "pure", "local_dims": [2], "amplitudes": [[1, 0], [0, 0]]}))
        code, out, _ = run(capsys, "tensor", "--state", str(f), "--format", "csv")
        assert code == 0
        assert "z,1.0" in out.splitlines()

    def test_malformed_file_names_field(self, capsys, tmp_path):
        f = tmp_path / "s.json"
        f.write_text(json.dumps({"kind": "pure", "local_dims": [2]}))
        code, _, err = run(capsys, "tensor", "--state", str(f))
        assert code == 2
        assert "amplitudes" in err

    def test_invalid_json(self, capsys, tmp_path):
        f = tmp_path / "s.json"
        f.write_text("{nope")
        code, _, _ = run(capsys, "tensor", "--state", str(f))
        assert code == 2

    def test_missing_state(self, capsys):
        code, _, _ = run(capsys, "tensor")
        assert code == 2


class TestWitness:
    def test_ghz_entangled(self, capsys):
        code, out, _ = run(capsys, "witness", "--named", "ghz", "--n", "3", "--M", "200", "--K", "500")
        data = json.loads(out)
        assert code == 0 and data["entangled"] is True
        assert data["K"] == 500 and data["confidence"] == 0.954

    def test_product_usually_not_flagged(self, capsys):
        codes = [
            run(capsys, "witness", "--named", "product", "--dirs", "z,z,z", "--M", "200", "--seed", str(s))[0]
            for s in range(20)
        ]
        assert set(codes) <= {0, 3}
        assert codes.count(3) >= 17

    @pytest.mark.parametrize("conf", ["1.5", "0", "-0.2"])
    def test_bad_confidence(self, capsys, conf):
        code, _, err = run(capsys, "witness", "--named", "ghz", "--n", "3", "--M", "10", "--confidence", conf)
        assert code == 2 and err

    def test_bad_K(self, capsys):
        code, _, _ = run(capsys, "witness", "--named", "ghz", "--n", "3", "--M", "10", "--K", "0")
        assert code == 2

    def test_exact_separable_threshold_flip(self, capsys):
        base = ["witness", "--named", "ghz-noise", "--n", "4", "--M", "1", "--exact", "--bound", "separable"]
        assert run(capsys, *base, "--epsilon", "0.85")[0] == 3
        assert run(capsys, *base, "--epsilon", "0.95")[0] == 0


class TestOtherCommands:
    def test_randcorr(self, capsys):
        code, out, _ = run(capsys, "randcorr", "--named", "ghz", "--n", "3")
        data = json.loads(out)
        assert code == 0
        assert data["correlation_length"] == pytest.approx(4.0)
        assert data["random_correlations_exact"] == pytest.approx(4 / 27)

    def test_spectrum(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--n", "2")
        data = json.loads(out)
        assert code == 0
        assert sorted(set(data["symmetric_eigenvalues"])) == [1.0, 9.0]
        assert len(data["all_eigenvalues"]) == 16

    def test_simulate_csv(self, capsys):
        code, out, _ = run(capsys, "simulate", "--named", "ghz", "--n", "2", "--M", "5", "--K", "10", "--seed", "1",
                           "--format", "csv")
        assert code == 0
        r = rows(out)
        assert len(r) == 5
        assert set(r[0]) == {"index", "u1_x", "u1_y", "u1_z", "u2_x", "u2_y", "u2_z", "exact_E", "estimated_E_K"}

    def test_simulate_needs_seed(self, capsys):
        code, _, err = run(capsys, "simulate", "--named", "ghz", "--n", "2", "--M", "5", "--K", "10")
        assert code == 2 and "--seed" in err

    def test_quditcheck(self, capsys):
        code, out, _ = run(capsys, "quditcheck", "--n", "2", "--d", "3", "--states", "20")
        data = json.loads(out)
        assert code == 0 and data["violations"] == 0

    def test_detectprob(self, capsys):
        code, out, _ = run(capsys, "detectprob", "--named", "ghz", "--n", "3", "--samples", "20000")
        assert code == 0
        assert json.loads(out)["detection_probability"] == pytest.approx(0.26, abs=0.02)


class TestSweep:
    def test_empty_values(self, capsys):
        code, _, err = run(capsys, "sweep", "--param", "M", "--values", "", "--named", "ghz", "--n", "3")
        assert code == 2 and err

    def test_epsilon_flip(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--param", "epsilon", "--values", "0.8,0.88,0.93,1.0",
            "--named", "ghz-noise", "--n", "4", "--M", "1", "--exact", "--bound", "separable",
        )
        assert code == 0
        flags = [r["entangled"] for r in rows(out)]
        assert flags == ["false", "false", "true", "true"]

    def test_N_detectprob_monotone(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--param", "N", "--values", "3..6", "--measure", "detectprob",
            "--named", "ghz", "--samples", "20000",
        )
        assert code == 0
        r = rows(out)
        assert [int(x["value"]) for x in r] == [3, 4, 5, 6]
        p = [float(x["detection_probability"]) for x in r]
        assert p == sorted(p)

    def test_M_sweep_columns(self, capsys):
        code, out, _ = run(capsys, "sweep", "--param", "M", "--values", "10,20", "--reps", "2",
                           "--named", "ghz", "--n", "3")
        assert code == 0
        r = rows(out)
        assert len(r) == 4
        assert list(r[0]) == ["param", "value", "rep", "seed", "N", "M", "K",
                              "confidence", "R_hat", "threshold", "entangled"]


class TestReproducibility:
    ARGS = ["simulate", "--named", "ghz", "--n", "3", "--M", "300", "--K", "100", "--seed", "4", "--format", "csv"]

    def test_byte_identical(self, capsys):
        assert run(capsys, *self.ARGS)[1] == run(capsys, *self.ARGS)[1]

    def test_threads_irrelevant(self, capsys, monkeypatch):
        one = run(capsys, *self.ARGS, "--threads", "1")[1]
        monkeypatch.setenv("RANDCORR_THREADS", "3")
        assert run(capsys, *self.ARGS)[1] == one

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "o.csv"
        code, out, _ = run(capsys, *self.ARGS, "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_text() == run(capsys, *self.ARGS)[1]

    def test_negative_threads(self, capsys):
        assert run(capsys, *self.ARGS, "--threads", "-1")[0] == 2
