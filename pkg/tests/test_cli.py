import json
import os

from corrdyn.cli import main


def read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


class TestFiber:
    def test_sqrt(self, capsys):
        assert main(["fiber", "--curve", "w^2 - z", "--at", "4"]) == 0
        out = capsys.readouterr().out.strip().split("\n")
        assert out == ["-2.0", "2.0"]

    def test_multiplicity(self, capsys):
        assert main(["fiber", "--curve", "w^2", "--at", "7"]) == 0
        assert "multiplicity 2" in capsys.readouterr().out

    def test_operator_source(self, capsys):
        assert main(["fiber", "--op", "w*D", "--n", "50", "--at", "3+2i"]) == 0
        assert capsys.readouterr().out.strip() == "0.0"

    def test_usage_errors(self, capsys):
        assert main(["fiber", "--at", "4"]) == 2
        assert main(["fiber", "--curve", "w^2 - z", "--op", "w*D", "--n", "3",
                     "--at", "4"]) == 2
        assert main(["fiber", "--curve", "w^2 - z", "--at", "w"]) == 2


class TestCertify:
    def test_pass(self, tmp_path, capsys):
        rc = main(["certify", "--op", "(w^2-1)*D^2 + D", "--n", "100",
                   "--out", str(tmp_path)])
        assert rc == 0
        obj = json.loads(read(str(tmp_path / "certificate.json")))
        assert obj["pass"] is True

    def test_fail_exit_1(self, tmp_path):
        rc = main(["certify", "--op", "(w^2-1)*D^2 + D", "--n", "2",
                   "--out", str(tmp_path)])
        assert rc == 1
        obj = json.loads(read(str(tmp_path / "certificate.json")))
        assert obj["pass"] is False

    def test_family_inline(self, tmp_path):
        fam = json.dumps({"R0": "w^2 - 1", "P": ["0", "0", "0"],
                          "beta": [[0, 0], [0, 0], [0, 0]]})
        rc = main(["certify", "--family", fam, "--out", str(tmp_path)])
        assert rc == 0


class TestMinvset:
    def test_wd_single_cell(self, tmp_path):
        rc = main(["minvset", "--op", "w*D", "--n", "50", "--eps", "1e-3",
                   "--out", str(tmp_path)])
        assert rc == 0
        obj = json.loads(read(str(tmp_path / "cellset.json")))
        assert obj["cells"] == [[0, 0, 0]]

    def test_ppm(self, tmp_path):
        rc = main(["minvset", "--op", "(w^2-1)*D^2 + D", "--n", "100",
                   "--eps", "0.01", "--format", "ppm", "--out", str(tmp_path)])
        assert rc == 0
        assert read(str(tmp_path / "cellset.ppm")).startswith(b"P6\n")

    def test_not_certified_exit_1(self, tmp_path):
        rc = main(["minvset", "--op", "(w^2-1)*D^2 + D", "--n", "2",
                   "--eps", "0.01", "--out", str(tmp_path)])
        assert rc == 1

    def test_bad_eps_exit_2(self, tmp_path):
        rc = main(["minvset", "--op", "w*D", "--n", "50", "--eps", "-1",
                   "--out", str(tmp_path)])
        assert rc == 2

    def test_allow_uncertified(self, tmp_path):
        rc = main(["minvset", "--op", "(w^2-1)*D^2 + D", "--n", "2",
                   "--eps", "0.05", "--max-atoms", "2000",
                   "--allow-uncertified", "--out", str(tmp_path)])
        assert rc == 0
        obj = json.loads(read(str(tmp_path / "cellset.json")))
        assert obj["certified"] is False


class TestMeasure:
    def test_exact(self, tmp_path):
        rc = main(["measure", "--op", "(w^2-1)*D^2 + D", "--n", "100",
                   "--a", "0.3", "--m", "6", "--out", str(tmp_path)])
        assert rc == 0
        mu = json.loads(read(str(tmp_path / "measure_exact.json")))
        assert abs(mu["total"] - 1.0) < 1e-12
        csv = read(str(tmp_path / "convergence.csv")).decode()
        assert csv.splitlines()[0] == "m,tv,moment,invariance"
        assert len(csv.splitlines()) == 7

    def test_both_kinds(self, tmp_path):
        rc = main(["measure", "--curve", "w^2 - 1", "--a", "0.3", "--m", "3",
                   "--kind", "both", "--samples", "500", "--seed", "3",
                   "--out", str(tmp_path)])
        assert rc == 0
        assert os.path.exists(tmp_path / "measure_mc.json")
        agreement = json.loads(read(str(tmp_path / "agreement.json")))
        assert agreement["tv"] <= 0.05


class TestCantorCli:
    def test_csv(self, tmp_path):
        rc = main(["cantor", "--op", "(w^2-1)*D^2 + D", "--n", "100",
                   "--eps-list", "0.02,0.01", "--out", str(tmp_path)])
        assert rc == 0
        lines = read(str(tmp_path / "cantor.csv")).decode().splitlines()
        assert lines[0].startswith("eps,")
        assert len(lines) == 3


class TestPeriodicCli:
    def test_json(self, tmp_path):
        rc = main(["periodic", "--op", "(w^2-1)*D^2 + D", "--n", "100",
                   "--max-len", "2", "--count", "8", "--out", str(tmp_path)])
        assert rc == 0
        orbits = json.loads(read(str(tmp_path / "periodic.json")))
        assert len(orbits) == 3
        assert all(o["period"] == len(o["word"]) for o in orbits)


class TestThreshold:
    def test_constant(self, capsys):
        assert main(["threshold", "--op", "(w^2-1)*D^2", "--n-max", "64"]) == 0
        assert capsys.readouterr().out.strip() == "2"


class TestConfigMerge:
    def test_config_fills_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"at": "4", "curve": "w^2 - z"}))
        assert main(["fiber", "--config", str(cfg), "--at", "9"]) == 0
        out = capsys.readouterr().out.strip().split("\n")
        assert out == ["-3.0", "3.0"]  # flag wins over config

    def test_unknown_field(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"nonsense": 1}))
        assert main(["fiber", "--config", str(cfg), "--curve", "w^2 - z",
                     "--at", "4"]) == 2


class TestDeterminism:
    def test_threads_do_not_change_outputs(self, tmp_path):
        outs = []
        for threads, sub in (("1", "a"), ("8", "b")):
            d = tmp_path / sub
            rc = main(["measure", "--op", "(w^2-1)*D^2 + D", "--n", "100",
                       "--a", "0.3", "--m", "6", "--kind", "both",
                       "--samples", "2000", "--seed", "17",
                       "--threads", threads, "--out", str(d)])
            assert rc == 0
            outs.append({name: read(str(d / name)) for name in
                         ("measure_exact.json", "measure_mc.json",
                          "convergence.csv")})
        assert outs[0] == outs[1]

    def test_repeat_identical(self, tmp_path):
        blobs = []
        for sub in ("x", "y"):
            d = tmp_path / sub
            main(["periodic", "--op", "(w^2-1)*D^2 + D", "--n", "100",
                  "--max-len", "3", "--count", "8", "--out", str(d)])
            blobs.append(read(str(d / "periodic.json")))
        assert blobs[0] == blobs[1]
