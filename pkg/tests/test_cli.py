import hashlib
import json
from fractions import Fraction as F

import pytest

from homcantor.cli import main
from homcantor.ifs import make_ifs, middle_alpha, save


@pytest.fixture
def configs(tmp_path):
    paths = {}
    for name, ifs in [("a920", middle_alpha(F(9, 20))), ("a03", middle_alpha(F(3, 10))),
                      ("a04", middle_alpha(F(2, 5))), ("third", middle_alpha(F(1, 3))),
                      ("a01", middle_alpha(F(1, 10))),
                      ("thick", make_ifs([0, F(2, 5), F(4, 5)], F(1, 5)))]:
        paths[name] = tmp_path / f"{name}.json"
        save(ifs, paths[name])
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def check_manifest(out):
    manifest = json.loads((out / "manifest.json").read_text())
    for entry in manifest["files"]:
        data = (out / entry["file"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        assert len(data) == entry["bytes"]
    return manifest


class TestClassify:
    @pytest.mark.parametrize("a, b, verdict", [("0.1", "0.1", "CantorRegime"),
                                               ("2/5", "2/5", "GapLemmaRegime"),
                                               ("0.28", "0.28", "Mysterious")])
    def test_examples(self, capsys, a, b, verdict):
        code, out, _ = run(capsys, "classify", a, b)
        assert code == 0 and json.loads(out)["verdict"] == verdict

    def test_manifest(self, capsys, tmp_path):
        code, _, _ = run(capsys, "classify", "1/3", "1/3", "--out", tmp_path / "c")
        assert code == 0
        assert check_manifest(tmp_path / "c")["exit_code"] == 0

    def test_bad_number(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["classify", "x", "1/3"])
        assert info.value.code == 2

    def test_out_of_range(self, capsys):
        code, _, err = run(capsys, "classify", "3/4", "1/3")
        assert code == 2 and "(0, 1/2)" in err


class TestPipeline:
    def test_success_and_files(self, capsys, configs, tmp_path):
        out = tmp_path / "run"
        code, text, _ = run(capsys, "pipeline", "--config", configs["a920"], "--seed", 0,
                            "--depth", 6, "--out", out)
        assert code == 0
        manifest = check_manifest(out)
        names = {e["file"] for e in manifest["files"]}
        assert {"report.txt", "certificate.json", "stats.json", "histogram.csv",
                "candidate.json"} <= names
        cert = json.loads((out / "certificate.json").read_text())
        assert cert["J"] and cert["seed"] == 0
        report = dict(line.split(": ", 1) for line in text.splitlines()[1:])
        # report numbers are read back from the certificate
        assert json.loads(report["J"]) == cert["J"]
        assert json.loads(report["runs"]) == len(cert["runs"])
        assert json.loads(report["c0"]) == cert["c0"]
        assert json.loads(report["N"]) == cert["N"]
        assert json.loads(report["draw"]) == cert["draw"]
        assert all(json.loads(report["oracle_containment"]).values())
        assert (out / "histogram.csv").read_text().startswith("bin_center,mass")

    def test_reproducible(self, capsys, configs, tmp_path):
        for name in ("x", "y"):
            assert run(capsys, "pipeline", "--config", configs["a920"], "--seed", 4,
                       "--depth", 2, "--out", tmp_path / name)[0] == 0
        x, y = tmp_path / "x", tmp_path / "y"
        assert (x / "certificate.json").read_bytes() == (y / "certificate.json").read_bytes()
        assert (x / "stats.json").read_bytes() == (y / "stats.json").read_bytes()
        rx = (x / "report.txt").read_text().splitlines()
        ry = (y / "report.txt").read_text().splitlines()
        assert rx[0].startswith("# generated") and rx[1:] == ry[1:]

    def test_seed_required(self, capsys, configs):
        assert run(capsys, "pipeline", "--config", configs["a920"])[0] == 2

    def test_missing_config(self, capsys, tmp_path):
        code, _, err = run(capsys, "pipeline", "--config", tmp_path / "nope.json", "--seed", 1)
        assert code == 2 and "parse" in err

    def test_empty_construction(self, capsys, configs, tmp_path):
        code, _, err = run(capsys, "pipeline", "--config", configs["a03"], "--seed", 1,
                           "--c2", 3, "--out", tmp_path / "e")
        assert code == 5 and "build_L0" in err
        assert check_manifest(tmp_path / "e")["stage"] == "build_L0"

    def test_incommensurable(self, capsys, configs):
        code, _, _ = run(capsys, "pipeline", "--config", configs["third"],
                         "--config", configs["a04"], "--seed", 1)
        assert code == 3

    def test_partition(self, capsys, configs):
        code, _, err = run(capsys, "pipeline", "--config", configs["a920"], "--seed", 1,
                           "--refine", 1)
        assert code == 4 and "select_partitions" in err

    def test_exhausted(self, capsys, configs, tmp_path):
        code, _, err = run(capsys, "pipeline", "--config", configs["a03"], "--seed", 1,
                           "--trials", 2, "--c0", 5, "--out", tmp_path / "x")
        assert code == 6 and "search_omega" in err
        stats = json.loads((tmp_path / "x" / "stats.json").read_text())
        assert stats["trials"] == 2

    def test_workers_env(self, capsys, configs, tmp_path, monkeypatch):
        monkeypatch.setenv("HOMCANTOR_WORKERS", "3")
        assert run(capsys, "pipeline", "--config", configs["a920"], "--seed", 4,
                   "--depth", 1, "--out", tmp_path / "w")[0] == 0
        monkeypatch.delenv("HOMCANTOR_WORKERS")
        assert run(capsys, "pipeline", "--config", configs["a920"], "--seed", 4,
                   "--depth", 1, "--out", tmp_path / "v")[0] == 0
        assert ((tmp_path / "w" / "certificate.json").read_bytes()
                == (tmp_path / "v" / "certificate.json").read_bytes())


class TestReplay:
    @pytest.fixture
    def cert(self, capsys, configs, tmp_path):
        out = tmp_path / "r"
        assert run(capsys, "pipeline", "--config", configs["a920"], "--seed", 0,
                   "--depth", 1, "--out", out)[0] == 0
        return out / "certificate.json"

    def test_pass(self, capsys, cert, configs):
        code, out, _ = run(capsys, "replay", cert, "--config", configs["a920"])
        assert code == 0 and json.loads(out)["result"] == "pass"

    def test_wrong_base(self, capsys, cert, configs):
        assert run(capsys, "replay", cert, "--config", configs["a04"])[0] == 8

    def test_tampered(self, capsys, cert, tmp_path):
        data = json.loads(cert.read_text())
        data["J"] = [["-3", "3"]]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        code, out, _ = run(capsys, "replay", bad, "--out", tmp_path / "rr")
        assert code == 8 and json.loads(out)["result"] == "fail"
        assert check_manifest(tmp_path / "rr")["exit_code"] == 8

    def test_unreadable(self, capsys, tmp_path):
        p = tmp_path / "junk.json"
        p.write_text("{not json")
        assert run(capsys, "replay", p)[0] == 2


class TestOracle:
    def test_middle_third(self, capsys, configs):
        code, out, _ = run(capsys, "oracle", "--config", configs["third"], "--depth", 1)
        assert code == 0 and json.loads(out)["intervals"] == [["-1", "1"]]

    def test_gap_lemma(self, capsys, configs, tmp_path):
        code, out, _ = run(capsys, "oracle", "--config", configs["a04"], "--depth", 12,
                           "--mode", "sum", "--out", tmp_path / "o")
        assert code == 0 and json.loads(out)["intervals"] == [["0", "2"]]
        check_manifest(tmp_path / "o")

    def test_thin_measure(self, capsys, configs):
        ms = []
        for n in (1, 2, 3):
            _, out, _ = run(capsys, "oracle", "--config", configs["a01"], "--depth", n,
                            "--mode", "sum")
            ms.append(F(json.loads(out)["measure"]))
        assert ms[1] <= F(2, 5) * ms[0] and ms[2] <= F(2, 5) * ms[1]

    def test_incommensurable(self, capsys, configs):
        code, _, _ = run(capsys, "oracle", "--config", configs["thick"],
                         "--config", configs["a04"])
        assert code == 3


def test_region_grid(capsys, tmp_path):
    code, out, _ = run(capsys, "region-grid", "--resolution", 2, "--depth", 2,
                       "--out", tmp_path / "g")
    assert code == 0 and out.splitlines()[0].startswith("a,b,d_sum,thickness_product,verdict")
    assert len(out.splitlines()) == 2
    check_manifest(tmp_path / "g")
