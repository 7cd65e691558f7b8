import json
import subprocess
import sys

import pytest

from colline.cli import run

IDENTITY = "map id : 2 -> 2 { y0 = x0; y1 = x1 }\n"
TRANSLATE = "map translate : 2 -> 2 { y0 = x0 + 1; y1 = x1 + 1 }\n"
MULTI = IDENTITY + "map double : 1 -> 1 { y0 = 2*x0 }\n"
BAD = "map bad : 1 -> 1 { y0 = x3 }\n"


@pytest.fixture
def mapfile(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def run_json(argv, capsys):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


class TestClassifyCommand:
    def test_identity_exact_linear(self, mapfile, capsys):
        code, report = run_json(
            ["classify", mapfile("id.map", IDENTITY), "--probes", "50"], capsys
        )
        assert code == 0
        assert report["classification"]["verdict"] == "exact_linear"
        assert report["map"]["name"] == "id"
        assert report["config"]["probes"] == 50

    def test_builtin_lemma23_non_linear(self, capsys):
        code, report = run_json(
            ["classify", "--builtin", "lemma23:m=2,n=2,e0=0,d0=(0,1)", "--probes", "100"],
            capsys,
        )
        assert code == 0
        cls = report["classification"]
        assert cls["verdict"] == "non_linear"
        assert cls["witness"]["check"] == "additivity"

    def test_no_symbolic_flag(self, mapfile, capsys):
        code, report = run_json(
            ["classify", mapfile("id.map", IDENTITY), "--probes", "60", "--no-symbolic"],
            capsys,
        )
        assert code == 0
        assert report["classification"]["verdict"] == "empirically_linear"
        assert report["certificates"]

    def test_multi_map_file_gives_report_array(self, mapfile, capsys):
        code, reports = run_json(
            ["classify", mapfile("multi.map", MULTI), "--probes", "30"], capsys
        )
        assert code == 0
        assert isinstance(reports, list) and len(reports) == 2
        assert [r["map"]["name"] for r in reports] == ["id", "double"]

    def test_map_selector(self, mapfile, capsys):
        code, report = run_json(
            ["classify", mapfile("multi.map", MULTI), "--map", "double", "--probes", "30"],
            capsys,
        )
        assert code == 0
        assert report["map"]["name"] == "double"


class TestFailureModes:
    def test_parse_error_exits_1_with_position(self, mapfile, capsys):
        code = run(["classify", mapfile("bad.map", BAD)])
        err = capsys.readouterr().err
        assert code == 1
        assert "variable index 3 out of range" in err
        assert "1:25" in err

    def test_missing_file_exits_1(self, capsys):
        assert run(["classify", "/nonexistent/x.map"]) == 1

    def test_no_map_given_exits_1(self, capsys):
        assert run(["classify"]) == 1

    def test_no_command_exits_1(self, capsys):
        assert run([]) == 1

    def test_unknown_map_name_exits_1(self, mapfile, capsys):
        assert run(["classify", mapfile("m.map", MULTI), "--map", "nope"]) == 1

    def test_scalar_check_on_vector_map_exits_1(self, mapfile, capsys):
        assert run(["check", "scalar-mult", mapfile("id.map", IDENTITY)]) == 1


class TestCheckCommand:
    def test_ratio_on_translation_passes(self, mapfile, capsys):
        code, report = run_json(
            ["check", "ratio", mapfile("t.map", TRANSLATE), "--probes", "80"], capsys
        )
        assert code == 0
        (outcome,) = report["outcomes"]
        assert outcome["check"] == "ratio-preservation"
        assert outcome["verdict"] == "pass"
        assert outcome["probes"] > 0

    def test_additivity_on_translation_fails_with_witness(self, mapfile, capsys):
        code, report = run_json(
            ["check", "additivity", mapfile("t.map", TRANSLATE), "--probes", "80"], capsys
        )
        assert code == 0  # a Fail verdict is still a verdict
        (outcome,) = report["outcomes"]
        assert outcome["verdict"] == "fail"
        assert outcome["witness"]["inputs"]


class TestCertifyCommand:
    def test_additivity_certificate(self, mapfile, capsys):
        code, report = run_json(
            [
                "certify", "additivity", mapfile("id.map", IDENTITY),
                "--a", "(1, 0)", "--b", "(0, 1)",
            ],
            capsys,
        )
        assert code == 0
        (cert,) = report["certificates"]
        assert cert["kind"] == "additivity-case1"
        assert cert["holds"] is True
        assert len(cert["lines"]) == 4

    def test_homogeneity_certificate_default_points(self, mapfile, capsys):
        code, report = run_json(
            ["certify", "homogeneity", mapfile("id.map", IDENTITY), "--r", "3"], capsys
        )
        assert code == 0
        (cert,) = report["certificates"]
        assert cert["kind"] == "homogeneity"


class TestZooCommand:
    def test_describes_builtin(self, capsys):
        code, report = run_json(
            ["zoo", "--builtin", "lemma23:m=2,n=2,e0=0,d0=(0,1)"], capsys
        )
        assert code == 0
        assert ["(1, 0)", "(0, 2)"] in report["samples"]


class TestDeterminismAndRevalidation:
    def _strip_wall_time(self, payload):
        reports = payload if isinstance(payload, list) else [payload]
        for report in reports:
            report["wall_time_ms"] = 0
        return json.dumps(payload, indent=2)

    def test_report_byte_identical_modulo_wall_time(self, mapfile, tmp_path, capsys):
        path = mapfile("t.map", TRANSLATE)
        argv = ["classify", path, "--probes", "60", "--seed", "4", "--no-symbolic"]
        texts = []
        for out in ("a.json", "b.json"):
            dest = tmp_path / out
            assert run(argv + ["--out", str(dest)]) == 0
            texts.append(self._strip_wall_time(json.loads(dest.read_text())))
        assert texts[0] == texts[1]

    def test_revalidate_fresh_reports(self, mapfile, tmp_path, capsys):
        cases = [
            (["classify", mapfile("t.map", TRANSLATE), "--no-symbolic"], "t.json"),
            (["classify", "--builtin", "lemma23:m=2,n=2,e0=0,d0=(0,1)"], "l.json"),
            (["certify", "additivity", mapfile("id.map", IDENTITY)], "c.json"),
            (["check", "additivity", mapfile("t2.map", TRANSLATE)], "k.json"),
        ]
        for argv, name in cases:
            dest = tmp_path / name
            assert run(argv + ["--probes", "60", "--out", str(dest)]) == 0
            assert run(["--revalidate", str(dest)]) == 0

    def test_revalidate_detects_tampering(self, mapfile, tmp_path, capsys):
        dest = tmp_path / "r.json"
        assert run(
            ["classify", "--builtin", "lemma23:m=2,n=2,e0=0,d0=(0,1)",
             "--probes", "60", "--out", str(dest)]
        ) == 0
        report = json.loads(dest.read_text())
        witness = report["classification"]["witness"]
        witness["inputs"]["a"]["value"] = "(0, 0)"
        for outcome in report["outcomes"]:
            if outcome["witness"]:
                outcome["witness"]["inputs"] = witness["inputs"]
        dest.write_text(json.dumps(report))
        assert run(["--revalidate", str(dest)]) == 2

    def test_revalidate_missing_file_exits_1(self, capsys):
        assert run(["--revalidate", "/nonexistent.json"]) == 1

    def test_env_seed_overrides_default_only(self, mapfile, tmp_path, capsys, monkeypatch):
        path = mapfile("t.map", TRANSLATE)

        def seed_of(argv):
            dest = tmp_path / "s.json"
            assert run(argv + ["--out", str(dest)]) == 0
            return json.loads(dest.read_text())["config"]["seed"]

        monkeypatch.setenv("COLLINE_SEED", "99")
        assert seed_of(["classify", path, "--probes", "30"]) == 99
        assert seed_of(["classify", path, "--probes", "30", "--seed", "7"]) == 7
        monkeypatch.delenv("COLLINE_SEED")
        assert seed_of(["classify", path, "--probes", "30"]) == 0


class TestTextFormat:
    def test_text_rendering(self, mapfile, capsys):
        code = run(
            ["classify", mapfile("t.map", TRANSLATE), "--probes", "40", "--format", "text"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "verdict: exact_affine" in out
        assert "[PASS]" in out or "[FAIL]" in out or "exact" in out


class TestConsoleScript:
    def test_installed_entry_point(self, tmp_path):
        path = tmp_path / "id.map"
        path.write_text(IDENTITY)
        proc = subprocess.run(
            [sys.executable, "-m", "colline.cli", "classify", str(path), "--probes", "30"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["classification"]["verdict"] == "exact_linear"
