import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from concord import cce, pma
from concord.cli import fmt3, main
from concord.model import Weights, load_profile
from concord.service import create_app
from conftest import FIXTURES


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, [str(a) for a in args])


class TestValidate:
    def test_ok(self, runner):
        result = invoke(runner, "validate", FIXTURES / "divided.json")
        assert result.exit_code == 0
        assert result.output == "ok: 7 choices, 5 participants\n"

    def test_malformed_json_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        result = invoke(runner, "validate", bad)
        assert result.exit_code == 2

    def test_schema_violation_named(self, runner, tmp_path):
        doc = json.loads((FIXTURES / "trio.json").read_text())
        doc["participants"][0]["ranking"] = ["a", "b"]
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(doc))
        result = invoke(runner, "validate", path)
        assert result.exit_code == 2
        assert "p1" in result.output and "permutation" in result.output

    def test_missing_file_exit_2(self, runner):
        assert invoke(runner, "validate", "no-such-file.json").exit_code == 2


class TestPma:
    def test_trio_summary(self, runner):
        result = invoke(runner, "pma", FIXTURES / "trio.json")
        assert result.exit_code == 0
        assert "consensus: b, total: 1" in result.output
        assert "witness b: (0,0,1)" in result.output

    def test_divided_summary(self, runner):
        result = invoke(runner, "pma", FIXTURES / "divided.json")
        assert "consensus: 1, total: 2" in result.output
        assert "witness 1: (0,1,0,1,0)" in result.output

    def test_table_flag_matches_engine(self, runner, trio):
        result = invoke(
            runner, "pma", FIXTURES / "trio.json", "--table", 1, "--format", "csv"
        )
        lines = result.output.strip().splitlines()
        rows = pma.expansion_table(trio, 1)
        table_lines = lines[-(len(rows)) :]
        for line, row in zip(table_lines, rows):
            cells = line.split(",")
            assert [int(c) for c in cells[:3]] == list(row.expansion)

    def test_immediate_profile(self, runner):
        result = invoke(runner, "pma", FIXTURES / "aligned.json")
        assert "consensus: 4, total: 0" in result.output
        assert "immediate" in result.output


class TestCce:
    def test_quartet_table(self, runner, quartet):
        result = invoke(runner, "cce", FIXTURES / "quartet.json", "--limit", 3)
        assert result.exit_code == 0
        assert "consensus order: a, c, d, b (score 2.000), first: a" in result.output
        engine = cce.score_table(quartet, Weights(1, 1), limit=3)
        for entry in engine:
            assert fmt3(entry.score) in result.output

    def test_aligned_top_scores(self, runner):
        result = invoke(runner, "cce", FIXTURES / "aligned.json", "--limit", 2)
        lines = result.output.strip().splitlines()
        assert lines[-2].endswith("3.780")
        assert lines[-1].endswith("4.097")

    def test_divided_head(self, runner):
        result = invoke(runner, "cce", FIXTURES / "divided.json", "--limit", 1)
        last = result.output.strip().splitlines()[-1]
        cells = last.split("\t")
        assert cells[0] == "4 6 7 5 3 2 1"
        assert cells[1:6] == ["9", "8", "10", "9", "8"]
        assert cells[-1] == "9.548"

    def test_limit_exceeded_exit_3(self, runner, tmp_path):
        ids = [f"c{i}" for i in range(11)]
        doc = {
            "choices": [{"id": c, "label": c, "origin": "original"} for c in ids],
            "participants": [
                {"id": "p1", "name": "P1", "ranking": ids, "permit_count": 1}
            ],
        }
        path = tmp_path / "big.json"
        path.write_text(json.dumps(doc))
        result = invoke(runner, "cce", path)
        assert result.exit_code == 3

    def test_output_is_deterministic(self, runner):
        a = invoke(runner, "cce", FIXTURES / "divided.json", "--limit", 5)
        b = invoke(runner, "cce", FIXTURES / "divided.json", "--limit", 5)
        assert a.output == b.output
        c = invoke(runner, "pma", FIXTURES / "divided.json", "--table", 2)
        d = invoke(runner, "pma", FIXTURES / "divided.json", "--table", 2)
        assert c.output == d.output


def build_concluded_log(tmp_path):
    """Drive the immediate-consensus scenario through the API to get a log."""
    data_dir = tmp_path / "sessions"
    app = create_app(data_dir)
    client = TestClient(app)
    sid = client.post("/sessions").json()["session_id"]
    vp = load_profile(FIXTURES / "aligned.json")
    cid = {}
    for choice in vp.choices:
        r = client.post(f"/sessions/{sid}/choices", json={"label": choice.label})
        cid[choice.id] = r.json()["choice_id"]
    for p in vp.participants:
        r = client.post(f"/sessions/{sid}/participants", json={"name": p.display_name})
        pid = r.json()["participant_id"]
        client.put(
            f"/sessions/{sid}/ballots/{pid}",
            json={
                "ranking": [cid[c] for c in p.ballot.ranking],
                "permit_count": p.ballot.permit_count,
            },
        )
    client.post(f"/sessions/{sid}/start")
    client.post(f"/sessions/{sid}/outcome", json={"consensus": False})
    client.post(f"/sessions/{sid}/cce", json={})
    client.post(
        f"/sessions/{sid}/outcome", json={"consensus": True, "choice_id": cid["4"]}
    )
    return data_dir / f"{sid}.jsonl", cid


class TestReplay:
    def test_concluded_session_summary(self, runner, tmp_path):
        log_path, cid = build_concluded_log(tmp_path)
        result = invoke(runner, "replay", log_path)
        assert result.exit_code == 0
        assert f"final phase: concluded({cid['4']})" in result.output
        assert "discussion rounds: 2" in result.output

    def test_empty_file_exit_4(self, runner, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        result = invoke(runner, "replay", path)
        assert result.exit_code == 4
        assert "session_created" in result.output

    def test_truncated_line_reports_lineno(self, runner, tmp_path):
        log_path, _ = build_concluded_log(tmp_path)
        text = log_path.read_text()
        log_path.write_text(text[:-15])
        lineno = len(text[:-15].splitlines())
        result = invoke(runner, "replay", log_path)
        assert result.exit_code == 4
        assert f"line {lineno}" in result.output

    def test_missing_file_exit_4(self, runner):
        assert invoke(runner, "replay", "no-such.jsonl").exit_code == 4


class TestFormatting:
    def test_fmt3_half_even(self):
        assert fmt3(3.2765) in ("3.276", "3.277")  # exact binary value decides
        assert fmt3(2) == "2.000"
        assert fmt3(0.9797958971132712) == "0.980"
        assert fmt3(9.548331) == "9.548"
