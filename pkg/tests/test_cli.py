import json

import pytest
from click.testing import CliRunner

from cyclegkm.cli import COMMANDS, ConfigError, SessionConfig, _dependencies, main, run, write_outputs

GOLDEN_CONFIG = {
    "n": 2,
    "N": 4,
    "summands": [[1, 4], [2, 2], [2, 2]],
    "e": [2, 2],
    "commands": "all",
    "gsub": ["U(1,4)", "S(1)+U(2,3)", "U(2,2)+U(2,2)"],
    "cocharacter": [2, 1, 4, 5],
    "formats": ["dot", "tikz", "json"],
}


@pytest.fixture(scope="module")
def golden_result():
    return run(SessionConfig.from_dict(GOLDEN_CONFIG))


@pytest.mark.parametrize(
    "patch,path",
    [
        ({"n": 0}, "n:"),
        ({"n": "two"}, "n:"),
        ({"summands": [[3, 1]]}, "summands[0][0]"),
        ({"summands": [[1, 5]]}, "summands[0][1]"),
        ({"summands": [[1]]}, "summands[0]"),
        ({"e": [2]}, "e:"),
        ({"e": [2, 9]}, "e[1]"),
        ({"commands": ["plot"]}, "commands[0]"),
        ({"formats": ["svg"]}, "formats[0]"),
        ({"gsub_mode": "guess"}, "gsub_mode"),
        ({"gsub": ["U(7,1)"]}, "gsub[0]"),
        ({"cocharacter": [1, 2]}, "cocharacter"),
        ({"euler_policy": "any"}, "euler_policy"),
        ({"colour": 1}, "colour"),
    ],
)
def test_validation_names_the_field(patch, path):
    data = dict(GOLDEN_CONFIG, **patch)
    with pytest.raises(ConfigError) as err:
        SessionConfig.from_dict(data)
    assert str(err.value).startswith(path)


def test_missing_required_field():
    with pytest.raises(ConfigError, match="^e: required"):
        SessionConfig.from_dict({"n": 1, "summands": [[1, 1]]})
    with pytest.raises(ConfigError, match="<root>"):
        SessionConfig.from_dict([])


def test_inline_config():
    cfg = SessionConfig.from_inline("n=2; U(1,4)+U(2,2)+U(2,2); e=2,2; chi=2,1,4,5; seed=7")
    assert cfg.e == [2, 2] and cfg.cocharacter == [2, 1, 4, 5] and cfg.seed == 7
    assert cfg.summands == [(1, 4), (2, 2), (2, 2)]
    with pytest.raises(ConfigError, match="^e:"):
        SessionConfig.from_inline("n=2; U(1,4)")
    with pytest.raises(ConfigError, match="^inline"):
        SessionConfig.from_inline("U(1,4); e=1")


def test_dependencies():
    assert _dependencies(["verify-basis"]) == list(COMMANDS)
    assert _dependencies(["strata"]) == ["fixed-points", "strata"]
    assert _dependencies(["fixed-points"]) == ["fixed-points"]


def test_golden_run(golden_result):
    r = golden_result
    assert r.status == "ok" and r.exit_code == 0
    rep = r.report
    assert rep["fixed-points"]["count"] == 8
    assert rep["moment-graph"]["edge_count"] == 13
    assert rep["moment-graph"]["poincare_text"] == "1 + 2q + 4q^2 + q^3"
    assert [c["fixed_point_count"] for c in rep["desing"]["components"]] == [3, 6, 3]
    assert rep["verify-basis"]["ok"]
    assert [s["stratum_dim"] for s in rep["strata"]] == [3, 2, 2, 2, 1]
    assert {"momentgraph.dot", "momentgraph.tex", "momentgraph.json", "component_3.json"} <= set(r.files)


def test_run_is_deterministic(golden_result, tmp_path):
    again = run(SessionConfig.from_dict(GOLDEN_CONFIG))
    write_outputs(golden_result, tmp_path / "a")
    write_outputs(again, tmp_path / "b")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_unrequested_sections_dropped():
    cfg = SessionConfig.from_dict(dict(GOLDEN_CONFIG, commands=["strata"]))
    rep = run(cfg).report
    assert "strata" in rep and "fixed-points" not in rep and "euler" not in rep


def test_empty_status():
    r = run(SessionConfig.from_inline("n=2; U(2,2); e=0,1"))
    assert r.status == "empty" and r.exit_code == 0


def test_lemma_config_selected_automatically():
    r = run(SessionConfig.from_inline("n=2; U(1,4)+U(2,4); e=2,2"))
    assert r.report["desing"]["mode"] == "lemma410"
    assert r.report["desing"]["proven"] and len(r.report["desing"]["components"]) == 2
    assert r.status == "ok"


def test_user_basis_failure_exit_code():
    bad = [["1"] * 8 for _ in range(8)]
    r = run(SessionConfig.from_dict(dict(GOLDEN_CONFIG, commands=["verify-basis"], basis=bad)))
    assert r.status == "failed" and r.exit_code == 1
    assert r.report["verify-basis"]["source"] == "user"


def test_undetermined_status():
    r = run(SessionConfig.from_inline("n=2; S(1)+S(1)+S(1)+S(1); e=2,0"))
    assert r.status == "undetermined" and r.exit_code == 1
    assert r.report["euler"]["missing"]


def test_cli_run_writes_outputs(tmp_path):
    cfg = tmp_path / "golden.json"
    cfg.write_text(json.dumps(GOLDEN_CONFIG))
    out = tmp_path / "out"
    res = CliRunner().invoke(main, ["run", "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert "status: ok" in res.output
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "ok"
    assert (out / "momentgraph.tex").exists()


def test_cli_verb_and_format(tmp_path):
    out = tmp_path / "mg"
    res = CliRunner().invoke(
        main, ["moment-graph", "n=2; U(1,4)+U(2,2)+U(2,2); e=2,2", "--out", str(out), "--format", "dot"]
    )
    assert res.exit_code == 0, res.output
    rep = json.loads((out / "report.json").read_text())
    assert set(rep) >= {"moment-graph", "status"} and "euler" not in rep
    assert sorted(p.name for p in out.iterdir()) == ["momentgraph.dot", "report.json"]


def test_cli_config_error_exit_code(tmp_path):
    res = CliRunner().invoke(main, ["fixed-points", "n=2; U(1,4); e=1,9", "--out", str(tmp_path)])
    assert res.exit_code == 2
    assert "e[1]" in res.output
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    res = CliRunner().invoke(main, ["run", "--config", str(bad), "--out", str(tmp_path)])
    assert res.exit_code == 2
    res = CliRunner().invoke(main, ["run", "--out", str(tmp_path)])
    assert res.exit_code == 2


def test_cli_seed_override(tmp_path):
    res = CliRunner().invoke(main, ["fixed-points", "n=2; U(1,2); e=1,1", "--seed", "5", "--out", str(tmp_path)])
    assert res.exit_code == 0
    assert json.loads((tmp_path / "report.json").read_text())["input"]["seed"] == 5
