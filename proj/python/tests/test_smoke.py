import json
import os
from pathlib import Path

import pytest

import procat

FIXTURES = Path(os.environ.get("PROCAT_FIXTURES_DIR", Path(__file__).resolve().parents[2] / "fixtures"))
DEMO = FIXTURES / "demo.ws"


def test_categories():
    arrow = procat.Category.load(FIXTURES / "arrow.cat", "Arrow")
    a, b = arrow.parse_object("A"), arrow.parse_object("B")
    u = arrow.morphism("u")
    assert len(arrow.hom(a, b)) == 1
    assert arrow.hom(b, a) == []
    assert arrow.compose(arrow.identity(b), u) == u
    z = procat.Category.cycgrp()
    assert z.compose(z.morphism("3", 4, 4), z.morphism("3", 4, 4)).value == 1
    with pytest.raises(procat.ProcatError):
        arrow.compose(u, u)


def test_posets():
    props = procat.poset_properties(procat.IndexPoset.chain(3))
    assert props["has_max"]["verdict"] == "Holds"
    assert procat.poset_properties(procat.IndexPoset.omega())["has_max"]["verdict"] == "Fails"


def test_workspace_queries():
    ws = procat.Workspace.load(DEMO)
    assert ws.kind_of("fu") == "jmorphism"
    assert procat.check_jmorphism(ws, "fu")["verdict"] == "Holds"
    assert procat.equivalent(ws, "fu", "fu")["verdict"] == "Holds"
    with pytest.raises(procat.ProcatError):
        procat.Workspace.parse('category C = "nowhere.cat"\n', FIXTURES)


def test_commands_and_replay(tmp_path):
    first = procat.run("is-iso", DEMO, "fu")
    assert first.exit_code == 1
    assert first.verdict == "Fails"
    assert first.report["evidence"]["h_candidates"] == []
    again = procat.run("is-iso", DEMO, "fu")
    assert json.dumps(first.report) == json.dumps(again.report)

    iso = procat.run("is-iso", DEMO, "sigma")
    saved = tmp_path / "sigma.json"
    saved.write_text(json.dumps(iso.report))
    replayed = procat.run("is-iso", DEMO, "sigma", replay=saved)
    assert replayed.exit_code == 0
    assert replayed.report["replay"]["verified"] is True


def test_errors_are_reports():
    r = procat.run("check-jmorphism", DEMO, "missing")
    assert r.exit_code == 1
    assert r.report["error"]["kind"] == "UnresolvedReference"
    assert "validate" in procat.commands()
