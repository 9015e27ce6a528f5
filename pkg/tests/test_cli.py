from __future__ import annotations

import io
import json
import xml.etree.ElementTree as ET

import pytest

from normlab import cli
from normlab.gauge import LpGauge, TrigPolyGauge


@pytest.fixture
def gauge_file(tmp_path):
    def write(doc, name="g.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), stdout=out)
    return code, out.getvalue()


PERTURBED = {"kind": "trigpoly", "a0": 1.025, "cos": [0.0, -0.025], "sin": []}


def test_validate_json(gauge_file):
    code, text = run("validate", "--gauge", gauge_file(PERTURBED))
    doc = json.loads(text)
    assert code == 0
    assert doc["command"] == "validate"
    assert doc["results"]["isNorm"] is True
    assert doc["wallTimeMs"] == 0
    assert len(doc["gaugeDigest"]) == 64


def test_validate_non_norm_exit_2(gauge_file):
    code, text = run("validate", "--gauge", gauge_file({"kind": "trigpoly", "a0": 1.0, "cos": [0, 0, 0.2]}))
    assert code == 2
    assert json.loads(text)["results"]["isNorm"] is False


def test_library_error_is_json(gauge_file):
    code, text = run("defect", "--gauge", gauge_file({"kind": "trigpoly", "a0": 1.0, "cos": [0, 0, 0.2]}))
    assert code == 2
    assert json.loads(text)["error"] == "NotANorm"
    code, text = run("norm", "--gauge", gauge_file({"kind": "spiral"}), "--v", "1", "0")
    assert code == 2 and json.loads(text)["error"] == "ParseError"


def test_usage_errors(gauge_file, tmp_path):
    assert run("frobnicate")[0] == 1
    assert run("norm", "--gauge", gauge_file(PERTURBED))[0] == 1
    assert run("norm", "--gauge", str(tmp_path / "missing.json"), "--v", "1", "0")[0] == 1


def test_norm_and_dual(gauge_file):
    path = gauge_file({"kind": "lp", "p": 4})
    code, text = run("norm", "--gauge", path, "--v", "1", "1")
    assert code == 0
    assert json.loads(text)["results"]["norm"] == pytest.approx(2**0.25)
    code, text = run("dual", "--gauge", path, "--f", "1", "1")
    assert json.loads(text)["results"]["dualNorm"] == pytest.approx(2**0.75)


def test_defect_csv(gauge_file):
    code, text = run("defect", "--gauge", gauge_file(PERTURBED), "--format", "csv")
    assert code == 0
    assert text.splitlines()[0].startswith("theta_x")


def test_timing_flag(gauge_file):
    code, text = run("validate", "--gauge", gauge_file(PERTURBED), "--timing")
    assert json.loads(text)["wallTimeMs"] >= 0


def test_ellipsoids_embeds_errors(gauge_file):
    code, text = run("ellipsoids", "--gauge", gauge_file({"kind": "lp", "p": 4}), "--theta", "0")
    res = json.loads(text)["results"]
    assert code == 0
    assert res["outer"]["error"] == "NoOuterEllipsoid"
    assert "m11" in res["inner"]


def test_iso_gap_csv():
    code, text = run("iso-gap", "--n", "2", "--p", "4")
    rows = text.strip().split("\r\n")
    assert code == 0 and len(rows) == 2
    assert float(dict(zip(rows[0].split(","), rows[1].split(",")))["minGap"]) == pytest.approx(2**0.75)


def test_mazur_json():
    code, text = run("mazur", "--p", "2", "--q", "3", "--samples", "500", "--format", "json")
    assert code == 0
    assert json.loads(text)["results"]


def test_out_file_written(gauge_file, tmp_path):
    out = tmp_path / "sub" / "v.json"
    code, text = run("validate", "--gauge", gauge_file(PERTURBED), "--out", str(out))
    assert code == 0 and text == ""
    assert json.loads(out.read_text())["results"]["isNorm"]


def test_render_svg_is_xml():
    svg = cli.render_svg(TrigPolyGauge(1.025, (0.0, -0.025)), 0.0)
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    classes = {el.get("class") for el in root.iter()}
    assert {"ball", "dual"} <= classes
    assert cli.render_svg(LpGauge(3)) == cli.render_svg(LpGauge(3))


def test_report_needs_out():
    assert run("report")[0] == 1
