import csv
import json
import math

import numpy as np

from sbm.report import RatioReport, emit_report, read_report


def _rep(cap=10.0):
    return RatioReport.from_values("e:test", [[0.0, 1.0], [0.5, 0.5]], [0.1, None], [2.0, 3.0], [1.0, 1.0], cap)


def test_spread_and_pass():
    r = _rep()
    assert r.ratio_min == 2.0 and r.ratio_max == 3.0
    assert r.geometric_spread == 1.5 and r.passed
    assert not _rep(cap=1.2).passed
    bad = RatioReport.from_values("e:bad", [1, 2], None, [1.0, -1.0], [1.0, 1.0], 10)
    assert not bad.passed and math.isinf(bad.geometric_spread)
    nan = RatioReport.from_values("e:nan", [1], None, [1.0], [0.0], 10)
    assert not nan.passed
    assert "PASS" in r.summary()


def test_emit_empty(tmp_path):
    j, c = emit_report([], tmp_path / "r.json")
    doc = json.loads(j.read_text())
    assert doc["claims"] == [] and "toolkit_version" in doc
    assert c.read_text().strip() == "claim_id,x,y,lhs,rhs,ratio"


def test_emit_round_trip(tmp_path):
    r = _rep()
    j, c = emit_report([r], tmp_path / "r.json", spec="stable:alpha=1", domain="ball:r=1")
    rows = list(csv.reader(c.open()))
    assert len(rows) == 1 + len(r.samples)
    back = read_report(j)["claims"][0]
    assert back.ratio_min == r.ratio_min and back.ratio_max == r.ratio_max
    np.testing.assert_array_equal(back.ratios, r.ratios)
