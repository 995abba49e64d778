import csv
import io
import json
import math

import numpy as np

from procsup.reports import (
    DESIGN_DECISIONS,
    SCHEMA,
    SCHEMA_VERSION,
    ComparisonReport,
    build_report,
    safe_ratio,
    to_csv,
    to_json,
)


def test_safe_ratio_conventions():
    assert safe_ratio(0.0, 0.0) == 0.0
    assert safe_ratio(2.0, 0.0) == math.inf
    assert safe_ratio(3.0, 2.0) == 1.5


def test_build_report_shape_and_stability():
    doc = build_report("demo", {"seed": 1}, {"set": "abc"}, {"x": 1.0})
    assert doc["schema"] == SCHEMA and doc["schema_version"] == SCHEMA_VERSION
    assert doc["design_decisions"] == DESIGN_DECISIONS
    assert "stamp" not in doc
    assert to_json(doc) == to_json(build_report("demo", {"seed": 1}, {"set": "abc"}, {"x": 1.0}))


def test_stamp_only_when_asked():
    doc = build_report("demo", {}, {}, {}, stamp="run-42")
    assert doc["stamp"] == "run-42"


def test_json_encodes_infinities_and_numpy_scalars():
    results = {
        "ratio": math.inf,
        "neg": -math.inf,
        "flag": np.bool_(True),
        "count": np.int64(7),
        "value": np.float64(2.5),
        "vec": np.array([1.0, 2.0]),
    }
    text = to_json(build_report("demo", {}, {}, results))
    parsed = json.loads(text)["results"]
    assert parsed == {
        "ratio": "inf",
        "neg": "-inf",
        "flag": True,
        "count": 7,
        "value": 2.5,
        "vec": [1.0, 2.0],
    }


def test_json_is_sorted_and_newline_terminated():
    text = to_json({"b": 1, "a": 2})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")


def test_csv_flattens_nested_keys():
    doc = build_report("demo", {"p": [1, 2]}, {"set": "h"}, {"inner": {"x": 1.5}})
    rows = list(csv.reader(io.StringIO(to_csv(doc))))
    assert rows[0] == ["key", "value"]
    table = {k: v for k, v in rows[1:]}
    assert table["results.inner.x"] == "1.5"
    assert table["config.p[0]"] == "1"


def test_comparison_report_to_dict_encodes_inf():
    report = ComparisonReport(
        quantity="q",
        lhs_label="a",
        rhs_label="b",
        lhs=1.0,
        rhs=0.0,
        ratio=math.inf,
    )
    assert report.to_dict()["ratio"] == "inf"
    # report-only comparisons carry no verdict field at all
    assert "violation" not in report.to_dict()
    checked = ComparisonReport(
        quantity="q", lhs_label="a", rhs_label="b", lhs=1.0, rhs=1.0, ratio=1.0,
        bound_factor=4.0, violation=False,
    )
    assert checked.to_dict()["violation"] is False
    assert checked.to_dict()["bound_factor"] == 4.0
