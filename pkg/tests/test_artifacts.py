import json

import numpy as np
import pandas as pd
import pytest

from artifacts import ArtifactError, ArtifactStore, dumps
from function_specs import FunctionSpecError, FunctionSpecParser
from report import report_summary


def _identity(name, value):
    return {"stage": "test", "name": name, "value": value, "target": 1.0, "tolerance": 1e-9,
            "tag": "t", "passed": abs(value - 1.0) < 1e-9}


@pytest.fixture
def run_dir(tmp_path):
    store = ArtifactStore(str(tmp_path))
    store.write_json("identities.json", [_identity("a", 1.0), _identity("b", 2.0)])
    store.write_table("zeros.csv", pd.DataFrame({"gamma": [1.5, 2.25], "source": ["psi", "psi_chi"]}))
    store.write_manifest({"test": "v1"})
    return tmp_path


def test_dumps_handles_numpy_and_complex():
    text = dumps({"z": complex(1, -2), "n": np.int64(3), "x": np.float64(0.5), "a": np.arange(2)})
    assert json.loads(text) == {"a": [0, 1], "n": 3, "x": 0.5, "z": [1.0, -2.0]}


def test_verify_clean_run(run_dir):
    status = ArtifactStore(str(run_dir)).verify()
    assert status == {"identities.json": "ok", "zeros.csv": "ok"}


def test_tampering_is_flagged(run_dir):
    path = run_dir / "zeros.csv"
    path.write_text(path.read_text().replace("1.5", "1.6"))
    status = ArtifactStore(str(run_dir)).verify()
    assert status["zeros.csv"] == "checksum mismatch"
    summary = report_summary(str(run_dir))
    row = summary[summary["check"] == "zeros.csv"].iloc[0]
    assert not row["passed"]


def test_missing_artifact(run_dir):
    (run_dir / "zeros.csv").unlink()
    assert ArtifactStore(str(run_dir)).verify()["zeros.csv"] == "missing"


def test_report_on_empty_directory(tmp_path):
    with pytest.raises(ArtifactError):
        report_summary(str(tmp_path))
    with pytest.raises(ArtifactError):
        report_summary(str(tmp_path / "absent"))


def test_report_rows(run_dir):
    summary = report_summary(str(run_dir))
    identities = summary[summary["kind"] == "identity"]
    assert identities["passed"].tolist() == [True, False]


def test_table_round_trip_keeps_precision(tmp_path):
    store = ArtifactStore(str(tmp_path))
    value = 0.1 + 0.2
    store.write_table("t.csv", pd.DataFrame({"x": [value]}))
    assert store.load_table("t.csv")["x"].iloc[0] == value


def test_parse_sum_of_specs():
    parser = FunctionSpecParser(alpha=0.3)
    f = parser.parse({"type": "sum", "terms": [{"type": "constant", "value": 2.0},
                                                {"type": "polynomial", "coeffs": [0, 1]}],
                      "weights": [1.0, [0.0, 1.0]]})
    assert f(0.5) == pytest.approx(2.0 + 0.5j)
    assert f.prime(0.5) == pytest.approx(1j)


def test_parse_exponential_from_json():
    f = FunctionSpecParser(alpha=0.5).parse('{"type": "exponential", "s": [0.25, 0]}')
    assert f(1.0).real == pytest.approx(np.exp(0.5))


@pytest.mark.parametrize("spec", ['{"type": "spline"}', "not json", '{"coeffs": [1]}',
                                  '{"type": "polynomial"}', '{"type": "sum", "terms": []}',
                                  '{"type": "exponential", "s": [1, 2, 3]}'])
def test_parse_errors(spec):
    with pytest.raises(FunctionSpecError):
        FunctionSpecParser(alpha=0.3).parse(spec)


def test_parse_missing_file(tmp_path):
    with pytest.raises(FunctionSpecError):
        FunctionSpecParser(alpha=0.3).parse_file(str(tmp_path / "none.json"))
