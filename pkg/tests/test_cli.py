import json

import pandas as pd
import pytest

from main import main, parse_complex, parse_window
from siegel.characters import enumerate_psi_q
from siegel.lfunc import LEvaluator


def test_window_and_complex_parsing():
    assert parse_window("0:50") == (0.0, 50.0)
    assert parse_window("2.5,7") == (2.5, 7.0)
    assert parse_complex("0.5+14.1i") == complex(0.5, 14.1)


def test_bad_window_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["zeros", "scan", "--window", "0-50"])
    assert exc.value.code == 2


def test_chars_count():
    result = main(["chars", "count", "--D", "5", "--Q", "10"])
    assert result["N"] == 52
    assert result["ratio"] == pytest.approx(0.52)


def test_chars_list_csv(tmp_path):
    out = tmp_path / "chars.csv"
    main(["chars", "list", "--D", "5", "--Q", "10", "--report", str(out)])
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["q", "index", "parity", "conductor"]
    assert len(frame) == 52
    assert set(frame["q"]) == {11, 13, 17, 19}
    assert set(frame["parity"]) <= {0, 1}


def test_coeffs_dump_csv(tmp_path):
    out = tmp_path / "nu.csv"
    main(["coeffs", "dump", "--kind", "nu", "--D", "4", "--N", "1000", "--report", str(out)])
    frame = pd.read_csv(out)
    assert frame["n"].tolist() == list(range(1, 1001))
    values = dict(zip(frame["n"], frame["value"]))
    assert (values[1], values[3], values[5], values[25]) == (1, 0, 2, 3)


def test_coeffs_check_passes():
    result = main(["coeffs", "check", "--D", "5", "--N", "2000"])
    assert result["passed"]
    assert [r["identity"] for r in result["identities"]] == ["nu_star_upsilon", "lambda_reciprocity",
                                                             "lambda_prime_powers"]


def test_lfunc_eval_by_modulus_and_index():
    result = main(["lfunc", "eval", "--q", "5", "--index", "1", "--D", "4", "--s", "0.5+14.1i"])
    psi = enumerate_psi_q(5, 4, family_only=False)[0]
    assert result["psi"] == psi.label() == "5:1"
    assert abs(result["L"] - LEvaluator(psi).value(complex(0.5, 14.1))) < 1e-12
    assert result["functional_equation_residual"] < 1e-9


def test_lfunc_fe_residual(tmp_path):
    out = tmp_path / "fe.json"
    main(["lfunc", "fe-residual", "--D", "5", "--Q", "10", "--trials", "100", "--report", str(out)])
    report = json.loads(out.read_text())
    assert report["trials"] == 100
    assert report["max_residual"] < 1e-9


def test_report_on_missing_dir_exits_with_status_one(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["report", "--dir", str(tmp_path / "missing")])
    assert exc.value.code == 1


@pytest.mark.slow
def test_zeros_scan_csv(tmp_path):
    out = tmp_path / "zeros.csv"
    main(["zeros", "scan", "--q", "7", "--D", "5", "--window", "0:20", "--step", "auto", "--report", str(out)])
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["gamma", "source", "simple", "gap"]
    assert len(frame) > 0
    assert frame["gamma"].is_monotonic_increasing
    assert frame["gamma"].between(0, 20).all()
    assert set(frame["source"]) <= {"psi", "psi_chi"}


@pytest.mark.slow
def test_zeros_gaps_histogram():
    result = main(["zeros", "gaps", "--q", "7", "--D", "5", "--window", "0:30"])
    assert sum(result["histogram"]["counts"]) == result["count"] - 1
    assert len(result["histogram"]["edges"]) == len(result["histogram"]["counts"]) + 1


@pytest.mark.slow
def test_moll_upsilon_components():
    result = main(["moll", "upsilon", "--q", "7", "--D", "5", "--Q", "20", "--window", "0:20", "--rho-index", "0"])
    assert result["psi"] == "7:1"
    assert result["total"] == pytest.approx(result["plus"] + result["minus"] + result["star"])
    assert result["total"] >= 0


@pytest.mark.slow
def test_bvp_check_identities():
    result = main(["bvp", "check", "--R", "10", "--d", "6", "--bump-width", "0.05"])
    assert result["g1.boundary_right"] == pytest.approx(1.0, abs=1e-10)
    assert {"g1.ode_residual", "g2.ode_residual", "g3.ode_residual", "g1.norm_squared"} <= set(result)
