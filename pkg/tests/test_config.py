import logging
from pathlib import Path

import pytest

from config import Config, ConfigError, RunConfig

SMOKE = Path(__file__).resolve().parent.parent / "data" / "smoke_run.env"


def test_smoke_file_keeps_D_and_d_apart():
    cfg = RunConfig.from_file(str(SMOKE))
    assert cfg.D == 4 and cfg.d == 6
    assert cfg.window == (0.0, 10.0)
    assert cfg.grid == 8 and cfg.max_anchors == 1


def test_unsigned_discriminant_resolves(tmp_path):
    cfg = RunConfig.from_file(str(SMOKE), output_dir=str(tmp_path))
    assert cfg.analysis_params().D == -4
    assert cfg.output_dir == str(tmp_path)


def test_missing_file():
    with pytest.raises(ConfigError):
        RunConfig.from_file("no/such/run.env")


def test_unknown_key(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("D=5\nMOLLIFIER=7\n")
    with pytest.raises(ConfigError):
        RunConfig.from_file(str(path))


def test_bad_value(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("Q=twenty\n")
    with pytest.raises(ConfigError):
        RunConfig.from_file(str(path))


def test_reversed_window():
    with pytest.raises(ConfigError):
        RunConfig(window=(10.0, 0.0)).validate()


def test_non_fundamental_discriminant():
    with pytest.raises(ConfigError):
        RunConfig(D=9).validate()


def test_bad_precision_and_workers():
    with pytest.raises(ConfigError):
        RunConfig(precision="quad").validate()
    with pytest.raises(ConfigError):
        RunConfig(workers=0).validate()


def test_to_dict_carries_derived_params():
    out = RunConfig().to_dict()
    assert out["window"] == [0.0, 30.0]
    assert out["params"]["alpha"] == pytest.approx(1 / 2.995732273553991)


def test_runtime_defaults():
    runtime = Config.get_runtime_config()
    assert set(runtime) == {"workers", "precision", "mp_dps", "output_dir"}
    assert Config.get_eval_policy().mode == Config.PRECISION
    assert Config.is_feature_enabled("nonexistent") is False


def test_desk_epsilon_note_is_info_not_warning(caplog):
    params = RunConfig(D=5, Q=20.0, R=10.0).analysis_params()
    assert params.epsilon > params.delta1
    with caplog.at_level(logging.INFO, logger="siegel.params"):
        notes = params.validate()
    assert any(n.startswith("epsilon=") for n in notes)
    records = [r for r in caplog.records if r.name == "siegel.params"]
    assert records and all(r.levelno == logging.INFO for r in records)
