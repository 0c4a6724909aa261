import asyncio
import json
import math
from pathlib import Path

import pytest

from config import Config, RunConfig
from orchestrator import SiegelPipeline
from report import report_summary
from siegel.approx import lattice_thetas

SMOKE = Path(__file__).resolve().parent.parent / "data" / "smoke_run.env"
RUN_LOCAL = {"config.json", "manifest.json"}


def _run(out: Path, workers: int):
    cfg = RunConfig.from_file(str(SMOKE), workers=workers, output_dir=str(out))
    return asyncio.run(SiegelPipeline(cfg).run())


@pytest.mark.slow
def test_worker_count_does_not_change_artifacts(tmp_path):
    one = _run(tmp_path / "w1", 1)
    eight = _run(tmp_path / "w8", 8)
    assert one.status == eight.status == "success"
    names = sorted(p.name for p in (tmp_path / "w1").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "w8").iterdir())
    for name in names:
        if name in RUN_LOCAL:
            continue
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w8" / name).read_bytes(), name

    summary = report_summary(str(tmp_path / "w1"))
    identities = summary[summary["kind"] == "identity"]
    assert len(identities) >= 12
    assert summary[summary["kind"] == "checksum"]["passed"].all()


@pytest.mark.slow
def test_manifest_lists_every_artifact(tmp_path):
    _run(tmp_path, 2)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    on_disk = {p.name for p in tmp_path.iterdir()} - {"manifest.json"}
    assert set(manifest["artifacts"]) == on_disk
    assert manifest["schema_version"] == 1


def test_contour_oracle_off_by_default(tmp_path, ctx, params, monkeypatch):
    monkeypatch.setattr(Config, "ENABLE_CONTOUR_ORACLE", False)
    pipeline = SiegelPipeline(RunConfig(D=5, Q=20.0, output_dir=str(tmp_path)))
    assert pipeline._contour_oracle(ctx, complex(0.5, 14.0), lattice_thetas(params.alpha, 1)) == {}


@pytest.mark.slow
def test_contour_oracle_reports_projection(tmp_path, ctx, params, monkeypatch):
    monkeypatch.setattr(Config, "ENABLE_CONTOUR_ORACLE", True)
    pipeline = SiegelPipeline(RunConfig(D=5, Q=20.0, output_dir=str(tmp_path)))
    out = pipeline._contour_oracle(ctx, complex(0.5, 14.0), lattice_thetas(params.alpha, 1))
    assert set(out) == {"contour.nudges", "contour.projection_residual", "contour.projection_relative"}
    assert math.isfinite(out["contour.projection_relative"])
    assert out["contour.nudges"] >= 0
