import logging
from pathlib import Path
from typing import Dict, Optional

import pandas as pd
import plotly.graph_objects as go

from artifacts import ArtifactError, ArtifactStore
from config import Config

logger = logging.getLogger(__name__)


def report_summary(run_dir: str) -> pd.DataFrame:
    """One row per asserted identity plus one per diagnostic ratio.

    Checksum problems are reported as failed 'artifacts' rows rather than
    raised, so a tampered run still produces a readable table.

    Raises:
        ArtifactError: the directory is missing or has no manifest
    """
    store = ArtifactStore(run_dir)
    status = store.verify()
    rows = [{"stage": "artifacts", "check": name, "value": state, "target": "ok",
             "kind": "checksum", "passed": state == "ok"} for name, state in sorted(status.items())]
    if status.get("identities.json") == "missing":
        raise ArtifactError("identities.json is missing from the run directory")
    for r in store.load_json("identities.json"):
        rows.append({"stage": r["stage"], "check": r["name"], "value": r["value"], "target": r["target"],
                     "kind": "identity", "passed": r["passed"]})
    if status.get("errors.csv") == "ok":
        errors = store.load_table("errors.csv")
        for _, e in errors.iterrows():
            rows.append({"stage": "functional", "check": f"{e['psi']}@{e['gamma']:.6f}.E_over_floor",
                         "value": e["E"] / e["E_floor"], "target": ">= 1", "kind": "diagnostic",
                         "passed": None})
    if status.get("family.json") == "ok":
        family = store.load_json("family.json")
        if "sieve" in family:
            rows.append({"stage": "sieve_means", "check": "large_sieve.max_ratio",
                         "value": family["sieve"]["max_ratio"], "target": "bounded",
                         "kind": "diagnostic", "passed": None})
        if "zero_mean" in family:
            rows.append({"stage": "sieve_means", "check": "zero_mean.ratio",
                         "value": family["zero_mean"]["ratio"], "target": "bounded",
                         "kind": "diagnostic", "passed": None})
    return pd.DataFrame(rows, columns=["stage", "check", "value", "target", "kind", "passed"])


def gap_histogram(run_dir: str, out_name: str = "gaps.html") -> Optional[Path]:
    """Normalised zero gaps per character as a plotly histogram page."""
    if not Config.is_feature_enabled("html_report"):
        return None
    store = ArtifactStore(run_dir)
    diagnostics: Dict = store.load_json("diagnostics.json")
    fig = go.Figure()
    for label, entry in sorted(diagnostics.items()):
        gaps = entry.get("gaps")
        if gaps:
            fig.add_trace(go.Histogram(x=gaps["normalized_gaps"], name=label, opacity=0.6))
    fig.update_layout(barmode="overlay", title="Zero gaps / (pi alpha)",
                      xaxis_title="normalised gap", yaxis_title="count")
    path = Path(run_dir) / out_name
    fig.write_html(str(path), include_plotlyjs="cdn")
    logger.info(f"gap histogram written to {path}")
    return path
