import hashlib
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from config import Config

logger = logging.getLogger(__name__)


class ArtifactError(ValueError):
    """A run directory is missing, incomplete or tampered with."""


def _encode(value: Any):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.complexfloating):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed indentation."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_encode)


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class ArtifactStore:
    """Flat CSV/JSON files in one run directory plus a checksum manifest."""

    def __init__(self, root: str = Config.OUTPUT_DIR):
        self.root = Path(root)
        self.written: List[str] = []

    def _prepare(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        if name not in self.written:
            self.written.append(name)
        return self.root / name

    def write_json(self, name: str, obj: Any) -> Path:
        path = self._prepare(name)
        path.write_text(dumps(obj) + "\n", encoding="utf-8")
        return path

    def write_table(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._prepare(name)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

    def write_manifest(self, stage_tags: Optional[Dict[str, str]] = None) -> Path:
        """Checksums of every written artifact, the schema version and a timestamp."""
        entries = {name: sha256(self.root / name) for name in sorted(self.written)}
        manifest = {
            "schema_version": Config.SCHEMA_VERSION,
            "timestamp": datetime.now().isoformat(),
            "artifacts": entries,
            "stages": stage_tags or {},
        }
        path = self.root / Config.MANIFEST_NAME
        path.write_text(dumps(manifest) + "\n", encoding="utf-8")
        logger.info(f"manifest written with {len(entries)} artifacts to {self.root}")
        return path

    def read_manifest(self) -> Dict:
        path = self.root / Config.MANIFEST_NAME
        if not self.root.is_dir():
            raise ArtifactError(f"run directory not found: {self.root}")
        if not path.exists():
            raise ArtifactError(f"no manifest in {self.root}")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ArtifactError(f"manifest is not valid JSON: {e}")

    def verify(self) -> Dict[str, str]:
        """Status per artifact: 'ok', 'missing' or 'checksum mismatch'."""
        manifest = self.read_manifest()
        if manifest.get("schema_version") != Config.SCHEMA_VERSION:
            raise ArtifactError(f"unsupported schema version {manifest.get('schema_version')}")
        status = {}
        for name, digest in manifest["artifacts"].items():
            path = self.root / name
            if not path.exists():
                status[name] = "missing"
            elif sha256(path) != digest:
                status[name] = "checksum mismatch"
                logger.warning(f"{name}: checksum mismatch")
            else:
                status[name] = "ok"
        return status

    def load_json(self, name: str) -> Any:
        path = self.root / name
        if not path.exists():
            raise ArtifactError(f"missing artifact {name}")
        return json.loads(path.read_text(encoding="utf-8"))

    def load_table(self, name: str) -> pd.DataFrame:
        path = self.root / name
        if not path.exists():
            raise ArtifactError(f"missing artifact {name}")
        return pd.read_csv(path)
