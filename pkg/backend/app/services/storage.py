"""Artefact storage: CHF1 field snapshots, provenance-stamped CSV tables, JSON summaries"""
import json
import re
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union
import numpy as np
import pandas as pd
from loguru import logger
from app.core.config import settings
from app.core.exceptions import SnapshotFormatError
from app.models.field import TorusField

PathLike = Union[str, Path]

_HEADER = re.compile(
    r"^CHF1 d=(?P<d>\d+) n=(?P<n>\d+) L=(?P<L>[-+0-9.eE]+|inf|nan) phi=(?P<phi>[-+0-9.eE]+|inf|nan)$"
)


def _number(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


class StorageService:
    """Writes and reads the files a run leaves behind"""

    def __init__(self):
        self.app_name = settings.APP_NAME
        self.app_version = settings.APP_VERSION

    def provenance(self, params: Dict[str, Any]) -> str:
        """'# <app> <version> key=value ...' with parameters in the given order"""
        pairs = " ".join(f"{key}={_number(value)}" for key, value in params.items())
        return f"# {self.app_name} {self.app_version} {pairs}".rstrip()

    def write_csv(self, path: PathLike, columns: Dict[str, List[float]], params: Dict[str, Any]) -> Path:
        """
        Write a table preceded by its provenance line

        Args:
            path: Target file, parent directories are created
            columns: Ordered column name -> values
            params: Full parameter set of the run

        Returns:
            The written path
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(columns)
        with path.open("w", newline="") as handle:
            handle.write(self.provenance(params) + "\n")
            frame.to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def read_csv(self, path: PathLike) -> pd.DataFrame:
        return pd.read_csv(path, comment="#", float_precision="round_trip")

    def write_json(self, path: PathLike, payload: Dict[str, Any]) -> Path:
        """JSON with the caller's key order preserved"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return path

    def write_snapshot(self, path: PathLike, u: TorusField, phi: float) -> Path:
        """CHF1: ASCII header line then n^d little-endian float64 values, row-major"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = f"CHF1 d={u.d} n={u.n} L={u.L:.17g} phi={phi:.17g}\n"
        payload = np.ascontiguousarray(u.values, dtype="<f8").tobytes(order="C")
        with path.open("wb") as handle:
            handle.write(header.encode("ascii"))
            handle.write(payload)
        return path

    def read_snapshot(self, path: PathLike) -> Tuple[TorusField, float]:
        """
        Read a CHF1 snapshot

        Returns:
            (field, phi)

        Raises:
            SnapshotFormatError: malformed header or payload length mismatch
        """
        raw = Path(path).read_bytes()
        end = raw.find(b"\n")
        if end < 0:
            raise SnapshotFormatError(f"{path}: missing CHF1 header line")
        try:
            header = raw[:end].decode("ascii")
        except UnicodeDecodeError as exc:
            raise SnapshotFormatError(f"{path}: header is not ASCII") from exc
        match = _HEADER.match(header)
        if not match:
            raise SnapshotFormatError(f"{path}: malformed header {header!r}")
        d, n = int(match["d"]), int(match["n"])
        L, phi = float(match["L"]), float(match["phi"])
        payload = raw[end + 1:]
        expected = 8 * n ** d
        if len(payload) != expected:
            raise SnapshotFormatError(
                f"{path}: payload has {len(payload)} bytes, expected {expected} for n={n}, d={d}"
            )
        values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape((n,) * d)
        try:
            field = TorusField(d=d, n=n, L=L, values=values)
        except ValueError as exc:
            raise SnapshotFormatError(f"{path}: {exc}") from exc
        return field, phi

    def write_snapshots(self, directory: PathLike, images: List[TorusField], phi: float) -> List[Path]:
        """Per-image snapshots image_0000.chf, image_0001.chf, ..."""
        directory = Path(directory)
        return [
            self.write_snapshot(directory / f"image_{index:04d}.chf", image, phi)
            for index, image in enumerate(images)
        ]


# Global storage service instance
storage_service = StorageService()
