"""
CSV/JSON artifact writers and dataset files.

Numbers are written with 17 significant digits so reruns are byte-identical
and every value round-trips. Any filesystem or parse failure surfaces as
ArtifactIOError.
"""
import csv
import hashlib
import json
import logging
import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ArtifactIOError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


@contextmanager
def _io(path, action: str):
    try:
        yield
    except (OSError, ValueError, csv.Error) as exc:
        logger.error(f"Failed to {action} {path}: {exc}")
        raise ArtifactIOError(f"Failed to {action} {path}: {exc}") from exc


def ensure_dir(path) -> Path:
    path = Path(path)
    with _io(path, 'create directory'):
        path.mkdir(parents=True, exist_ok=True)
    return path


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if value is None:
        return ''
    return value


def write_matrix(path, header: Sequence[str], matrix) -> Path:
    path = Path(path)
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    with _io(path, 'write'):
        ensure_dir(path.parent)
        np.savetxt(path, data, fmt=FLOAT_FORMAT, delimiter=',', header=','.join(header), comments='')
    return path


def write_records(path, records: Iterable[dict], fieldnames: Optional[List[str]] = None) -> Path:
    path = Path(path)
    records = list(records)
    if fieldnames is None:
        fieldnames = list(records[0].keys()) if records else []
    with _io(path, 'write'):
        ensure_dir(path.parent)
        with open(path, 'w', newline='') as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator='\n')
            writer.writeheader()
            for rec in records:
                writer.writerow({k: _cell(rec.get(k)) for k in fieldnames})
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    with _io(path, 'write'):
        ensure_dir(path.parent)
        with open(path, 'w') as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write('\n')
    return path


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def read_json(path) -> dict:
    with _io(path, 'read'):
        with open(path) as fh:
            return json.load(fh)


def read_records(path) -> List[dict]:
    """Rows of a header-first CSV as dicts of strings, the inverse of ``write_records``."""
    with _io(path, 'read'):
        with open(path, newline='') as fh:
            return list(csv.DictReader(fh))


def read_matrix(path) -> Tuple[List[str], np.ndarray]:
    path = Path(path)
    with _io(path, 'read'):
        with open(path) as fh:
            header = fh.readline().strip().split(',')
        data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    return header, data


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with _io(path, 'hash'):
        with open(path, 'rb') as fh:
            for block in iter(lambda: fh.read(1 << 20), b''):
                digest.update(block)
    return digest.hexdigest()


def describe_artifacts(paths: Iterable[Path]) -> List[dict]:
    out = []
    for path in sorted(Path(p) for p in paths):
        with _io(path, 'stat'):
            size = path.stat().st_size
        out.append({'name': path.name, 'bytes': size, 'sha256': file_digest(path)})
    return out


# Datasets

def dump_mixture_data(path, y) -> Path:
    return write_matrix(path, ['y'], np.asarray(y).ravel())


def load_mixture_data(path) -> np.ndarray:
    header, data = read_matrix(path)
    if header != ['y'] or data.shape[1] != 1:
        raise ArtifactIOError(f"{path} is not a mixture dataset (expected a single 'y' column)")
    return data[:, 0]


def dump_ssm_data(path, y, x=None) -> Path:
    """Observations y_1..y_M and, when known, the latent path x_1..x_K; one time step per row."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    header = [f"y{i + 1}" for i in range(y.shape[1])]
    columns = [y]
    if x is not None:
        x = np.asarray(x, dtype=np.float64).reshape(y.shape[0], -1)
        header += [f"x{i + 1}" for i in range(x.shape[1])]
        columns.append(x)
    return write_matrix(path, header, np.hstack(columns))


def load_ssm_data(path) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    header, data = read_matrix(path)
    y_cols = [i for i, name in enumerate(header) if name.startswith('y')]
    x_cols = [i for i, name in enumerate(header) if name.startswith('x')]
    if not y_cols:
        raise ArtifactIOError(f"{path} has no observation columns")
    return data[:, y_cols], (data[:, x_cols] if x_cols else None)


def export_copy(source, destination) -> Path:
    """Copy an artifact to a user-chosen path (``--out`` / ``--trace``)."""
    destination = Path(destination)
    with _io(destination, 'export'):
        ensure_dir(destination.parent)
        shutil.copyfile(source, destination)
    return destination
