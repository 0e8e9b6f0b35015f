"""
CSV and JSON writers for run artifacts.

Every file starts with the engine version and the serialized run
configuration so that a result can be traced back to the run that made it.
Floats are written in their shortest round-trip form; re-running a configuration
reproduces the numeric columns byte for byte.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .config import ConfigError, ensure_directory_exists

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
HEADER_PREFIX = '# '


def _version() -> str:
    from .. import __version__
    return __version__


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def header(run_config: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    return {'eddycorner_version': _version(), 'run_config': dict(run_config or {})}


def write_json(path: PathLike, payload: Any, run_config: Optional[Mapping[str, Any]] = None) -> Path:
    """Write ``{eddycorner_version, run_config, data}`` to ``path``."""
    path = Path(path)
    ensure_directory_exists(path.parent)
    document = header(run_config)
    document['data'] = payload
    with path.open('w', encoding='utf-8') as fh:
        json.dump(document, fh, indent=2)
        fh.write('\n')
    logger.info('wrote %s', path)
    return path


def read_json(path: PathLike) -> Tuple[Any, Dict[str, Any]]:
    """
    Return ``(data, header)`` of a file written by :func:`write_json`.

    Raises:
        ConfigError: If the file is missing or malformed
    """
    path = Path(path)
    try:
        with path.open(encoding='utf-8') as fh:
            document = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f'Cannot read {path}: {e}') from e
    if not isinstance(document, dict) or 'data' not in document:
        raise ConfigError(f'{path} is not an eddycorner JSON artifact')
    data = document.pop('data')
    return data, document


def write_csv(path: PathLike, rows: Iterable[Mapping[str, Any]], columns: Sequence[str],
              run_config: Optional[Mapping[str, Any]] = None) -> Path:
    """Write ``rows`` under a commented header holding the version and the run configuration."""
    path = Path(path)
    ensure_directory_exists(path.parent)
    meta = header(run_config)
    with path.open('w', encoding='utf-8', newline='') as fh:
        fh.write(f"{HEADER_PREFIX}eddycorner {meta['eddycorner_version']}\n")
        fh.write(f"{HEADER_PREFIX}run_config: {json.dumps(meta['run_config'], sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([_format(row[c]) for c in columns])
            count += 1
    logger.info('wrote %d rows to %s', count, path)
    return path


def read_csv(path: PathLike) -> Tuple[List[Dict[str, float]], Dict[str, Any]]:
    """
    Return ``(rows, run_config)`` of a file written by :func:`write_csv`; values are floats.

    Raises:
        ConfigError: If the file is missing or malformed
    """
    path = Path(path)
    run_config: Dict[str, Any] = {}
    try:
        with path.open(encoding='utf-8', newline='') as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ConfigError(f'Cannot read {path}: {e}') from e
    body = []
    for line in lines:
        if line.startswith(HEADER_PREFIX + 'run_config: '):
            run_config = json.loads(line[len(HEADER_PREFIX + 'run_config: '):])
        elif not line.startswith(HEADER_PREFIX):
            body.append(line)
    reader = csv.DictReader(body)
    try:
        rows = [{key: float(value) for key, value in row.items()} for row in reader]
    except (TypeError, ValueError) as e:
        raise ConfigError(f'{path} has non-numeric cells: {e}') from e
    return rows, run_config
