"""Small shared helpers: seed derivation, data file access, report output."""

import hashlib
from importlib import resources
from typing import Iterable, Mapping


def derive_seed(*parts) -> int:
    """Derive a stable 63-bit seed from arbitrary parts.

    All randomness in the toolkit flows from one explicit top-level seed;
    subsystems get their own streams via ``derive_seed(seed, name, index)``.
    Uses SHA-256 rather than ``hash()``, which is salted per process.
    """
    h = hashlib.sha256('\x1f'.join(repr(p) for p in parts).encode('utf-8'))
    return int.from_bytes(h.digest()[:8], 'big') >> 1


def data_path(name: str):
    """Path to a data file shipped inside the package."""
    return resources.files('noisymt').joinpath('data', name)


def read_data_text(name: str) -> str:
    return data_path(name).read_text(encoding='utf-8')


def format_report(values: Mapping[str, object]) -> str:
    """Render a report as machine-readable ``key=value`` lines."""
    return ''.join(f'{k}={v}\n' for k, v in values.items())


def write_report(path, values: Mapping[str, object]) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_report(values))


def read_lines(path) -> Iterable[str]:
    """Yield lines of a UTF-8 text file without trailing newlines."""
    with open(path, encoding='utf-8') as f:
        for line in f:
            yield line.rstrip('\n')
