import csv
import hashlib
import io
import json
import os
import sys
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Final, List, Optional, Sequence, Union

import numpy as np

from floq.polycore import GaussianRational, format_rational


__all__ = ["AtomicOutput", "digest", "exact_text", "jsonable", "to_json", "to_csv"]


def exact_text(value: Union[int, Fraction, GaussianRational]) -> str:
    """``"p/q"`` for rationals, ``"p/q+r/s*i"`` for Gaussian rationals with a nonzero imaginary part."""
    if isinstance(value, GaussianRational):
        return format_rational(value.re) if value.im == 0 else str(value)
    return format_rational(value)


def jsonable(value: Any) -> Any:
    """
    Convert ``value`` recursively into plain JSON types.

    Complex numbers become ``[re, im]`` pairs and exact numbers ``"p/q"`` strings.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (GaussianRational, Fraction)):
        return exact_text(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    return value


def to_json(data: Any) -> str:
    return json.dumps(jsonable(data), indent=2, sort_keys=True) + "\n"


def to_csv(rows: Sequence[Dict[str, Any]], fields: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k) for k in fields})
    return buffer.getvalue()


def digest(data: Union[str, bytes], algorithm: str = "sha256") -> str:
    """
    Hex digest of an artifact.

    :param data: Artifact content; text is encoded as UTF-8.
    :type data: str | bytes
    :param algorithm: Any ``hashlib`` algorithm name.
    :type algorithm: str
    :return: The hexadecimal digest.
    :rtype: str
    """
    if isinstance(data, str):
        data = data.encode()
    return hashlib.new(algorithm, data).hexdigest()


class AtomicOutput:
    """
    Writes one artifact so that readers never see a partial file.

    Content is written to an exclusively created temporary file next to the
    target and moved over it when the context exits cleanly; on error the
    temporary file is removed and the target is left untouched. Without a
    path the content goes to stdout.

    :ivar path: Target file, or ``None`` for stdout.
    :type path: Optional[Path]
    :ivar fd: Descriptor of the temporary file while the context is open.
    :type fd: int or None
    """
    path: Final[Optional[Path]]
    fd: Optional[int]

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path else None
        self.fd = None
        self.written: List[str] = []

    @property
    def tmp_path(self) -> Path:
        return self.path.with_name(f".{self.path.name}.{os.getpid()}.tmp")

    def acquire(self):
        """
        Create the temporary file.

        :raises FileExistsError: if a temporary file of this process already exists.
        """
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.fd = os.open(self.tmp_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)

    def write(self, text: str) -> None:
        self.written.append(text)
        if self.path is None:
            sys.stdout.write(text)
        else:
            data = memoryview(text.encode())
            while data:
                data = data[os.write(self.fd, data):]

    def release(self, commit: bool = True):
        if self.fd is None:
            return
        os.close(self.fd)
        self.fd = None
        if commit:
            os.replace(self.tmp_path, self.path)
        else:
            self.tmp_path.unlink(missing_ok=True)

    @property
    def content(self) -> str:
        return "".join(self.written)

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, exc_type, exc_value, tb):
        self.release(commit=exc_type is None)
