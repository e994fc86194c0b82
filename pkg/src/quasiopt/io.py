"""File formats: problem containers (CSV and RPTP binary) and NDJSON records.

Problem CSV layout::

    m,n,has_f_star,has_u_star
    <m>,<n>,<0|1>,<0|1>
    m rows of A (n values each, row-major)
    one row f (m values)
    one row f_star (m values)     -- only if has_f_star
    one row u_star (n values)     -- only if has_u_star

RPTP binary layout (little-endian)::

    b"RPTP" | version u8 (=1) | flags u8 (bit0 f_star, bit1 u_star) |
    m u32 | n u32 | A (m*n f64, row-major) | f (m f64) | [f_star (m f64)] | [u_star (n f64)]
"""

import contextlib
import json
import math
import os
import struct
import tempfile

import numpy as np

from .spectral import Problem

MAGIC = b"RPTP"
VERSION = 1
_HEADER = struct.Struct("<4sBBII")


def fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, "#.17g")


@contextlib.contextmanager
def atomic_open(path, mode="w"):
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_problem_csv(problem: Problem, path):
    m, n = problem.shape
    hf = problem.f_star is not None
    hu = problem.u_star is not None

    def row(v):
        return ",".join(fmt_float(x) for x in v) + "\n"

    with atomic_open(path) as fh:
        fh.write("m,n,has_f_star,has_u_star\n")
        fh.write(f"{m},{n},{int(hf)},{int(hu)}\n")
        for r in problem.A:
            fh.write(row(r))
        fh.write(row(problem.f))
        if hf:
            fh.write(row(problem.f_star))
        if hu:
            fh.write(row(problem.u_star))


def read_problem_csv(path, name="") -> Problem:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].split(",")[:2] != ["m", "n"]:
        raise ValueError(f"{path}: missing 'm,n,...' header")
    m, n, hf, hu = (int(x) for x in lines[1].split(","))
    rows = [np.array([float(x) for x in ln.split(",")]) for ln in lines[2:]]
    expected = m + 1 + hf + hu
    if len(rows) != expected:
        raise ValueError(f"{path}: expected {expected} data rows, found {len(rows)}")
    A = np.vstack(rows[:m])
    if A.shape != (m, n):
        raise ValueError(f"{path}: matrix rows do not have {n} columns")
    f = rows[m]
    f_star = rows[m + 1] if hf else None
    u_star = rows[m + 1 + hf] if hu else None
    return Problem(A, f, f_star, u_star, name=name)


def write_problem_rptp(problem: Problem, path):
    m, n = problem.shape
    flags = (problem.f_star is not None) | ((problem.u_star is not None) << 1)
    parts = [_HEADER.pack(MAGIC, VERSION, flags, m, n), problem.A.astype("<f8").tobytes(),
             problem.f.astype("<f8").tobytes()]
    if problem.f_star is not None:
        parts.append(problem.f_star.astype("<f8").tobytes())
    if problem.u_star is not None:
        parts.append(problem.u_star.astype("<f8").tobytes())
    with atomic_open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_problem_rptp(path, name="") -> Problem:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, flags, m, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    sizes = [m * n, m] + ([m] if flags & 1 else []) + ([n] if flags & 2 else [])
    if len(data) != _HEADER.size + 8 * sum(sizes):
        raise ValueError(f"{path}: payload size does not match header")
    arrays, off = [], _HEADER.size
    for k in sizes:
        arrays.append(np.frombuffer(data, "<f8", k, off).astype(float))
        off += 8 * k
    A = arrays[0].reshape(m, n)
    f = arrays[1]
    rest = arrays[2:]
    f_star = rest.pop(0) if flags & 1 else None
    u_star = rest.pop(0) if flags & 2 else None
    return Problem(A, f, f_star, u_star, name=name)


def read_problem(path, name=None) -> Problem:
    name = name if name is not None else os.path.splitext(os.path.basename(path))[0]
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_problem_rptp(path, name)
    return read_problem_csv(path, name)


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ",".join(f"{_json_value(str(k))}:{_json_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written with 17 significant digits."""
    return _json_value(obj)


def write_ndjson(records, path):
    with atomic_open(path) as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")


def read_ndjson(path) -> list:
    with open(path) as fh:
        return [json.loads(ln) for ln in fh if ln.strip()]
