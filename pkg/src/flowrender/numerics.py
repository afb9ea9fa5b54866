"""Dense linear algebra, seeded sampling and small signal utilities.

Matrices are plain 2-D ``float64`` numpy arrays. The text format used for
every matrix file in the package is::

    rows cols
    v00,v01,...
    ...

Floats are written with ``repr`` so a save/load cycle is bit exact.
"""

from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import FormatError, ShapeError


def as_matrix(x, name="matrix"):
    m = np.asarray(x, dtype=np.float64)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    return m


def check_finite(m, name="matrix"):
    if not np.all(np.isfinite(m)):
        raise FloatingPointError(f"{name} contains non-finite entries")
    return m


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


class Rng:
    """Seeded random stream.

    Uniforms come from numpy's PCG64 bit generator. Normals are produced by
    the Box-Muller transform on pairs of those uniforms, ``u1`` mapped into
    (0, 1] so the logarithm stays finite::

        z0 = sqrt(-2 ln u1) cos(2 pi u2)
        z1 = sqrt(-2 ln u1) sin(2 pi u2)

    Both outputs of each pair are used, in order z0 then z1. An instance is
    single-owner mutable state; do not share it between threads.
    """

    def __init__(self, seed=0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size=None, low=0.0, high=1.0):
        u = self._gen.random(size)
        return low + (high - low) * u

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)

    def normal(self, size):
        n = int(np.prod(size))
        pairs = (n + 1) // 2
        u = self._gen.random((pairs, 2))
        radius = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.empty((pairs, 2))
        z[:, 0] = radius * np.cos(angle)
        z[:, 1] = radius * np.sin(angle)
        return z.ravel()[:n].reshape(size)


def sample_standard_normal(rng, rows, cols):
    if rows < 1 or cols < 1:
        raise ShapeError(f"cannot sample a {rows}x{cols} matrix")
    return rng.normal((rows, cols))


@lru_cache(maxsize=32)
def dct_basis(n, keep):
    """Orthonormal DCT-II basis, shape (keep, n); row k is the k-th cosine."""
    k = np.arange(keep)[:, None]
    i = np.arange(n)[None, :]
    basis = np.cos(np.pi * k * (2 * i + 1) / (2 * n)) * np.sqrt(2.0 / n)
    basis[0] /= np.sqrt(2.0)
    basis.setflags(write=False)
    return basis


def dct2(frame, keep):
    """First ``keep`` orthonormal DCT-II coefficients of ``frame``.

    Also accepts a (T, D) matrix, transforming each row.
    """
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.shape[-1]
    if not 1 <= keep <= n:
        raise ShapeError(f"keep={keep} outside [1, {n}]")
    return frame @ dct_basis(n, keep).T


def lerp_rows(m, target_rows):
    """Linearly resample rows of ``m`` onto ``target_rows`` uniform positions.

    The first and last rows are reproduced exactly.
    """
    m = as_matrix(m)
    rows = m.shape[0]
    if rows < 1 or target_rows < 1:
        raise ShapeError(f"cannot resample {rows} rows to {target_rows}")
    if target_rows == rows:
        return m.copy()
    if target_rows == 1 or rows == 1:
        return np.repeat(m[:1], target_rows, axis=0)
    # integer product first keeps the final position exactly rows - 1
    pos = np.arange(target_rows) * (rows - 1) / (target_rows - 1)
    lo = np.minimum(np.floor(pos).astype(np.int64), rows - 1)
    hi = np.minimum(lo + 1, rows - 1)
    frac = (pos - lo)[:, None]
    return (1.0 - frac) * m[lo] + frac * m[hi]


def format_matrix(m):
    m = as_matrix(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines.extend(",".join(repr(float(v)) for v in row) for row in m)
    return "\n".join(lines) + "\n"


def parse_matrix(text, source="<text>"):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{source}: empty matrix file")
    try:
        rows, cols = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise FormatError(f"{source}: bad header {lines[0]!r}") from exc
    if len(lines) - 1 != rows:
        raise FormatError(f"{source}: header says {rows} rows, found {len(lines) - 1}")
    out = np.empty((rows, cols))
    for r, line in enumerate(lines[1:]):
        vals = line.split(",")
        if len(vals) != cols:
            raise FormatError(f"{source}: row {r} has {len(vals)} values, expected {cols}")
        try:
            out[r] = [float(v) for v in vals]
        except ValueError as exc:
            raise FormatError(f"{source}: row {r} is not numeric") from exc
    return out


def save_matrix(path, m):
    Path(path).write_text(format_matrix(m))


def load_matrix(path):
    path = Path(path)
    return parse_matrix(path.read_text(), source=str(path))
