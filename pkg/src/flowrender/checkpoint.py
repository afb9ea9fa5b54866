"""Plain-text checkpoint persistence.

Layout::

    OTCFM-CKPT v1
    <name> <rows> <cols>
    <rows lines of comma-separated floats>
    ...

Vectors are stored as one row; convolution kernels (k, in, out) as
(k * in, out). Floats use ``repr`` so save/load/save is byte stable.
"""

import re
from pathlib import Path

import numpy as np

from .errors import FormatError
from .model import model_from_parameters

HEADER = "OTCFM-CKPT v1"

_KNOWN = re.compile(
    r"^(field\.[wb]\d+|guide\.(spk|emo)\.[wb]|units\.table|"
    r"dur\.(table|conv1\.w|conv1\.b|conv2\.w|conv2\.b|cls\.w|cls\.b))$")
_VECTORS = re.compile(r"(\.b\d*$)|(^dur\.cls\.w$)")
_REQUIRED = ("guide.spk.w", "guide.spk.b", "guide.emo.w", "guide.emo.b", "units.table",
             "dur.table", "dur.conv1.w", "dur.conv1.b", "dur.conv2.w", "dur.conv2.b",
             "dur.cls.w", "dur.cls.b", "field.w0", "field.b0")


def _as_block(name, arr):
    if arr.ndim == 3:
        return arr.reshape(-1, arr.shape[2])
    return np.atleast_2d(arr)


def format_checkpoint(model):
    out = [HEADER]
    for name, arr in model.parameters().items():
        block = _as_block(name, arr)
        out.append(f"{name} {block.shape[0]} {block.shape[1]}")
        out.extend(",".join(repr(float(v)) for v in row) for row in block)
    return "\n".join(out) + "\n"


def parse_checkpoint(text, source="<checkpoint>"):
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise FormatError(f"{source}: missing {HEADER!r} header")
    blocks = {}
    pos = 1
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        head = lines[pos].split()
        if len(head) != 3:
            raise FormatError(f"{source}: bad block header {lines[pos]!r}")
        name = head[0]
        if not _KNOWN.match(name):
            raise FormatError(f"{source}: unknown block {name!r}")
        if name in blocks:
            raise FormatError(f"{source}: duplicate block {name!r}")
        try:
            rows, cols = int(head[1]), int(head[2])
            body = lines[pos + 1:pos + 1 + rows]
            if len(body) != rows:
                raise ValueError("truncated block")
            arr = np.array([[float(v) for v in row.split(",")] for row in body], dtype=np.float64)
            arr = arr.reshape(rows, cols)
        except ValueError as exc:
            raise FormatError(f"{source}: block {name!r} is malformed: {exc}") from exc
        blocks[name] = arr
        pos += 1 + rows
    missing = [n for n in _REQUIRED if n not in blocks]
    if missing:
        raise FormatError(f"{source}: missing blocks {missing}")
    for name in list(blocks):
        if _VECTORS.search(name):
            blocks[name] = blocks[name].ravel()
    for conv, in_dim in (("dur.conv1.w", blocks["dur.table"].shape[1]),
                         ("dur.conv2.w", blocks["dur.conv1.w"].shape[1])):
        rows, cols = blocks[conv].shape
        if rows % in_dim:
            raise FormatError(f"{source}: {conv} rows {rows} not a multiple of {in_dim}")
        blocks[conv] = blocks[conv].reshape(rows // in_dim, in_dim, cols)
    try:
        return model_from_parameters(blocks)
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{source}: inconsistent blocks: {exc}") from exc


def save_checkpoint(path, model):
    Path(path).write_text(format_checkpoint(model))


def load_checkpoint(path):
    path = Path(path)
    return parse_checkpoint(path.read_text(), str(path))
