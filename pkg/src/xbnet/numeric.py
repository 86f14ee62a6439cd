"""Checked dense-matrix helpers and seeded random streams.

Matrices are plain 2-D ``float64`` numpy arrays (C order). The helpers below add
shape validation and refuse to hand back non-finite values.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import NonFiniteError, ShapeError, ValidationError

Matrix = np.ndarray


def as_matrix(a) -> Matrix:
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def check_finite(m: Matrix, what: str = "result") -> Matrix:
    if not np.all(np.isfinite(m)):
        raise NonFiniteError(f"{what} contains non-finite values")
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a @ b
    return check_finite(out, "matmul")


def add_bias_rows(z: Matrix, b: Matrix) -> Matrix:
    """Add column vector ``b`` (rows x 1) to every column of ``z``."""
    z, b = np.asarray(z, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[1] != 1 or b.shape[0] != z.shape[0]:
        raise ShapeError(f"bias of shape {b.shape} does not fit {z.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = z + b
    return check_finite(out, "add_bias_rows")


_OPS = {"add": np.add, "sub": np.subtract, "mul": np.multiply}


def elementwise(a: Matrix, b: Matrix, op: str) -> Matrix:
    if op not in _OPS:
        raise ValidationError(f"unknown elementwise op {op!r}")
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"elementwise {op} on mismatched shapes {a.shape} and {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = _OPS[op](a, b)
    return check_finite(out, op)


def make_rng(seed: int | Sequence[int]) -> np.random.Generator:
    """PCG64 stream. A sequence seed such as ``(seed, epoch)`` gives an independent child stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def rng_uniform(rng: np.random.Generator, lo: float, hi: float, shape) -> Matrix:
    if not lo < hi:
        raise ValidationError(f"uniform range needs lo < hi, got [{lo}, {hi})")
    return rng.uniform(lo, hi, size=shape)
