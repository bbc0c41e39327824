"""Bounded-integer enumeration kernels.

The library core works in arbitrary-precision rationals.  The big
desk-scale sweeps (height-boxed vector enumeration, batched membership
tests, pairwise inner products) run on numpy int64 instead; every entry
is provably below an explicit bound that is asserted before the kernel
runs, so the arithmetic is exact.  No floating point anywhere.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import LatticeError
from .exactlin import Matrix

INT64_LIMIT = 2**62

_CHUNK_ROWS = 1024


def _check_bound(bound: int, what: str) -> None:
    if bound >= INT64_LIMIT:
        raise LatticeError(f"int64 bound exceeded in {what}: {bound}")


def as_int_array(m: Matrix | list) -> np.ndarray:
    rows = m.to_int_rows() if isinstance(m, Matrix) else m
    return np.array(rows, dtype=np.int64)


def scaled_inverse(basis: Matrix) -> tuple[np.ndarray, int]:
    """(den * basis^-1 as int64 array, den) for a square rational basis."""
    inv = basis.inverse()
    den = inv.common_denominator()
    num = Matrix([[x * den for x in row] for row in inv.rows])
    return as_int_array(num), den


def norms_of(coeffs: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """<c, c> for every coefficient row, exact int64."""
    hmax = int(np.abs(coeffs).max(initial=0))
    bound = hmax * hmax * int(np.abs(gram).sum())
    _check_bound(bound, "norms_of")
    return np.einsum("ij,jk,ik->i", coeffs, gram, coeffs)


def _lex_grid(rank: int, height: int) -> np.ndarray:
    """All coefficient tuples in [-height, height]^rank, lexicographic."""
    side = np.arange(-height, height + 1, dtype=np.int64)
    grids = np.meshgrid(*([side] * rank), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, rank)


def norm_box(gram_rows: list[list[int]], norm: int, height: int, primitive_only: bool) -> np.ndarray:
    """Coefficient vectors c with |c_i| <= height and c G c^T = norm.

    Rows come back in lexicographic order of the coefficient tuples.
    """
    gram = np.array(gram_rows, dtype=np.int64)
    rank = gram.shape[0]
    if height == 0:
        if norm == 0 and not primitive_only:
            return np.zeros((1, rank), dtype=np.int64)
        return np.zeros((0, rank), dtype=np.int64)
    side = 2 * height + 1
    bound = height * height * int(np.abs(gram).sum())
    _check_bound(bound, "norm_box")
    if side**rank <= 2_000_000:
        coeffs = _lex_grid(rank, height)
        keep = np.einsum("ij,jk,ik->i", coeffs, gram, coeffs) == norm
        out = coeffs[keep]
    else:
        out = _norm_box_split(gram, rank, norm, height)
    if primitive_only:
        out = out[np.gcd.reduce(np.abs(out), axis=1) == 1]
    return out


def _norm_box_split(gram: np.ndarray, rank: int, norm: int, height: int) -> np.ndarray:
    r1 = rank // 2
    a = _lex_grid(r1, height)
    b = _lex_grid(rank - r1, height)
    g11, g12, g22 = gram[:r1, :r1], gram[:r1, r1:], gram[r1:, r1:]
    qa = np.einsum("ij,jk,ik->i", a, g11, a)
    qb = np.einsum("ij,jk,ik->i", b, g22, b)
    cross = a @ g12
    pieces = []
    for start in range(0, a.shape[0], _CHUNK_ROWS):
        stop = min(start + _CHUNK_ROWS, a.shape[0])
        total = qa[start:stop, None] + 2 * (cross[start:stop] @ b.T) + qb[None, :]
        ai, bi = np.nonzero(total == norm)
        if ai.size:
            pieces.append(np.hstack([a[start + ai], b[bi]]))
    if not pieces:
        return np.zeros((0, rank), dtype=np.int64)
    return np.vstack(pieces)


def membership(vectors: np.ndarray, inv_num: np.ndarray, den: int) -> tuple[np.ndarray, np.ndarray]:
    """For integer ambient rows, test membership in the lattice with
    den*basis^-1 = inv_num.  Returns (mask, coords) where coords are the
    basis coordinates of the member rows."""
    vmax = int(np.abs(vectors).max(initial=0))
    bound = vmax * int(np.abs(inv_num).sum(axis=0).max(initial=0)) * inv_num.shape[0]
    _check_bound(bound, "membership")
    num = vectors @ inv_num
    mask = (num % den == 0).all(axis=1)
    coords = num[mask] // den
    return mask, coords


def primitive_mask(coords: np.ndarray) -> np.ndarray:
    return np.gcd.reduce(np.abs(coords), axis=1) == 1


def pair_inner_products(x: np.ndarray, gram: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Full matrix of <x_i, y_j>, chunk-safe exact int64."""
    vmax = int(max(np.abs(x).max(initial=0), np.abs(y).max(initial=0)))
    bound = vmax * vmax * int(np.abs(gram).sum())
    _check_bound(bound, "pair_inner_products")
    return (x @ gram) @ y.T


def ambient_scaled(coeffs: np.ndarray, basis: Matrix) -> tuple[np.ndarray, int]:
    """(den * coeffs @ basis as int64, den): exact ambient points."""
    den = basis.common_denominator()
    num = as_int_array(Matrix([[x * den for x in row] for row in basis.rows]))
    vmax = int(np.abs(coeffs).max(initial=0))
    bound = vmax * int(np.abs(num).sum(axis=0).max(initial=0)) * num.shape[0]
    _check_bound(bound, "ambient_scaled")
    return coeffs @ num, den


def gcd_rows(arr: np.ndarray) -> np.ndarray:
    return np.gcd.reduce(np.abs(arr), axis=1)
