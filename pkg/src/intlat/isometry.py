"""Ambient isometries: reflections, transvections, checks.

Vectors are rows; a matrix m acts by x -> x @ m.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import LatticeError
from .exactlin import Matrix
from .lattice import Lattice, QSpace, lattice_equal


def is_form_isometry(space: QSpace, m: Matrix) -> bool:
    """Does m preserve the ambient inner product?"""
    return m @ space.form @ m.T == space.form


def preserves_lattice(lat: Lattice, m: Matrix) -> bool:
    """Does the ambient isometry map the lattice onto itself?"""
    image = Lattice(lat.space, lat.basis @ m)
    return lattice_equal(image, lat)


def reflection(space: QSpace, r) -> Matrix:
    """Reflection x -> x - 2<x,r>/<r,r> r in the hyperplane orthogonal to r."""
    r = tuple(Fraction(x) for x in r)
    rr = space.norm(r)
    if rr == 0:
        raise LatticeError("cannot reflect in an isotropic vector")
    n = space.dim
    c = 2 * space.scale / rr
    fr = [sum(space.form[i, k] * r[k] for k in range(n)) for i in range(n)]
    return Matrix(
        [[(1 if i == j else 0) - c * fr[i] * r[j] for j in range(n)] for i in range(n)]
    )


def transvection(space: QSpace, e, a) -> Matrix:
    """Eichler transvection for an isotropic e and a vector a orthogonal to e:

        x -> x + <x,e> a - <x,a> e - (<a,a>/2) <x,e> e

    Always an isometry of the ambient space; integrality on a given
    lattice must be checked by the caller.
    """
    e = tuple(Fraction(x) for x in e)
    a = tuple(Fraction(x) for x in a)
    if space.norm(e) != 0:
        raise LatticeError("transvection needs an isotropic vector")
    if space.inner(e, a) != 0:
        raise LatticeError("transvection needs <e,a> = 0")
    n = space.dim
    fe = [space.scale * sum(space.form[i, k] * e[k] for k in range(n)) for i in range(n)]
    fa = [space.scale * sum(space.form[i, k] * a[k] for k in range(n)) for i in range(n)]
    half_aa = space.norm(a) / 2
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            val = Fraction(1 if i == j else 0)
            val += fe[i] * a[j] - fa[i] * e[j] - half_aa * fe[i] * e[j]
            row.append(val)
        rows.append(row)
    return Matrix(rows)


def integral_reflection_generators(lat: Lattice, height: int = 1, norms=(1, -1, 2, -2, 4, -4)) -> list[Matrix]:
    """Reflections in short vectors of the lattice whose matrix is integral
    on the lattice basis, plus -identity.  A generic generator harvest for
    the orthogonal group; completeness is certified by the caller (order
    comparison), never assumed.
    """
    space = lat.space
    found: list[Matrix] = [-Matrix.identity(space.dim)]
    seen = set()
    for norm in norms:
        for v in lat.enumerate_vectors(norm, height, primitive_only=True):
            key = v if v > tuple(-x for x in v) else tuple(-x for x in v)
            if key in seen:
                continue
            seen.add(key)
            m = reflection(space, v)
            if preserves_lattice(lat, m):
                found.append(m)
    return found


def integral_transvection_generators(lat: Lattice, height: int = 1, max_isotropic: int = 6) -> list[Matrix]:
    """Eichler transvections t(e, a) with e isotropic and a ⊥ e, both short
    lattice vectors, kept only when integral on the lattice."""
    space = lat.space
    isotropic = [v for v in lat.enumerate_vectors(0, height, primitive_only=True)][:2 * max_isotropic]
    out = []
    for e in isotropic:
        basis_rows = [lat.basis.row(i) for i in range(lat.rank)]
        for a in basis_rows:
            ip = space.inner(e, a)
            if ip != 0:
                continue
            m = transvection(space, e, a)
            if preserves_lattice(lat, m):
                out.append(m)
    return out
