"""Integral quadratic lattices in an explicit ambient quadratic space.

A lattice is a full-row-rank rational basis inside a ``QSpace``: an
ambient rational quadratic form together with a positive rational
``scale`` multiplying it.  Carrying the ambient around makes sublattice,
overlattice, equality and complement exact set-theoretic operations;
isometry-class questions are answered only through invariants (parity,
signature, determinant, discriminant form), which is all the standard
constructions here require.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from .errors import AmbientMismatchError, LatticeError
from .exactlin import Matrix, block_diagonal, hnf, signature

Vector = tuple[Fraction, ...]


def _as_vector(v: Iterable) -> Vector:
    return tuple(Fraction(x) for x in v)


def _build_e8_gram() -> Matrix:
    # Standard presentation: D8 (integer vectors with even coordinate sum)
    # extended by the all-halves glue vector; basis pinned by HNF.
    gens = [[0] * 8 for _ in range(8)]
    for i in range(7):
        gens[i][i], gens[i][i + 1] = 2, -2  # doubled e_i - e_{i+1}
    gens[7][6], gens[7][7] = 2, 2  # doubled e_7 + e_8
    gens.append([1] * 8)  # doubled glue vector (1/2, ..., 1/2)
    h, _ = hnf(Matrix(gens))
    basis = Matrix([[x / 2 for x in h.row(i)] for i in range(8)])
    return basis @ basis.T


E8_GRAM = _build_e8_gram()

U_GRAM = Matrix([[0, 1], [1, 0]])


@dataclass(frozen=True)
class QSpace:
    """Ambient rational quadratic space: symmetric nondegenerate form times scale."""

    form: Matrix
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if not self.form.is_symmetric():
            raise LatticeError("ambient form must be symmetric")
        if self.form.det() == 0:
            raise LatticeError("ambient form must be nondegenerate")
        object.__setattr__(self, "scale", Fraction(self.scale))
        if self.scale <= 0:
            raise LatticeError("ambient scale must be positive")

    @property
    def dim(self) -> int:
        return self.form.nrows

    def inner(self, x: Iterable, y: Iterable) -> Fraction:
        x, y = _as_vector(x), _as_vector(y)
        cols = self.form.rows
        return self.scale * sum(
            xi * sum(f * yj for f, yj in zip(row, y)) for xi, row in zip(x, cols)
        )

    def norm(self, x: Iterable) -> Fraction:
        return self.inner(x, x)

    def rescaled(self, factor) -> "QSpace":
        """Same coordinate space, form multiplied by a nonzero rational."""
        factor = Fraction(factor)
        if factor == 0:
            raise LatticeError("rescale factor must be nonzero")
        if factor > 0:
            return QSpace(self.form, self.scale * factor)
        return QSpace(-self.form, self.scale * (-factor))


@dataclass(frozen=True)
class StandardForm:
    """Recognized isometry class of a unimodular lattice."""

    kind: str  # "I" | "II" | "E8" | "unrecognized"
    p: int = 0
    m: int = 0
    sign: int = 0
    copies: int = 0

    def __str__(self) -> str:
        if self.kind == "I":
            return f"I({self.p},{self.m})"
        if self.kind == "II":
            return f"II({self.p},{self.m})"
        if self.kind == "E8":
            return f"E8({self.sign})^{self.copies}"
        return "unrecognized"


class Lattice:
    """Free module given by basis rows (ambient coordinates) in a QSpace."""

    def __init__(self, space: QSpace, basis: Matrix):
        if basis.ncols != space.dim:
            raise LatticeError("basis width must equal ambient dimension")
        if basis.rank() != basis.nrows:
            raise LatticeError("basis rows must be independent")
        self.space = space
        self.basis = basis

    @classmethod
    def standard(cls, space: QSpace) -> "Lattice":
        return cls(space, Matrix.identity(space.dim))

    @classmethod
    def from_generators(cls, space: QSpace, gens: Matrix) -> "Lattice":
        """Span of possibly redundant generator rows, canonical HNF basis."""
        d = gens.common_denominator()
        h, _ = hnf(d * gens)
        rows = [row for row in h.rows if any(row)]
        if not rows:
            raise LatticeError("generators span the zero lattice")
        return cls(space, Matrix(rows) * Fraction(1, d))

    @property
    def rank(self) -> int:
        return self.basis.nrows

    @property
    def ambient_dim(self) -> int:
        return self.space.dim

    @cached_property
    def gram(self) -> Matrix:
        return self.space.scale * (self.basis @ self.space.form @ self.basis.T)

    @cached_property
    def det(self) -> Fraction:
        return self.gram.det()

    def is_integral(self) -> bool:
        return self.gram.is_integral()

    def is_even(self) -> bool:
        # For an integral lattice the Gram diagonal decides parity.
        if not self.is_integral():
            raise LatticeError("parity is defined for integral lattices")
        return all(self.gram[i, i] % 2 == 0 for i in range(self.rank))

    def is_unimodular(self) -> bool:
        return self.is_integral() and abs(self.det) == 1

    @cached_property
    def signature(self) -> tuple[int, int, int]:
        return signature(self.gram)

    @cached_property
    def canonical_basis(self) -> Matrix:
        d = self.basis.common_denominator()
        h, _ = hnf(d * self.basis)
        rows = [row for row in h.rows if any(row)]
        return Matrix(rows) * Fraction(1, d)

    @cached_property
    def _coord_solver(self) -> Matrix:
        # Right-inverse of the basis w.r.t. the standard dot product;
        # independent of the ambient form, valid for any full-row-rank basis.
        b = self.basis
        return b.T @ (b @ b.T).inverse()

    def coordinates(self, v: Iterable) -> Vector | None:
        """Basis coordinates of an ambient vector, or None if outside the span."""
        v = _as_vector(v)
        if len(v) != self.ambient_dim:
            raise AmbientMismatchError("vector has wrong ambient dimension")
        coords = tuple(
            sum(x * self._coord_solver[i, j] for i, x in enumerate(v))
            for j in range(self.rank)
        )
        back = tuple(
            sum(c * self.basis[i, j] for i, c in enumerate(coords))
            for j in range(self.ambient_dim)
        )
        return coords if back == v else None

    def contains(self, v: Iterable) -> bool:
        coords = self.coordinates(v)
        return coords is not None and all(c.denominator == 1 for c in coords)

    def vector(self, coords: Iterable) -> Vector:
        coords = _as_vector(coords)
        return tuple(
            sum(c * self.basis[i, j] for i, c in enumerate(coords))
            for j in range(self.ambient_dim)
        )

    def same_space(self, other: "Lattice") -> bool:
        return self.space == other.space

    def __repr__(self) -> str:
        return f"Lattice(rank={self.rank}, ambient_dim={self.ambient_dim})"

    # -- derived lattices ---------------------------------------------------

    def dual(self) -> "Lattice":
        """Dual lattice in the same ambient space (gram becomes gram^-1)."""
        return Lattice(self.space, self.gram.inverse() @ self.basis)

    def even_sublattice(self) -> "Lattice":
        """Kernel of x -> <x,x> mod 2; index 1 (even) or 2 (odd)."""
        if not self.is_integral():
            raise LatticeError("even sublattice requires an integral lattice")
        if self.is_even():
            return Lattice.from_generators(self.space, self.basis)
        n = self.rank
        parities = [int(self.gram[i, i]) % 2 for i in range(n)]
        j = parities.index(1)
        rows = []
        for i in range(n):
            if i == j:
                continue
            row = [0] * n
            row[i] = 1
            if parities[i]:
                row[j] = 1
            rows.append(row)
        row = [0] * n
        row[j] = 2
        rows.append(row)
        return Lattice.from_generators(self.space, Matrix(rows) @ self.basis)

    def orthogonal_complement(self, other) -> "Lattice":
        """Vectors of self orthogonal to every row of `other` (lattice or vector)."""
        rows = _rows_of(other, self.ambient_dim, self.space)
        pairing = self.basis @ self.space.form @ rows.T
        d = pairing.common_denominator()
        h, u = hnf(d * pairing)
        kernel = [u.row(i) for i in range(h.nrows) if not any(h.row(i))]
        if not kernel:
            raise LatticeError("orthogonal complement is the zero lattice")
        return Lattice.from_generators(self.space, Matrix(kernel) @ self.basis)

    def saturation(self, sub: "Lattice") -> "Lattice":
        """(sub tensor Q) intersected with self."""
        coords = _int_coords_in(self, sub)
        perp = _int_right_kernel(coords)
        if perp is None:  # sub already spans self over Q
            return Lattice.from_generators(self.space, self.basis)
        sat = _int_right_kernel(perp)
        if sat is None:
            raise LatticeError("saturation collapsed unexpectedly")
        return Lattice.from_generators(self.space, sat @ self.basis)

    def is_primitive(self, sub: "Lattice") -> bool:
        return lattice_equal(self.saturation(sub), sub)

    def quotient_by_isotropic(self, iso) -> "Lattice":
        """Gram of (iso^perp)/iso for a primitive isotropic sublattice.

        Returns an abstract lattice (identity basis on the quotient Gram).
        Requires self unimodular; the quotient is then unimodular too.
        """
        if not self.is_unimodular():
            raise LatticeError("quotient is implemented for unimodular lattices")
        if iso is None or (isinstance(iso, Lattice) and iso.rank == 0):
            return self
        sub = iso if isinstance(iso, Lattice) else Lattice(self.space, _rows_of(iso, self.ambient_dim, self.space))
        if any(x != 0 for row in sub.gram.rows for x in row):
            raise LatticeError("sublattice is not isotropic")
        if not self.is_primitive(sub):
            raise LatticeError("sublattice is not primitive")
        k = sub.rank
        w = self.orthogonal_complement(sub)
        t = _int_coords_in(w, sub)
        from .exactlin import snf as _snf

        d, _, v = _snf(t)
        if any(d[i, i] != 1 for i in range(k)):
            raise LatticeError("sublattice is not primitive in its complement")
        wbasis = v.inverse() @ w.basis
        quot_rows = Matrix(wbasis.rows[k:])
        gram = self.space.scale * (quot_rows @ self.space.form @ quot_rows.T)
        if gram.det() == 0:
            raise LatticeError("quotient Gram is degenerate (input was not primitive isotropic)")
        return Lattice.standard(QSpace(gram))

    # -- enumeration ---------------------------------------------------------

    def enumerate_vectors(self, norm, height: int, primitive_only: bool = False) -> list[Vector]:
        """All v = sum(c_i b_i), |c_i| <= height, <v,v> = norm.

        Deterministic lexicographic order of the coefficient tuples.
        With primitive_only, keeps gcd(c_i) = 1.
        """
        if not self.is_integral():
            raise LatticeError("enumeration requires an integral lattice")
        norm = int(norm)
        if height < 0:
            raise LatticeError("height must be nonnegative")
        from .fastenum import norm_box

        coeffs = norm_box(self.gram.to_int_rows(), norm, height, primitive_only)
        return [self.vector(c) for c in coeffs]

    def invariants(self) -> dict:
        p, m, z = self.signature
        integral = self.is_integral()
        return {
            "rank": self.rank,
            "det": self.det,
            "signature": (p, m, z),
            "parity": ("even" if self.is_even() else "odd") if integral else None,
            "integral": integral,
            "unimodular": integral and abs(self.det) == 1,
        }

    def classify_unimodular(self) -> StandardForm:
        """Standard-form tag of a unimodular lattice.

        Indefinite lattices are classified completely; definite ones only in
        the low-rank cases needed here (diagonal odd forms up to rank 8, and
        the rank-8 even definite lattice).
        """
        if not self.is_unimodular():
            raise LatticeError("classification requires a unimodular lattice")
        p, m, z = self.signature
        if z:
            raise LatticeError("degenerate lattice")
        even = self.is_even()
        if p > 0 and m > 0:
            if even:
                if (p - m) % 8:
                    raise LatticeError("even unimodular lattice with signature not 0 mod 8")
                return StandardForm("II", p=p, m=m)
            return StandardForm("I", p=p, m=m)
        if even:
            if p + m == 8:
                return StandardForm("E8", sign=1 if p else -1, copies=1)
            return StandardForm("unrecognized")
        if p + m <= 8:
            return StandardForm("I", p=p, m=m)
        return StandardForm("unrecognized")


def _rows_of(obj, ambient_dim: int, space: QSpace) -> Matrix:
    if isinstance(obj, Lattice):
        if obj.space != space:
            raise AmbientMismatchError("sublattice lives in a different ambient space")
        return obj.basis
    if isinstance(obj, Matrix):
        rows = obj
    else:
        seq = list(obj)
        if seq and not isinstance(seq[0], (list, tuple)):
            seq = [seq]
        rows = Matrix(seq)
    if rows.ncols != ambient_dim:
        raise AmbientMismatchError("vector has wrong ambient dimension")
    return rows


def _int_coords_in(outer: Lattice, inner) -> Matrix:
    """Integer coordinates of `inner`'s basis w.r.t. `outer`'s basis."""
    rows = inner.basis if isinstance(inner, Lattice) else inner
    coords = []
    for i in range(rows.nrows):
        c = outer.coordinates(rows.row(i))
        if c is None or any(x.denominator != 1 for x in c):
            raise LatticeError("not a sublattice")
        coords.append([int(x) for x in c])
    return Matrix(coords)


def _int_right_kernel(m: Matrix) -> Matrix | None:
    """Basis of {x integer row : m @ x^T = 0}, or None if trivial."""
    h, u = hnf(m.T)
    kernel = [u.row(i) for i in range(h.nrows) if not any(h.row(i))]
    return Matrix(kernel) if kernel else None


# -- constructors -------------------------------------------------------------


def hyperbolic_plane(n=1) -> Lattice:
    """U(n): rank-2 lattice with Gram [[0, n], [n, 0]]."""
    return Lattice.standard(QSpace(U_GRAM).rescaled(n))


def e8_lattice(n=1) -> Lattice:
    """E8(n): the fixed positive-definite even unimodular Gram, scaled by n."""
    return Lattice.standard(QSpace(E8_GRAM).rescaled(n))


def odd_unimodular(p: int, m: int) -> Lattice:
    """I(p,m): orthogonal basis with p norm +1 and m norm -1 vectors."""
    if p < 0 or m < 0 or p + m == 0:
        raise LatticeError("I(p,m) needs p, m >= 0 and positive rank")
    return Lattice.standard(QSpace(Matrix.diagonal([1] * p + [-1] * m)))


def even_unimodular(p: int, m: int) -> Lattice:
    """II(p,m), built from copies of E8(+-1) and U; needs p = m mod 8."""
    if p < 0 or m < 0 or p + m == 0:
        raise LatticeError("II(p,m) needs p, m >= 0 and positive rank")
    if (p - m) % 8:
        raise LatticeError("II(p,m) requires p - m = 0 mod 8")
    k, sign = divmod_e8(p, m)
    parts = [e8_lattice(sign)] * k + [hyperbolic_plane()] * min(p, m)
    if not parts:
        raise LatticeError("empty lattice")
    return direct_sum(*parts)


def divmod_e8(p: int, m: int) -> tuple[int, int]:
    if p >= m:
        return (p - m) // 8, 1
    return (m - p) // 8, -1


_TERM_RE = re.compile(r"^(II|I|U|E8)(?:\(([^()]*)\))?$")


def make_standard(spec: str) -> Lattice:
    """Build a lattice from a literal like "E8(-2)+U(2)+U" or "I(2,10)".

    Terms U, U(n), E8(n), I(p,m), II(p,m) joined by "+".
    """
    text = spec.replace("⊕", "+").replace(" ", "")
    if not text:
        raise LatticeError("empty lattice literal")
    parts = []
    for term in text.split("+"):
        match = _TERM_RE.match(term)
        if not match:
            raise LatticeError(f"cannot parse lattice term {term!r}")
        name, args = match.group(1), match.group(2)
        if name == "U":
            n = Fraction(args) if args else Fraction(1)
            parts.append(hyperbolic_plane(n))
        elif name == "E8":
            n = Fraction(args) if args else Fraction(1)
            parts.append(e8_lattice(n))
        else:
            if not args or args.count(",") != 1:
                raise LatticeError(f"{name} needs two arguments, got {term!r}")
            p, m = (int(x) for x in args.split(","))
            parts.append(odd_unimodular(p, m) if name == "I" else even_unimodular(p, m))
    return direct_sum(*parts)


def direct_sum(*lattices: Lattice) -> Lattice:
    """Orthogonal direct sum; ambients concatenate block-diagonally.

    Mismatched scales are reconciled by folding each scale into its form
    block, which leaves every Gram matrix unchanged.
    """
    if not lattices:
        raise LatticeError("direct sum of nothing")
    if len(lattices) == 1:
        return lattices[0]
    scales = {lat.space.scale for lat in lattices}
    if len(scales) == 1:
        scale = scales.pop()
        form = block_diagonal([lat.space.form for lat in lattices])
    else:
        scale = Fraction(1)
        form = block_diagonal([lat.space.scale * lat.space.form for lat in lattices])
    basis = block_diagonal([lat.basis for lat in lattices])
    return Lattice(QSpace(form, scale), basis)


def rescale(lat: Lattice, n) -> Lattice:
    """Same basis vectors, all inner products multiplied by n."""
    return Lattice(lat.space.rescaled(n), lat.basis)


def lattice_equal(a: Lattice, b: Lattice) -> bool:
    """Identical point sets (same ambient space required)."""
    if not a.same_space(b):
        raise AmbientMismatchError("lattices live in different ambient spaces")
    return a.canonical_basis == b.canonical_basis


# -- text format ---------------------------------------------------------------


def _format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def to_text(lat: Lattice) -> str:
    """Serialize to the exchange format (exact, round-trippable)."""
    lines = [f"ambient_dim {lat.ambient_dim}", f"scale {_format_fraction(lat.space.scale)}", "form"]
    for row in lat.space.form.rows:
        lines.append(" ".join(_format_fraction(x) for x in row))
    if lat.basis != Matrix.identity(lat.ambient_dim):
        lines.append("basis")
        for row in lat.basis.rows:
            lines.append(" ".join(_format_fraction(x) for x in row))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Lattice:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("ambient_dim"):
        raise LatticeError("lattice file must start with ambient_dim")
    try:
        dim = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise LatticeError("bad ambient_dim line") from exc
    pos = 1
    scale = Fraction(1)
    if pos < len(lines) and lines[pos].startswith("scale"):
        scale = Fraction(lines[pos].split()[1])
        pos += 1
    if pos >= len(lines) or lines[pos] != "form":
        raise LatticeError("missing form section")
    pos += 1
    form_rows, pos = _read_matrix(lines, pos, dim, dim)
    basis = Matrix.identity(dim)
    if pos < len(lines):
        if lines[pos] != "basis":
            raise LatticeError(f"unexpected line {lines[pos]!r}")
        pos += 1
        rows, pos = _read_matrix(lines, pos, None, dim)
        basis = rows
    if pos != len(lines):
        raise LatticeError("trailing content in lattice file")
    return Lattice(QSpace(Matrix(form_rows.rows), scale), basis)


def _read_matrix(lines, pos, nrows, ncols):
    rows = []
    while pos < len(lines) and lines[pos] not in ("form", "basis"):
        tokens = lines[pos].split()
        if len(tokens) != ncols:
            raise LatticeError(f"expected {ncols} entries per row, got {len(tokens)}")
        rows.append([Fraction(t) for t in tokens])
        pos += 1
        if nrows is not None and len(rows) == nrows:
            break
    if nrows is not None and len(rows) != nrows:
        raise LatticeError("matrix section has wrong number of rows")
    if not rows:
        raise LatticeError("empty matrix section")
    return Matrix(rows), pos
