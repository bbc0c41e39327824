"""Discriminant groups A*/A with their torsion forms, glue subgroups,
overlattices, and the projection bijection induced by a unimodular
overlattice containing a primitive sublattice and its complement."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import BudgetExceededError, LatticeError
from .exactlin import Matrix, snf
from .lattice import Lattice, Vector, lattice_equal

DEFAULT_BUDGET = 2**16

Coords = tuple[int, ...]


class DiscriminantForm:
    """A*/A as a finite abelian group with Q/Z bilinear (and Q/2Z quadratic) form.

    Elements are coordinate tuples relative to `gens`, the i-th entry
    living in Z/invariant_factors[i].
    """

    def __init__(self, source: Lattice):
        if not source.is_integral():
            raise LatticeError("discriminant form requires an integral lattice")
        gram = source.gram
        if gram.det() == 0:
            raise LatticeError("discriminant form requires a nondegenerate lattice")
        self.source = source
        d, _, v = snf(gram)
        factors = [int(d[i, i]) for i in range(gram.nrows)]
        vinv = v.inverse()
        dual_basis = gram.inverse() @ source.basis
        gen_rows = vinv @ dual_basis
        keep = [i for i, di in enumerate(factors) if di > 1]
        self.invariant_factors: tuple[int, ...] = tuple(factors[i] for i in keep)
        self.gens: tuple[Vector, ...] = tuple(gen_rows.row(i) for i in keep)
        self._v = v
        self._all_factors = factors
        # scale * F * B^T maps an ambient dual vector to its A*-basis coords.
        self._dual_coord = (source.space.scale * source.space.form) @ source.basis.T
        if keep:
            kept_rows = Matrix([gen_rows.row(i) for i in keep])
            self._gen_gram = source.space.scale * (kept_rows @ source.space.form @ kept_rows.T)
        else:
            self._gen_gram = Matrix.identity(1)
        self._keep = keep

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def ndim(self) -> int:
        return len(self.invariant_factors)

    def is_two_elementary(self) -> bool:
        return all(d == 2 for d in self.invariant_factors)

    @property
    def zero(self) -> Coords:
        return (0,) * self.ndim

    def elements(self):
        return itertools.product(*(range(d) for d in self.invariant_factors))

    def add(self, x: Coords, y: Coords) -> Coords:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.invariant_factors))

    def neg(self, x: Coords) -> Coords:
        return tuple((-a) % d for a, d in zip(x, self.invariant_factors))

    def scale_element(self, k: int, x: Coords) -> Coords:
        return tuple((k * a) % d for a, d in zip(x, self.invariant_factors))

    def element_order(self, x: Coords) -> int:
        return math.lcm(*(d // math.gcd(d, a) for a, d in zip(x, self.invariant_factors))) if x else 1

    def rep(self, x: Coords) -> Vector:
        """Canonical ambient representative in A* of a group element."""
        n = self.source.ambient_dim
        out = [Fraction(0)] * n
        for c, g in zip(x, self.gens):
            for j in range(n):
                out[j] += c * g[j]
        return tuple(out)

    def coords(self, v) -> Coords:
        """Group element of an ambient vector lying in A*."""
        v = tuple(Fraction(t) for t in v)
        y = [sum(vi * self._dual_coord[i, j] for i, vi in enumerate(v)) for j in range(self.source.rank)]
        if any(t.denominator != 1 for t in y):
            raise LatticeError("vector is not in the dual lattice")
        yv = [sum(int(y[i]) * self._v[i, j] for i in range(len(y))) for j in range(len(self._all_factors))]
        return tuple(int(yv[i]) % self._all_factors[i] for i in self._keep)

    def bilinear(self, x: Coords, y: Coords) -> Fraction:
        """Pairing value in [0, 1)."""
        total = sum(
            (xi * yj * self._gen_gram[i, j] for i, xi in enumerate(x) for j, yj in enumerate(y)),
            Fraction(0),
        )
        return total % 1

    def quadratic(self, x: Coords) -> Fraction:
        """Norm value in [0, 2); canonical when the source lattice is even."""
        total = sum(
            (xi * xj * self._gen_gram[i, j] for i, xi in enumerate(x) for j, xj in enumerate(x)),
            Fraction(0),
        )
        return total % 2


@dataclass(frozen=True)
class Subgroup:
    disc: DiscriminantForm = field(repr=False)
    basis: tuple[Coords, ...]
    elements: frozenset[Coords]

    @property
    def order(self) -> int:
        return len(self.elements)

    def bilinear_vanishes(self) -> bool:
        return all(self.disc.bilinear(x, y) == 0 for x in self.basis for y in self.basis)

    def quadratic_vanishes(self) -> bool:
        return all(self.disc.quadratic(x) == 0 for x in self.elements)

    def sort_key(self):
        return (self.order, tuple(sorted(self.elements)))


def discriminant_form(lat: Lattice) -> DiscriminantForm:
    return DiscriminantForm(lat)


def _closure(disc: DiscriminantForm, elements: frozenset, x: Coords) -> frozenset:
    new = set(elements)
    k = disc.element_order(x)
    for mult in range(1, k):
        shift = disc.scale_element(mult, x)
        new.update(disc.add(e, shift) for e in elements)
    return frozenset(new)


def subgroup_from_basis(disc: DiscriminantForm, basis) -> Subgroup:
    """Subgroup generated by the given coordinate tuples."""
    basis = tuple(tuple(int(c) % d for c, d in zip(b, disc.invariant_factors)) for b in basis)
    elements = frozenset({disc.zero})
    for x in basis:
        elements = _closure(disc, elements, x)
    return Subgroup(disc, basis, elements)


def isotropic_subgroups(
    disc: DiscriminantForm,
    budget: int = DEFAULT_BUDGET,
    max_order: int | None = None,
) -> list[Subgroup]:
    """All subgroups on which the bilinear form vanishes identically.

    Use Subgroup.quadratic_vanishes() to separate even glue from odd glue.
    Raises BudgetExceededError when the group (or the subgroup count)
    exceeds the budget.
    """
    if disc.order > budget:
        raise BudgetExceededError(f"discriminant group order {disc.order} exceeds budget {budget}")
    all_elems = [e for e in disc.elements() if disc.bilinear(e, e) == 0]
    trivial = Subgroup(disc, (), frozenset({disc.zero}))
    found: dict[frozenset, Subgroup] = {trivial.elements: trivial}
    queue = [trivial]
    while queue:
        sub = queue.pop()
        if max_order is not None and sub.order >= max_order:
            continue
        for x in all_elems:
            if x in sub.elements:
                continue
            if any(disc.bilinear(x, b) != 0 for b in sub.basis):
                continue
            elements = _closure(disc, sub.elements, x)
            if max_order is not None and len(elements) > max_order:
                continue
            if elements not in found:
                new = Subgroup(disc, sub.basis + (x,), elements)
                found[elements] = new
                queue.append(new)
                if len(found) > budget:
                    raise BudgetExceededError("isotropic subgroup count exceeds budget")
    return sorted(found.values(), key=Subgroup.sort_key)


def overlattice(lat: Lattice, glue: Subgroup | list) -> Lattice:
    """Lattice generated by `lat` and representatives of a glue subgroup.

    The glue must be isotropic for the bilinear form (this is exactly
    integrality of the result); the index equals the subgroup order.
    """
    if isinstance(glue, Subgroup):
        disc, basis = glue.disc, glue.basis
        if disc.source is not lat and not lattice_equal(disc.source, lat):
            raise LatticeError("glue subgroup belongs to a different lattice")
        order = glue.order
    else:
        disc = DiscriminantForm(lat)
        basis = tuple(disc.coords(v) for v in glue)
        elements = frozenset({disc.zero})
        for x in basis:
            elements = _closure(disc, elements, x)
        order = len(elements)
    if any(disc.bilinear(x, y) != 0 for x in basis for y in basis):
        raise LatticeError("glue subgroup is not isotropic for the bilinear form")
    if not basis:
        return lat
    rows = Matrix(list(lat.basis.rows) + [disc.rep(x) for x in basis])
    result = Lattice.from_generators(lat.space, rows)
    if not result.is_integral():
        raise LatticeError("overlattice is not integral (non-isotropic glue)")
    if result.det * order * order != lat.det:
        raise LatticeError("overlattice index does not match glue order")
    return result


def unimodular_overlattices(lat: Lattice, parity: str = "any", budget: int = DEFAULT_BUDGET) -> list[Lattice]:
    """All unimodular overlattices, via maximal isotropic glue subgroups.

    parity: "odd", "even" or "any".
    """
    if parity not in ("odd", "even", "any"):
        raise LatticeError(f"bad parity filter {parity!r}")
    disc = DiscriminantForm(lat)
    size = disc.order
    root = math.isqrt(size)
    if root * root != size:
        return []
    out = []
    for sub in isotropic_subgroups(disc, budget=budget, max_order=root):
        if sub.order != root:
            continue
        over = overlattice(lat, sub)
        if not over.is_unimodular():
            continue
        if parity == "odd" and over.is_even():
            continue
        if parity == "even" and not over.is_even():
            continue
        out.append(over)
    return out


@dataclass(frozen=True)
class GlueMap:
    """Isomorphism disc(A) -> disc(B) induced by projections inside a
    unimodular lattice containing A (primitive) with complement B."""

    domain: DiscriminantForm = field(repr=False)
    codomain: DiscriminantForm = field(repr=False)
    matrix: tuple[Coords, ...]  # images of the domain generators

    def apply(self, x: Coords) -> Coords:
        out = self.codomain.zero
        for c, row in zip(x, self.matrix):
            out = self.codomain.add(out, self.codomain.scale_element(c, row))
        return out

    def is_bijective(self) -> bool:
        if self.domain.order != self.codomain.order:
            return False
        images = {self.apply(x) for x in self.domain.elements()}
        return len(images) == self.domain.order

    def check_forms(self, even_ambient: bool) -> None:
        """Projection law: the glue map negates the bilinear form mod 1;
        inside an even lattice it also negates the quadratic form mod 2."""
        dom, cod = self.domain, self.codomain
        gens = [tuple(1 if j == i else 0 for j in range(dom.ndim)) for i in range(dom.ndim)]
        for i, x in enumerate(gens):
            for y in gens[i:]:
                lhs = dom.bilinear(x, y)
                rhs = cod.bilinear(self.apply(x), self.apply(y))
                if (lhs + rhs) % 1 != 0:
                    raise LatticeError("glue map does not negate the bilinear form")
        if even_ambient:
            for x in gens:
                if (dom.quadratic(x) + cod.quadratic(self.apply(x))) % 2 != 0:
                    raise LatticeError("glue map does not negate the quadratic form")


def glue_bijection(ambient: Lattice, a: Lattice, b: Lattice) -> GlueMap:
    """The bijection disc(A) -> disc(B) defined by projecting `ambient`.

    Requires `ambient` unimodular, `a` primitive in it, and `b` its
    orthogonal complement; a failure of bijectivity here indicates a bug
    in the caller, not a property of valid inputs.
    """
    if not ambient.is_unimodular():
        raise LatticeError("glue bijection requires a unimodular ambient lattice")
    if not ambient.is_primitive(a):
        raise LatticeError("sublattice is not primitive")
    disc_a, disc_b = DiscriminantForm(a), DiscriminantForm(b)
    if disc_a.order != disc_b.order:
        raise LatticeError("complement has mismatched discriminant order")
    joint = Lattice(ambient.space, a.basis.stack(b.basis))
    pairs = []
    for i in range(ambient.rank):
        coords = joint.coordinates(ambient.basis.row(i))
        if coords is None:
            raise LatticeError("ambient lattice does not split over A + B rationally")
        alpha = tuple(
            sum(coords[k] * a.basis[k, j] for k in range(a.rank))
            for j in range(ambient.ambient_dim)
        )
        beta = tuple(
            sum(coords[a.rank + k] * b.basis[k, j] for k in range(b.rank))
            for j in range(ambient.ambient_dim)
        )
        pairs.append((disc_a.coords(alpha), disc_b.coords(beta)))
    matrix = tuple(
        _solve_in_group(disc_a, disc_b, pairs, tuple(1 if j == i else 0 for j in range(disc_a.ndim)))
        for i in range(disc_a.ndim)
    )
    glue = GlueMap(disc_a, disc_b, matrix)
    if not glue.is_bijective():
        raise LatticeError("projection did not induce a bijection (internal error)")
    glue.check_forms(even_ambient=ambient.is_even())
    return glue


def _solve_in_group(disc_a, disc_b, pairs, target: Coords) -> Coords:
    """Write `target` as an integer combination of the pair sources and
    push the combination to the pair images."""
    if not pairs or not target:
        return disc_b.zero
    m = len(pairs)
    n = disc_a.ndim
    rows = [list(src) for src, _ in pairs]
    rel = []
    for i, d in enumerate(disc_a.invariant_factors):
        rel_row = [0] * n
        rel_row[i] = d
        rel.append(rel_row)
    full = Matrix(rows + rel)
    from .exactlin import hnf as _hnf

    h, u = _hnf(full)
    # Solve y @ h = target by forward substitution over the staircase.
    y = [0] * h.nrows
    t = list(target)
    row_idx = 0
    for col in range(n):
        pivot_rows = [r for r in range(h.nrows) if h[r, col] != 0 and all(h[r, c] == 0 for c in range(col))]
        if not pivot_rows:
            if t[col] != 0:
                raise LatticeError("target not generated (internal error)")
            continue
        r = pivot_rows[0]
        piv = int(h[r, col])
        if t[col] % piv:
            raise LatticeError("target not generated (internal error)")
        q = t[col] // piv
        y[r] = q
        for c in range(n):
            t[c] -= q * int(h[r, c])
    coeffs = [sum(y[r] * int(u[r, k]) for r in range(h.nrows)) for k in range(m)]
    out = disc_b.zero
    for c, (_, img) in zip(coeffs, pairs):
        out = disc_b.add(out, disc_b.scale_element(c, img))
    return out
