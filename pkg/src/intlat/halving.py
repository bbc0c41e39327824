"""The halving correspondence between doubled-even and odd unimodular lattices.

For A even with 2*gram(A)^-1 integral (the shape "even unimodular scaled
by two, plus a hyperbolic plane"), the dual of A taken at half the ambient
scale is an even lattice with Gram 2*G^-1 that lies in a unique odd
unimodular lattice hat(A).  The inverse is unhat: even sublattice, dual,
scale restored.  Both directions are intrinsic, so isometries transport.

Because hat(A) lives in the same coordinate space at half scale, a vector
of A with norm k is literally the same ambient point as a vector of
hat(A) with norm k/2; the vector-correspondence checks below are exact
membership sweeps, not approximate matchings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import fastenum
from .discriminant import DiscriminantForm, Subgroup, isotropic_subgroups, overlattice
from .errors import LatticeError, VerificationFailure
from .exactlin import Matrix
from .lattice import Lattice, lattice_equal, make_standard
from .isometry import is_form_isometry, preserves_lattice


@dataclass(frozen=True)
class HatPair:
    source: Lattice        # A: even, ambient (form, s)
    hat: Lattice           # odd unimodular overlattice, ambient (form, s/2)
    intermediate: Lattice  # dual of A at half scale; Gram = 2 * gram(A)^-1
    glue: Subgroup         # the odd glue subgroup selecting hat


def hat(a: Lattice) -> HatPair:
    """The unique odd unimodular lattice attached to a doubled-even lattice.

    Preconditions: a integral and even, 2*gram(a)^-1 integral.  If zero or
    several odd unimodular overlattices exist the input is outside the
    construction's hypotheses and a LatticeError is raised.
    """
    if not a.is_integral() or not a.is_even():
        raise LatticeError("hat requires an even integral lattice")
    doubled_dual_gram = 2 * a.gram.inverse()
    if not doubled_dual_gram.is_integral():
        raise LatticeError("hat requires 2 * gram^-1 integral")
    half = Lattice(a.space.rescaled(Fraction(1, 2)), a.basis)
    inter = half.dual()
    if inter.gram != doubled_dual_gram:
        raise LatticeError("intermediate Gram mismatch (internal error)")
    if not inter.is_even():
        raise LatticeError("intermediate lattice is not even; input outside hypotheses")
    disc = DiscriminantForm(inter)
    size = disc.order
    root = _isqrt_exact(size)
    if root is None:
        raise LatticeError("discriminant order is not a perfect square")
    odd_glues = []
    for sub in isotropic_subgroups(disc, max_order=root):
        if sub.order != root:
            continue
        over = overlattice(inter, sub)
        if over.is_unimodular() and not over.is_even():
            odd_glues.append((sub, over))
    if len(odd_glues) != 1:
        raise LatticeError(
            f"expected exactly one odd unimodular overlattice, found {len(odd_glues)}"
        )
    glue, hat_lattice = odd_glues[0]
    return HatPair(source=a, hat=hat_lattice, intermediate=inter, glue=glue)


def unhat(a_hat: Lattice) -> Lattice:
    """Inverse construction: even sublattice, dual, ambient scale doubled."""
    if not a_hat.is_integral():
        raise LatticeError("unhat requires an integral lattice")
    if a_hat.is_even():
        raise LatticeError("unhat requires an odd lattice")
    even = a_hat.even_sublattice()
    dualed = even.dual()
    return Lattice(dualed.space.rescaled(2), dualed.basis)


def transport_isometry(pair: HatPair, f: Matrix) -> Matrix:
    """Verify that an isometry preserving the source also preserves hat.

    The returned matrix is f itself: both lattices live in one coordinate
    space, so transport is the identity on matrices and the verification
    is the content.  A failure of the second check would falsify the
    construction and raises VerificationFailure.
    """
    if not is_form_isometry(pair.source.space, f):
        raise LatticeError("matrix does not preserve the ambient form")
    if not preserves_lattice(pair.source, f):
        raise LatticeError("matrix does not preserve the source lattice")
    if not preserves_lattice(pair.hat, f):
        raise VerificationFailure(
            "isometry preserves the source lattice but not its hat partner"
        )
    return f


def transport_isometry_back(pair: HatPair, f: Matrix) -> Matrix:
    """Same check in the other direction (hat-preserving implies source-preserving)."""
    if not is_form_isometry(pair.hat.space, f):
        raise LatticeError("matrix does not preserve the ambient form")
    if not preserves_lattice(pair.hat, f):
        raise LatticeError("matrix does not preserve the hat lattice")
    if not preserves_lattice(pair.source, f):
        raise VerificationFailure(
            "isometry preserves the hat lattice but not the source"
        )
    return f


def _isqrt_exact(n: int) -> int | None:
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


# -- vector correspondence -----------------------------------------------------


def _points_and_coords(lat: Lattice, norm: int, height: int):
    """Primitive coefficient vectors and exact scaled ambient points."""
    coeffs = fastenum.norm_box(lat.gram.to_int_rows(), norm, height, primitive_only=True)
    points, den = fastenum.ambient_scaled(coeffs, lat.basis)
    return coeffs, points, den


def _membership_in(points: np.ndarray, pden: int, target: Lattice):
    inv_num, iden = fastenum.scaled_inverse(target.basis)
    num = points @ inv_num
    div = pden * iden
    mask = (num % div == 0).all(axis=1)
    coords = num[mask] // div
    return mask, coords


def vector_correspondence(pair: HatPair, norm_pairs, height: int, assert_bijection: bool = True) -> dict:
    """Check that primitive norm-k vectors of the source and norm-(k/2)
    vectors of hat coincide as ambient point sets, by exact membership.

    For the pair (-4, -2) the source vectors split into even type (ambient
    point lies in hat) and odd type (it does not); each odd-type vector is
    verified to double into a primitive norm -8 vector of hat.  The (0, 0)
    pair is informational: no bijection is asserted for isotropic rays.
    """
    a, ahat = pair.source, pair.hat
    report: dict = {"height": height, "pairs": []}
    for k, khat in norm_pairs:
        k, khat = int(k), int(khat)
        if k != 2 * khat:
            raise LatticeError(f"incompatible norm pair ({k}, {khat})")
        informational = khat == 0
        coeffs_a, points_a, den_a = _points_and_coords(a, k, height)
        coeffs_h, points_h, den_h = _points_and_coords(ahat, khat, height)
        entry = {
            "k": k,
            "k_hat": khat,
            "count_source": int(coeffs_a.shape[0]),
            "count_hat": int(coeffs_h.shape[0]),
            "informational": informational,
        }
        if informational:
            in_hat, _ = _membership_in(points_a, den_a, ahat)
            entry["source_points_in_hat"] = int(in_hat.sum())
            report["pairs"].append(entry)
            continue

        in_hat, coords_in_hat = _membership_in(points_a, den_a, ahat)
        prim_in_hat = fastenum.gcd_rows(coords_in_hat) == 1

        if (k, khat) == (-4, -2):
            n_even = int(in_hat.sum())
            entry["even_type"] = n_even
            entry["odd_type"] = int((~in_hat).sum())
            if not bool(prim_in_hat.all()):
                _fail(assert_bijection, entry, "an even-type vector is imprimitive in hat")
            odd_points = points_a[~in_hat]
            if odd_points.size:
                doubled_mask, doubled_coords = _membership_in(2 * odd_points, den_a, ahat)
                if not bool(doubled_mask.all()):
                    _fail(assert_bijection, entry, "an odd-type vector does not double into hat")
                if not bool((fastenum.gcd_rows(doubled_coords) == 1).all()):
                    _fail(assert_bijection, entry, "a doubled odd-type vector is imprimitive in hat")
                # Same ambient point at half scale: norm doubles from -4 to -8.
                entry["odd_image_norm"] = -8
        else:
            if not bool(in_hat.all()):
                _fail(assert_bijection, entry, "a source vector is missing from hat")
            if not bool(prim_in_hat.all()):
                _fail(assert_bijection, entry, "a source vector is imprimitive in hat")

        in_src, coords_in_src = _membership_in(points_h, den_h, a)
        prim_in_src = fastenum.gcd_rows(coords_in_src) == 1
        if not bool(in_src.all()):
            _fail(assert_bijection, entry, "a hat vector is missing from the source lattice")
        if not bool(prim_in_src.all()):
            _fail(assert_bijection, entry, "a hat vector is imprimitive in the source lattice")
        entry["mismatches"] = 0
        report["pairs"].append(entry)
    report["ok"] = True
    return report


def _fail(assert_bijection: bool, entry: dict, message: str):
    entry.setdefault("failures", []).append(message)
    if assert_bijection:
        raise VerificationFailure(message)


# -- end-to-end check of the unique-odd-overlattice pipeline -------------------

LEMMA1_CASES = (
    ("E8(-2)+U(2)+U", "I(2,10)"),
    ("E8(-2)+U", "I(1,9)"),
    ("U(2)+U", "I(2,2)"),
    ("II(1,9)(2)+U", "I(2,10)"),
)


def _build_case(name: str) -> Lattice:
    if name == "II(1,9)(2)+U":
        from .lattice import direct_sum, e8_lattice, hyperbolic_plane, rescale

        doubled = rescale(direct_sum(e8_lattice(-1), hyperbolic_plane()), 2)
        return direct_sum(doubled, hyperbolic_plane())
    return make_standard(name)


def verify_unique_odd_overlattice(cases=LEMMA1_CASES) -> dict:
    """For each doubled-even input: intermediate Gram is 2*G^-1 and even;
    exactly one odd and exactly two even unimodular overlattices exist;
    hat classifies as predicted; unhat(hat) returns the input exactly."""
    report = {"cases": []}
    for name, expected in cases:
        a = _build_case(name)
        pair = hat(a)
        inter = pair.intermediate
        if inter.gram != 2 * a.gram.inverse():
            raise VerificationFailure(f"{name}: intermediate Gram is not 2*G^-1")
        if not inter.is_even():
            raise VerificationFailure(f"{name}: intermediate lattice is odd")
        disc = DiscriminantForm(inter)
        root = _isqrt_exact(disc.order)
        glues = [s for s in isotropic_subgroups(disc, max_order=root) if s.order == root]
        overs = [overlattice(inter, s) for s in glues]
        unimodular = [o for o in overs if o.is_unimodular()]
        odd = [o for o in unimodular if not o.is_even()]
        even = [o for o in unimodular if o.is_even()]
        if len(odd) != 1:
            raise VerificationFailure(f"{name}: {len(odd)} odd unimodular overlattices")
        if len(even) != 2:
            raise VerificationFailure(f"{name}: {len(even)} even unimodular overlattices")
        tag = str(pair.hat.classify_unimodular())
        if tag != expected:
            raise VerificationFailure(f"{name}: hat classifies as {tag}, expected {expected}")
        if not lattice_equal(unhat(pair.hat), a):
            raise VerificationFailure(f"{name}: unhat(hat(A)) differs from A")
        report["cases"].append(
            {
                "input": name,
                "hat": tag,
                "odd_overlattices": len(odd),
                "even_overlattices": len(even),
                "round_trip": True,
            }
        )
    report["ok"] = True
    return report
