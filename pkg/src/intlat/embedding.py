"""End-to-end mechanization of the embedding-uniqueness argument.

The scene: the rank-22 even unimodular lattice E8(-1)^2 + U^3 contains
the involution-fixed diagonal copy A of (E8(-1)+U)(2); its complement B
is even of signature (2,10) with 2-elementary discriminant of order 2^10;
gluing a 5-dimensional totally isotropic subspace of disc(B) produces an
even unimodular C of signature (2,10).  The verifications below check
the index counts |(2B*)/2C| = 2^5 and |B/2C| = 2^7, the glue-map form
identities on all 1024 discriminant elements, transitivity on 5-dim
isotropic subspaces of C/2C by constructed Witt extensions, surjectivity
of lattice isometries onto the discriminant orthogonal group, and the
block extension f + g of sampled isometries to the full lattice.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .discriminant import DiscriminantForm, GlueMap, glue_bijection, overlattice, subgroup_from_basis
from .errors import LatticeError, VerificationFailure
from .exactlin import Matrix, block_diagonal
from .f2quad import (
    F2QuadSpace,
    from_disc_form,
    from_even_lattice,
    carry_subspace,
    induced_image_order,
    orthogonal_group_order,
    witt_index,
    witt_type,
    _echelon,
)
from .isometry import (
    integral_reflection_generators,
    integral_transvection_generators,
    is_form_isometry,
    preserves_lattice,
)
from .lattice import Lattice, QSpace, direct_sum, e8_lattice, hyperbolic_plane, lattice_equal, rescale
from .stabchain import StabChain

DEFAULT_SEED = 20101


@dataclass
class EmbeddingScene:
    ambient: Lattice            # E8(-1)^2 + U^3
    sub: Lattice                # diagonal A with Gram 2*(E8(-1)+U)
    complement: Lattice         # B = A-perp
    even_closure: Lattice       # C: even unimodular overlattice of B
    glue: GlueMap = field(repr=False)
    space_a: F2QuadSpace = field(repr=False)
    space_b: F2QuadSpace = field(repr=False)
    glue_masks: tuple[int, ...] = ()

    @property
    def disc_a(self) -> DiscriminantForm:
        return self.glue.domain

    @property
    def disc_b(self) -> DiscriminantForm:
        return self.glue.codomain


def build_scene() -> EmbeddingScene:
    """Construct and internally verify the embedding scene.

    Any check failing here means the model itself is broken, so failures
    raise instead of being reported.
    """
    amb = direct_sum(e8_lattice(-1), e8_lattice(-1), hyperbolic_plane(), hyperbolic_plane(), hyperbolic_plane())
    rows = []
    for i in range(8):
        row = [0] * 22
        row[i] = 1
        row[8 + i] = 1
        rows.append(row)
    for i in (16, 17):
        row = [0] * 22
        row[i] = 1
        row[i + 2] = 1
        rows.append(row)
    sub = Lattice(amb.space, Matrix(rows))
    doubled = rescale(direct_sum(e8_lattice(-1), hyperbolic_plane()), 2)
    if sub.gram != doubled.gram:
        raise VerificationFailure("diagonal sublattice does not double the Gram matrix")
    if not amb.is_primitive(sub):
        raise VerificationFailure("diagonal sublattice is not primitive")
    comp = amb.orthogonal_complement(sub)
    inv = comp.invariants()
    if inv["signature"] != (2, 10, 0) or inv["parity"] != "even" or abs(inv["det"]) != 1024:
        raise VerificationFailure(f"complement invariants are wrong: {inv}")
    glue = glue_bijection(amb, sub, comp)
    disc_b = glue.codomain
    space_b = from_disc_form(disc_b)
    if witt_type(space_b) != "plus" or space_b.dim != 10:
        raise VerificationFailure("complement discriminant space is not 10-dimensional plus type")
    s5 = _greedy_isotropic(space_b, 5)
    coords = [tuple((mask >> k) & 1 for k in range(disc_b.ndim)) for mask in s5]
    closure = overlattice(comp, subgroup_from_basis(disc_b, coords))
    tag = str(closure.classify_unimodular())
    if tag != "II(2,10)":
        raise VerificationFailure(f"even closure classified as {tag}, expected II(2,10)")
    space_a = from_disc_form(glue.domain)
    return EmbeddingScene(
        ambient=amb,
        sub=sub,
        complement=comp,
        even_closure=closure,
        glue=glue,
        space_a=space_a,
        space_b=space_b,
        glue_masks=tuple(_mask_of(row) for row in glue.matrix),
    )


def _mask_of(coords) -> int:
    return sum((int(c) & 1) << k for k, c in enumerate(coords))


def _greedy_isotropic(space: F2QuadSpace, dim: int) -> tuple[int, ...]:
    basis: list[int] = []
    for v in range(1, 1 << space.dim):
        if space.q(v):
            continue
        if any(space.b(v, w) for w in basis):
            continue
        if v in _span(basis):
            continue
        basis.append(v)
        if len(basis) == dim:
            return tuple(basis)
    raise VerificationFailure(f"no totally isotropic subspace of dimension {dim} found")


def _span(basis: list[int]) -> set[int]:
    out = {0}
    for v in basis:
        out |= {x ^ v for x in out}
    return out


def verify_glue_isometry(scene: EmbeddingScene) -> dict:
    """The glue bijection preserves the mod-2 quadratic values on every one
    of the 1024 discriminant elements (values are integers here, so
    preservation and negation coincide)."""
    disc_a, disc_b, glue = scene.disc_a, scene.disc_b, scene.glue
    checked = 0
    for x in disc_a.elements():
        qa = disc_a.quadratic(x)
        qb = disc_b.quadratic(glue.apply(x))
        if qa.denominator != 1 or (qa - qb) % 2 != 0:
            raise VerificationFailure(f"glue map breaks the quadratic form at {x}")
        checked += 1
    return {"elements_checked": checked, "ok": True}


def verify_counts(scene: EmbeddingScene) -> dict:
    """|(2B*)/2C| = 2^5, |B/2C| = 2^7, [C:B] = 2^5, and B is the preimage
    in C of the orthogonal complement of that isotropic subspace."""
    b, c = scene.complement, scene.even_closure
    space_c = from_even_lattice(c)
    if not space_c.is_nondegenerate():
        raise VerificationFailure("C/2C quadratic form is degenerate")
    index_sq = abs(b.det / c.det)
    if index_sq != 1024:
        raise VerificationFailure(f"[C:B]^2 = {index_sq}, expected 1024")
    # 2C inside B, B inside C.
    for i in range(c.rank):
        if not b.contains(tuple(2 * x for x in c.basis.row(i))):
            raise VerificationFailure("2C is not contained in B")
    b_masks = _image_masks(c, b.basis.rows)
    if len(_echelon(b_masks)) != 7:
        raise VerificationFailure("B/2C does not have order 2^7")
    dual_rows = b.dual().basis
    doubled = [tuple(2 * x for x in dual_rows.row(i)) for i in range(dual_rows.nrows)]
    s_masks = _image_masks(c, doubled)
    s_basis = _echelon(s_masks)
    if len(s_basis) != 5:
        raise VerificationFailure("(2B*)/2C does not have order 2^5")
    for mask in _span(list(s_basis)):
        if space_c.q(mask):
            raise VerificationFailure("(2B*)/2C is not isotropic in C/2C")
    b_basis = _echelon(b_masks)
    for x in b_basis:
        for s in s_basis:
            if space_c.b(x, s):
                raise VerificationFailure("B/2C is not orthogonal to (2B*)/2C")
    perp = [v for v in range(1 << space_c.dim) if all(space_c.b(v, s) == 0 for s in s_basis)]
    perp_basis = _echelon([v for v in perp if v])
    if len(perp_basis) != 7 or perp_basis != b_basis:
        raise VerificationFailure("B/2C is not the orthogonal complement preimage")
    return {
        "two_b_dual_over_2c": 32,
        "b_over_2c": 128,
        "index_c_over_b": 32,
        "preimage_check": True,
        "ok": True,
    }


def _image_masks(ambient: Lattice, rows) -> list[int]:
    masks = []
    for row in rows:
        coords = ambient.coordinates(row)
        if coords is None or any(x.denominator != 1 for x in coords):
            raise VerificationFailure("vector does not lie in the overlattice")
        masks.append(sum((int(x) & 1) << k for k, x in enumerate(coords)))
    return masks


def verify_isotropic_uniqueness(scene: EmbeddingScene, samples: int = 100, seed: int = DEFAULT_SEED) -> dict:
    """Random 5-dimensional totally isotropic subspaces of C/2C are all
    carried onto the reference one by constructed Witt extensions."""
    c = scene.even_closure
    space_c = from_even_lattice(c)
    dual_rows = scene.complement.dual().basis
    doubled = [tuple(2 * x for x in dual_rows.row(i)) for i in range(dual_rows.nrows)]
    reference = _echelon(_image_masks(c, doubled))
    if len(reference) != 5:
        raise VerificationFailure("reference subspace does not have dimension 5")
    rng = random.Random(seed)
    successes = 0
    for _ in range(samples):
        basis = _random_isotropic(space_c, 5, rng)
        carry_subspace(space_c, basis, list(reference))
        successes += 1
    return {
        "samples": samples,
        "successes": successes,
        "seed": seed,
        "witt_index": witt_index(space_c),
        "subspace_dim": 5,
        "ok": successes == samples,
    }


def _random_isotropic(space: F2QuadSpace, dim: int, rng: random.Random) -> list[int]:
    arr = np.arange(1 << space.dim, dtype=np.uint64)
    basis: list[int] = []
    keep = space.q_table == 0
    keep[0] = False
    while len(basis) < dim:
        candidates = arr[keep]
        span = _span(basis)
        candidates = [int(v) for v in candidates.tolist() if v not in span]
        if not candidates:
            raise VerificationFailure("random isotropic subspace construction got stuck")
        pick = rng.choice(candidates)
        basis.append(pick)
        keep &= space.b_batch(arr, pick) == 0
    return basis


def doubled_even_ten() -> Lattice:
    """The even (1,9) lattice with all inner products doubled."""
    return rescale(direct_sum(e8_lattice(-1), hyperbolic_plane()), 2)


def verify_disc_isometry_surjectivity() -> dict:
    """Every isometry of the discriminant form of the doubled even (1,9)
    lattice is induced by an isometry of the lattice: the induced image
    order equals the closed-form orthogonal group order."""
    lat = doubled_even_ten()
    gens = integral_reflection_generators(lat, height=1, norms=(4, -4))
    gens += integral_transvection_generators(lat, height=1)
    target = orthogonal_group_order(10, "plus")
    achieved = induced_image_order(lat, gens, stop_at=target)
    if achieved != target:
        raise VerificationFailure(
            f"induced image order {achieved} falls short of the full group {target}"
        )
    return {"induced_order": achieved, "full_order": target, "generators": len(gens), "ok": True}


# -- block extension engine ---------------------------------------------------


def _pay_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    bound = int(np.abs(a).max(initial=1)) * int(np.abs(b).max(initial=1)) * a.shape[1]
    if bound < 2**62:
        return a @ b
    prod = Matrix(a.tolist()) @ Matrix(b.tolist())
    return np.array(prod.to_int_rows(), dtype=np.int64)


def _pay_inv(a: np.ndarray) -> np.ndarray:
    inv = Matrix(a.tolist()).inverse()
    return np.array(inv.to_int_rows(), dtype=np.int64)


def _iter_coord_isometries(gram: Matrix, height: int = 1):
    """Integer coordinate matrices preserving the Gram, streamed lazily:
    reflections in short vectors of norms -4, 4, -2, 2, then transvections.

    For a standard-basis lattice an integral form isometry preserves the
    lattice automatically (the determinant is a unit), so integrality is
    the whole check.
    """
    from . import fastenum
    from .isometry import reflection, transvection

    std = Lattice.standard(QSpace(gram))
    space = std.space
    gram_rows = gram.to_int_rows()
    seen = set()
    for norm in (-4, 4, -2, 2):
        for row in fastenum.norm_box(gram_rows, norm, height, primitive_only=True):
            v = tuple(int(x) for x in row)
            key = max(v, tuple(-x for x in v))
            if key in seen:
                continue
            seen.add(key)
            m = reflection(space, v)
            if m.is_integral():
                yield np.array(m.to_int_rows(), dtype=np.int64)
    isotropic = fastenum.norm_box(gram_rows, 0, height, primitive_only=True)
    for row in isotropic[: 2 * gram.nrows]:
        e = tuple(int(x) for x in row)
        for i in range(gram.nrows):
            a = tuple(int(x) for x in Matrix.identity(gram.nrows).row(i))
            if space.inner(e, a) != 0:
                continue
            m = transvection(space, e, a)
            if m.is_integral():
                yield np.array(m.to_int_rows(), dtype=np.int64)


def _coord_isometries(gram: Matrix, height: int = 1, limit: int = 160) -> list[np.ndarray]:
    """A bounded harvest of coordinate isometries (see the lazy iterator)."""
    out = []
    for m in _iter_coord_isometries(gram, height):
        out.append(m)
        if len(out) >= limit:
            break
    return out


def _induced_disc_action(disc: DiscriminantForm, lat: Lattice, coords_matrix: np.ndarray, space: F2QuadSpace):
    """F2 action of a coordinate isometry of `lat` on its discriminant group."""
    rows = []
    m = Matrix(coords_matrix.tolist())
    for i in range(disc.ndim):
        gi = tuple(1 if k == i else 0 for k in range(disc.ndim))
        rep = disc.rep(gi)
        coords = lat.coordinates(rep)
        if coords is None:
            raise LatticeError("discriminant representative outside the rational span")
        moved = tuple(
            sum(coords[k] * m[k, j] for k in range(lat.rank)) for j in range(lat.rank)
        )
        ambient = tuple(
            sum(moved[k] * lat.basis[k, j] for k in range(lat.rank))
            for j in range(lat.ambient_dim)
        )
        image = disc.coords(ambient)
        rows.append(sum((int(x) & 1) << k for k, x in enumerate(image)))
    g = tuple(rows)
    if not space.is_isometry(g):
        raise VerificationFailure("induced discriminant action is not an isometry")
    return g


class ExtensionEngine:
    """Finds, for a required action on disc(B), an isometry of B inducing
    it, via a payload-tracking stabilizer chain over the induced group."""

    def __init__(self, scene: EmbeddingScene):
        self.scene = scene
        b = scene.complement
        self.space = scene.space_b
        self.disc = scene.disc_b
        self.b = b
        target = orthogonal_group_order(10, "plus")
        self.chain = StabChain(
            1 << self.space.dim,
            payload_mul=_pay_mul,
            payload_inv=_pay_inv,
            payload_id=np.eye(b.rank, dtype=np.int64),
        )
        self.generators = 0
        seen = set()
        for mat in _iter_coord_isometries(b.gram):
            g = _induced_disc_action(self.disc, b, mat, self.space)
            if g in seen:
                continue
            seen.add(g)
            self.chain.add_generator(self.space.perm_of(g), mat)
            self.generators += 1
            if self.chain.order() >= target:
                break
        self.induced_order = self.chain.order()
        if self.induced_order != target:
            raise VerificationFailure(
                f"complement-side induced image order {self.induced_order} != {target}"
            )

    def lift(self, action) -> np.ndarray:
        """Coordinate isometry of B inducing the given F2 action."""
        mat = self.chain.factor(self.space.perm_of(action))
        check = _induced_disc_action(self.disc, self.b, mat, self.space)
        if check != action:
            raise VerificationFailure("factored isometry induces the wrong action")
        return mat


def _joint_matrices(scene: EmbeddingScene) -> tuple[Matrix, Matrix]:
    p = scene.sub.basis.stack(scene.complement.basis)
    return p, p.inverse()


def _assemble(scene: EmbeddingScene, f_coords: np.ndarray, g_coords: np.ndarray, joint=None) -> Matrix:
    p, pinv = joint if joint is not None else _joint_matrices(scene)
    block = block_diagonal([Matrix(f_coords.tolist()), Matrix(g_coords.tolist())])
    return pinv @ block @ p


def verify_extension_and_equivalence(
    scene: EmbeddingScene,
    samples: int = 50,
    equivalence_samples: int = 8,
    seed: int = DEFAULT_SEED,
) -> dict:
    """Sampled isometries f of the diagonal sublattice extend to the full
    lattice: the glue transports f's discriminant action to a required
    action on disc(B), the extension engine lifts it to g, and f + g is
    verified to preserve the ambient lattice exactly.

    The equivalence variant moves the sublattice by a random ambient
    isometry, rebuilds the glue data for the moved copy, and corrects the
    mismatch through the same engine, closing the loop A' back to A.
    """
    rng = random.Random(seed)
    engine = ExtensionEngine(scene)
    a = scene.sub
    gens_a = _coord_isometries(a.gram)
    space_a, space_b = scene.space_a, scene.space_b
    gamma = scene.glue_masks
    gamma_inv = space_b.invert(gamma)
    joint = _joint_matrices(scene)
    extended = 0
    for _ in range(samples):
        f = np.eye(a.rank, dtype=np.int64)
        for _ in range(rng.randint(2, 6)):
            f = _pay_mul(f, rng.choice(gens_a))
        h_a = _induced_disc_action(scene.disc_a, a, f, space_a)
        h_b = space_b.compose(space_b.compose(gamma_inv, h_a), gamma)
        g = engine.lift(h_b)
        m = _assemble(scene, f, g, joint)
        if not is_form_isometry(scene.ambient.space, m):
            raise VerificationFailure("assembled block map is not an ambient isometry")
        if not preserves_lattice(scene.ambient, m):
            raise VerificationFailure("assembled block map does not preserve the big lattice")
        extended += 1

    gens_l = [
        np.array(m.to_int_rows(), dtype=np.int64)
        for m in integral_reflection_generators(scene.ambient, height=1, norms=(2, -2))
    ]
    closed_loops = 0
    for _ in range(equivalence_samples):
        h = np.eye(22, dtype=np.int64)
        for _ in range(rng.randint(2, 4)):
            h = _pay_mul(h, rng.choice(gens_l))
        h_m = Matrix(h.tolist())
        moved_a = Lattice(scene.ambient.space, a.basis @ h_m)
        # Random twist so the correction step has actual work to do.
        f_rand = rng.choice(gens_a)
        g_rand = engine.lift(
            space_b.compose(
                space_b.compose(gamma_inv, _induced_disc_action(scene.disc_a, a, f_rand, space_a)),
                gamma,
            )
        )
        phi0 = h_m.inverse() @ _assemble(scene, f_rand, g_rand, joint)
        moved_l = Lattice(scene.ambient.space, scene.ambient.basis @ phi0)
        if not lattice_equal(
            Lattice(scene.ambient.space, moved_a.basis @ phi0), Lattice.from_generators(a.space, a.basis)
        ):
            raise VerificationFailure("moved sublattice does not return to A under phi0")
        glue2 = glue_bijection(moved_l, a, scene.complement)
        gamma2 = tuple(_mask_of(row) for row in glue2.matrix)
        correction = space_b.compose(space_b.invert(gamma2), gamma)
        g_corr = engine.lift(correction)
        phi = phi0 @ _assemble(scene, np.eye(a.rank, dtype=np.int64), g_corr, joint)
        if not preserves_lattice(scene.ambient, phi):
            raise VerificationFailure("corrected map does not preserve the big lattice")
        if not lattice_equal(
            Lattice(scene.ambient.space, moved_a.basis @ phi), Lattice.from_generators(a.space, a.basis)
        ):
            raise VerificationFailure("corrected map does not carry A' back onto A")
        closed_loops += 1

    return {
        "extensions": extended,
        "closed_loops": closed_loops,
        "seed": seed,
        "complement_induced_order": engine.induced_order,
        "engine_generators": engine.generators,
        "ok": extended == samples and closed_loops == equivalence_samples,
    }
