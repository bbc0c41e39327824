"""Quadratic spaces over F2: Arf invariant, constructive Witt extension,
orthogonal-group generators with certified order, and induced actions of
lattice isometries on 2-elementary discriminant groups.

Vectors are bitmasks (int), isometries are tuples of row images.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .discriminant import DiscriminantForm
from .errors import LatticeError, VerificationFailure
from .exactlin import Matrix
from .lattice import Lattice
from .stabchain import StabChain

MAX_DIM = 14  # point actions stay within degree 2^14

Isometry = tuple[int, ...]


@dataclass(frozen=True)
class F2QuadSpace:
    """q(x) = x Q x^T over F2 with Q upper triangular, given as row masks."""

    dim: int
    q_rows: tuple[int, ...]  # row i: bits j >= i of Q

    def __post_init__(self):
        if self.dim > MAX_DIM:
            raise LatticeError(f"dimension {self.dim} exceeds the engine limit {MAX_DIM}")
        if len(self.q_rows) != self.dim:
            raise LatticeError("need one Q row per dimension")
        for i, row in enumerate(self.q_rows):
            if row & ((1 << i) - 1):
                raise LatticeError("Q must be upper triangular")

    @cached_property
    def b_rows(self) -> tuple[int, ...]:
        """Polar form matrix B = Q + Q^T (zero diagonal, symmetric)."""
        rows = [0] * self.dim
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                if (self.q_rows[i] >> j) & 1:
                    rows[i] |= 1 << j
                    rows[j] |= 1 << i
        return tuple(rows)

    @cached_property
    def q_table(self) -> np.ndarray:
        # Doubling construction: q(x + e_i) = q(x) + q(e_i) + b(x, e_i).
        table = np.zeros(1 << self.dim, dtype=np.uint8)
        idx = np.arange(1 << self.dim, dtype=np.uint64)
        for i in range(self.dim):
            block = 1 << i
            diag = (self.q_rows[i] >> i) & 1
            cross = (np.bitwise_count(idx[:block] & np.uint64(self.b_rows[i])) & 1).astype(np.uint8)
            table[block : 2 * block] = table[:block] ^ diag ^ cross
        return table

    def q(self, x: int) -> int:
        return int(self.q_table[x])

    def b(self, x: int, y: int) -> int:
        acc = 0
        while x:
            low = x & -x
            acc ^= bin(self.b_rows[low.bit_length() - 1] & y).count("1")
            x ^= low
        return acc & 1

    @cached_property
    def radical_dim(self) -> int:
        rows = list(self.b_rows)
        rank = 0
        for col in range(self.dim):
            piv = next((k for k in range(rank, self.dim) if (rows[k] >> col) & 1), None)
            if piv is None:
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            for k in range(self.dim):
                if k != rank and (rows[k] >> col) & 1:
                    rows[k] ^= rows[rank]
            rank += 1
        return self.dim - rank

    def is_nondegenerate(self) -> bool:
        return self.radical_dim == 0

    # -- isometries ------------------------------------------------------------

    def identity(self) -> Isometry:
        return tuple(1 << i for i in range(self.dim))

    def apply(self, g: Isometry, x: int) -> int:
        out = 0
        while x:
            low = x & -x
            out ^= g[low.bit_length() - 1]
            x ^= low
        return out

    def compose(self, g: Isometry, h: Isometry) -> Isometry:
        return tuple(self.apply(h, row) for row in g)

    def invert(self, g: Isometry) -> Isometry:
        n = self.dim
        aug = [(g[i] << n) | (1 << i) for i in range(n)]
        rank = 0
        for col in range(n):
            piv = next((k for k in range(rank, n) if (aug[k] >> (n + col)) & 1), None)
            if piv is None:
                raise LatticeError("singular F2 matrix")
            aug[rank], aug[piv] = aug[piv], aug[rank]
            for k in range(n):
                if k != rank and (aug[k] >> (n + col)) & 1:
                    aug[k] ^= aug[rank]
            rank += 1
        inv = [0] * n
        for row in aug:
            col = ((row >> n) & ((1 << n) - 1)).bit_length() - 1
            inv[col] = row & ((1 << n) - 1)
        return tuple(inv)

    def is_isometry(self, g: Isometry) -> bool:
        if len(g) != self.dim:
            return False
        for i in range(self.dim):
            if self.q(g[i]) != self.q(1 << i):
                return False
            for j in range(i + 1, self.dim):
                if self.b(g[i], g[j]) != self.b(1 << i, 1 << j):
                    return False
        return True

    def transvection(self, v: int) -> Isometry:
        """x -> x + b(x, v) v; preserves q exactly when q(v) = 1."""
        if self.q(v) != 1:
            raise LatticeError("transvection vector must have q = 1")
        return tuple((1 << i) ^ (v if self.b(1 << i, v) else 0) for i in range(self.dim))

    def perm_of(self, g: Isometry) -> np.ndarray:
        size = 1 << self.dim
        perm = np.zeros(size, dtype=np.int32)
        for i in range(self.dim):
            block = 1 << i
            perm[block : 2 * block] = perm[:block] ^ g[i]
        return perm

    def b_mask(self, w: int) -> int:
        """Bitmask whose i-th bit is b(e_i, w)."""
        mask = 0
        for i in range(self.dim):
            mask |= (bin(self.b_rows[i] & w).count("1") & 1) << i
        return mask

    def b_batch(self, vectors: np.ndarray, w: int) -> np.ndarray:
        """b(v, w) for an array of vector masks."""
        return (np.bitwise_count(vectors.astype(np.uint64) & np.uint64(self.b_mask(w))) & 1).astype(np.uint8)

    def preserves_q(self, g: Isometry) -> bool:
        perm = self.perm_of(g)
        return bool((self.q_table[perm] == self.q_table).all())


# -- constructors ---------------------------------------------------------------


def from_even_lattice(lat: Lattice) -> F2QuadSpace:
    """(L/2L, norm/2 mod 2) for an even integral lattice."""
    if not lat.is_integral() or not lat.is_even():
        raise LatticeError("construction needs an even integral lattice")
    gram = lat.gram.to_int_rows()
    n = lat.rank
    rows = []
    for i in range(n):
        row = ((gram[i][i] // 2) % 2) << i
        for j in range(i + 1, n):
            row |= (gram[i][j] % 2) << j
        rows.append(row)
    return F2QuadSpace(n, tuple(rows))


def from_disc_form(disc: DiscriminantForm, halve: bool = False) -> F2QuadSpace:
    """F2 space carrying the torsion quadratic form of a 2-elementary group.

    halve=False uses values q mod 2 directly (they must be integers);
    halve=True divides even integer values by two first.
    """
    if not disc.is_two_elementary():
        raise LatticeError("discriminant group is not 2-elementary")
    n = disc.ndim
    rows = []
    for i in range(n):
        gi = tuple(1 if k == i else 0 for k in range(n))
        qv = disc.quadratic(gi)
        if halve:
            if qv.denominator != 1 or int(qv) % 2:
                raise LatticeError(f"value {qv} is not representable after halving")
            diag = (int(qv) // 2) % 2
        else:
            if qv.denominator != 1:
                raise LatticeError(f"value {qv} is not representable over F2")
            diag = int(qv) % 2
        row = diag << i
        for j in range(i + 1, n):
            gj = tuple(1 if k == j else 0 for k in range(n))
            bv = disc.bilinear(gi, gj) * (1 if halve else 2)
            if bv.denominator != 1:
                raise LatticeError(f"pairing value {bv} is not representable over F2")
            row |= (int(bv) % 2) << j
        rows.append(row)
    return F2QuadSpace(n, tuple(rows))


# -- invariants -------------------------------------------------------------------


def arf(space: F2QuadSpace) -> int:
    """Arf invariant by zero counting (the contractual path)."""
    if space.dim % 2 or not space.is_nondegenerate():
        raise LatticeError("Arf needs a nondegenerate even-dimensional space")
    zeros = int((space.q_table == 0).sum())
    half = space.dim // 2
    if zeros == (1 << (space.dim - 1)) + (1 << (half - 1)):
        return 0
    if zeros == (1 << (space.dim - 1)) - (1 << (half - 1)):
        return 1
    raise LatticeError("zero count matches neither type (degenerate form?)")


def witt_type(space: F2QuadSpace) -> str:
    return "plus" if arf(space) == 0 else "minus"


def arf_by_reduction(space: F2QuadSpace) -> int:
    """Independent Arf computation from a hyperbolic decomposition."""
    pairs, tail = hyperbolic_basis(space)
    total = 0
    for e, f in pairs:
        total ^= space.q(e) & space.q(f)
    if tail:
        a, b = tail
        total ^= space.q(a) & space.q(b)
    return total


def hyperbolic_basis(space: F2QuadSpace):
    """Decompose into hyperbolic pairs (q = 0 on both members) plus an
    optional 2-dimensional anisotropic tail; returns (pairs, tail)."""
    if space.dim % 2 or not space.is_nondegenerate():
        raise LatticeError("decomposition needs a nondegenerate even-dimensional space")
    members: list[int] = []  # current orthogonal-complement basis
    basis = [1 << i for i in range(space.dim)]
    pairs: list[tuple[int, int]] = []

    def in_span(v, vecs):
        rows = list(vecs)
        for row in rows:
            low = row & -row
            if v & low:
                v ^= row
        return v == 0

    def reduce_against(v, chosen):
        # Project v into the b-orthogonal complement of the chosen pairs.
        for e, f in chosen:
            if space.b(v, f):
                v ^= e
            if space.b(v, e):
                v ^= f
        return v

    remaining = basis
    while True:
        cand = []
        for x in range(1, 1 << space.dim):
            v = reduce_against(x, pairs)
            if v and space.q(v) == 0:
                cand.append(v)
                break
        if not cand:
            break
        e = cand[0]
        f = None
        for x in range(1, 1 << space.dim):
            v = reduce_against(x, pairs)
            if v and space.b(e, v) == 1:
                f = v
                break
        if f is None:
            raise LatticeError("isotropic vector with no partner (degenerate)")
        if space.q(f):
            f ^= e
        pairs.append((e, f))
        if 2 * len(pairs) == space.dim:
            return pairs, None
    # No isotropic vector remains: the complement is 2-dim anisotropic.
    if 2 * len(pairs) + 2 != space.dim:
        raise LatticeError("unexpected anisotropic part")
    rest = []
    for x in range(1, 1 << space.dim):
        v = reduce_against(x, pairs)
        if v and not in_span(v, _echelon(rest)):
            rest.append(v)
        if len(rest) == 2:
            break
    return pairs, tuple(rest)


def _echelon(vectors):
    """Canonical reduced row echelon basis of the span (sorted by pivot)."""
    pivots: dict[int, int] = {}
    for v in vectors:
        while v:
            low = v & -v
            if low in pivots:
                v ^= pivots[low]
            else:
                pivots[low] = v
                break
    for low in sorted(pivots, reverse=True):
        src = pivots[low]
        for other_low in pivots:
            if other_low != low and pivots[other_low] & low:
                pivots[other_low] ^= src
    return [pivots[low] for low in sorted(pivots)]


def witt_index(space: F2QuadSpace) -> int:
    pairs, _ = hyperbolic_basis(space)
    return len(pairs)


# -- Witt extension ----------------------------------------------------------------


def witt_extend(space: F2QuadSpace, pairs: list[tuple[int, int]]) -> Isometry:
    """Extend a partial isometry (src_i -> dst_i) to the whole space.

    The partial map must be injective and preserve q and b.  Full-rank
    frames determine the map linearly; proper subspaces are extended
    greedily, correcting with transvections that stabilize the already
    matched targets.  The result is verified to preserve q on all of the
    space and to map each source to its target; failure raises
    VerificationFailure (it would contradict the Witt extension theorem).
    """
    srcs = [s for s, _ in pairs]
    dsts = [d for _, d in pairs]
    if _rank(srcs) != len(srcs) or _rank(dsts) != len(dsts):
        raise LatticeError("partial isometry must have independent sources and targets")
    for i, (s, d) in enumerate(pairs):
        if space.q(s) != space.q(d):
            raise LatticeError("partial map does not preserve q")
        for s2, d2 in pairs[:i]:
            if space.b(s, s2) != space.b(d, d2):
                raise LatticeError("partial map does not preserve b")
    if len(pairs) == space.dim:
        g = _linear_extension(space, srcs, dsts)
    else:
        g = space.identity()
        fixed: list[int] = []
        for s, y in pairs:
            x = space.apply(g, s)
            if x != y:
                g = space.compose(g, _carry(space, x, y, fixed))
            fixed.append(y)
    for s, d in pairs:
        if space.apply(g, s) != d:
            raise VerificationFailure("extension does not restrict to the partial map")
    if not space.preserves_q(g):
        raise VerificationFailure("extension does not preserve the quadratic form")
    return g


def _linear_extension(space: F2QuadSpace, srcs: list[int], dsts: list[int]) -> Isometry:
    """The unique linear map sending a full basis src_i to dst_i."""
    n = space.dim
    # Row-reduce [srcs | dsts] so that the src half becomes the identity;
    # the dst half is then the matrix of the map on the standard basis.
    rows = [(s << n) | d for s, d in zip(srcs, dsts)]
    for col in range(n):
        piv = next((k for k in range(col, n) if (rows[k] >> (n + col)) & 1), None)
        if piv is None:
            raise LatticeError("sources are not a basis")
        rows[col], rows[piv] = rows[piv], rows[col]
        for k in range(n):
            if k != col and (rows[k] >> (n + col)) & 1:
                rows[k] ^= rows[col]
    mask = (1 << n) - 1
    return tuple(row & mask for row in rows)


def _carry(space: F2QuadSpace, x: int, y: int, fixed: list[int]) -> Isometry:
    """Isometry moving x to y while fixing the given vectors pointwise.

    Breadth-first search over transvections in q = 1 vectors orthogonal to
    every fixed vector; such transvections stabilize the fixed set, and
    the path found composes to the required correction.
    """
    arr = np.arange(1 << space.dim, dtype=np.uint64)
    keep = space.q_table == 1
    for w in fixed:
        keep &= space.b_batch(arr, w) == 0
    moves = arr[keep]
    if moves.size == 0:
        raise LatticeError("no transvection path exists (space too degenerate)")
    parent: dict[int, tuple[int, int]] = {x: (0, 0)}
    frontier = [x]
    while frontier and y not in parent:
        nxt = []
        for cur in frontier:
            active = moves[space.b_batch(moves, cur) == 1]
            for img, v in zip((np.uint64(cur) ^ active).tolist(), active.tolist()):
                if img not in parent:
                    parent[img] = (cur, v)
                    nxt.append(img)
        frontier = nxt
    if y not in parent:
        raise LatticeError("no transvection path exists (space too degenerate)")
    word = []
    cur = y
    while cur != x:
        cur, v = parent[cur]
        word.append(v)
    g = space.identity()
    for v in reversed(word):
        g = space.compose(g, space.transvection(v))
    return g


def carry_subspace(space: F2QuadSpace, src_basis: list[int], dst_basis: list[int]) -> Isometry:
    """Isometry carrying one totally isotropic subspace onto another.

    Any linear correspondence of bases of totally isotropic subspaces is a
    partial isometry, so Witt extension applies directly.  The image span
    is verified to equal the target span.
    """
    g = witt_extend(space, list(zip(src_basis, dst_basis)))
    image = _echelon([space.apply(g, v) for v in src_basis])
    target = _echelon(dst_basis)
    if image != target:
        raise VerificationFailure("extension does not carry the subspace onto the target")
    return g


def _rank(vectors) -> int:
    return len(_echelon(list(vectors)))


# -- orthogonal group --------------------------------------------------------------


def orthogonal_group_order(dim: int, type_: str) -> int:
    """|O^eps(dim, F2)| for nondegenerate quadratic forms, dim even."""
    if dim % 2:
        raise LatticeError("order formula needs even dimension")
    m = dim // 2
    eps = 1 if type_ == "plus" else -1
    order = 2 * (2 ** (m * (m - 1))) * (2**m - eps)
    for i in range(1, m):
        order *= 4**i - 1
    return order


def orthogonal_generators(space: F2QuadSpace) -> list[Isometry]:
    """Generating set of the full orthogonal group, certified by matching
    the closed-form order.  Transvections are added in ascending vector
    order until the stabilizer-chain order reaches the target; hyperbolic
    plane swaps are appended if transvections alone fall short."""
    if not space.is_nondegenerate():
        raise LatticeError("generators need a nondegenerate space")
    target = orthogonal_group_order(space.dim, witt_type(space))
    chain = StabChain(1 << space.dim)
    gens: list[Isometry] = []
    candidates = (v for v in range(1, 1 << space.dim) if space.q(v) == 1)
    for v in candidates:
        if chain.order() >= target:
            break
        g = space.transvection(v)
        before = chain.order()
        chain.add_generator(space.perm_of(g))
        if chain.order() > before:
            gens.append(g)
    if chain.order() < target:
        for g in _plane_swaps(space):
            before = chain.order()
            chain.add_generator(space.perm_of(g))
            if chain.order() > before:
                gens.append(g)
            if chain.order() >= target:
                break
    achieved = chain.order()
    if achieved != target:
        raise VerificationFailure(
            f"generator escalation reached order {achieved}, formula gives {target}"
        )
    return gens


def _plane_swaps(space: F2QuadSpace):
    pairs, _ = hyperbolic_basis(space)
    for i in range(len(pairs) - 1):
        e1, f1 = pairs[i]
        e2, f2 = pairs[i + 1]
        mapping = {e1: e2, e2: e1, f1: f2, f2: f1}
        basis_pairs = []
        for e, f in pairs:
            basis_pairs.append((e, mapping.get(e, e)))
            basis_pairs.append((f, mapping.get(f, f)))
        yield witt_extend(space, basis_pairs)


def group_order(space: F2QuadSpace, gens: list[Isometry]) -> int:
    """Exact order of the group generated by the given isometries,
    via a deterministic stabilizer chain on the 2^dim point action."""
    chain = StabChain(1 << space.dim)
    for g in gens:
        if not space.is_isometry(g):
            raise LatticeError("generator is not an isometry of the space")
        chain.add_generator(space.perm_of(g))
    return chain.order()


def brute_force_order(space: F2QuadSpace) -> int:
    """|O(q)| by filtering all invertible matrices; dims <= 4 only."""
    if space.dim > 4:
        raise LatticeError("brute force is limited to dimension 4")
    n = space.dim
    count = 0
    identity = space.identity()
    for rows in itertools.product(range(1, 1 << n), repeat=n):
        if _rank(rows) != n:
            continue
        if space.is_isometry(tuple(rows)):
            count += 1
    return count


# -- induced actions ---------------------------------------------------------------


def induced_isometry(disc: DiscriminantForm, space: F2QuadSpace, matrix: Matrix) -> Isometry:
    """Action of an ambient lattice isometry on the F2 discriminant space."""
    rows = []
    for i in range(disc.ndim):
        gi = tuple(1 if k == i else 0 for k in range(disc.ndim))
        rep = disc.rep(gi)
        image = tuple(
            sum(rep[k] * matrix[k, j] for k in range(len(rep)))
            for j in range(matrix.ncols)
        )
        coords = disc.coords(image)
        rows.append(sum((c % 2) << k for k, c in enumerate(coords)))
    g = tuple(rows)
    if not space.is_isometry(g):
        raise VerificationFailure("induced map is not an isometry of the discriminant space")
    return g


def induced_image_order(lat: Lattice, generators: list[Matrix], stop_at: int | None = None) -> int:
    """Order of the subgroup of O(disc lattice space) induced by the given
    lattice isometries (each must preserve the lattice).

    stop_at short-circuits once that order is reached; since the induced
    image is contained in the full orthogonal group, passing its order is
    sound when that is the comparison target.
    """
    from .isometry import preserves_lattice

    disc = DiscriminantForm(lat)
    space = from_disc_form(disc)
    chain = StabChain(1 << space.dim)
    seen: set[Isometry] = set()
    for m in generators:
        if not preserves_lattice(lat, m):
            raise LatticeError("generator does not preserve the lattice")
        g = induced_isometry(disc, space, m)
        if g in seen:
            continue
        seen.add(g)
        chain.add_generator(space.perm_of(g))
        if stop_at is not None and chain.order() >= stop_at:
            break
    return chain.order()
