"""Deterministic Schreier-Sims stabilizer chain on a finite point set.

Permutations are numpy integer arrays ``p`` acting on the right:
``x -> p[x]``; composition ``compose(p, q)`` applies p first.  This
matches row-vector matrix conventions, so optional payloads (group
elements in another representation, e.g. ambient matrices) compose as
``pay_p @ pay_q`` and the chain doubles as a constructive factorization
engine: ``factor(p)`` returns a payload whose induced permutation is p.
"""

from __future__ import annotations

import numpy as np

from .errors import LatticeError


def compose(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return q[p]


def inverse(p: np.ndarray) -> np.ndarray:
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p), dtype=p.dtype)
    return inv


def is_identity(p: np.ndarray) -> bool:
    return bool((p == np.arange(len(p), dtype=p.dtype)).all())


class _Element:
    __slots__ = ("perm", "inv", "pay", "inv_pay")

    def __init__(self, perm, inv, pay, inv_pay):
        self.perm = perm
        self.inv = inv
        self.pay = pay
        self.inv_pay = inv_pay


class StabChain:
    """Stabilizer chain built by deterministic incremental Schreier-Sims."""

    def __init__(self, degree: int, payload_mul=None, payload_inv=None, payload_id=None):
        if degree > 1 << 20:
            raise LatticeError("permutation degree too large")
        self.degree = degree
        self._mul = payload_mul
        self._pinv = payload_inv
        self._pid = payload_id
        self._levels: list[dict] = []  # {base, gens: [_Element], transversal: {pt: _Element}}
        self._identity = np.arange(degree, dtype=np.int32)

    # -- payload plumbing ----------------------------------------------------

    def _wrap(self, perm: np.ndarray, pay) -> _Element:
        perm = np.asarray(perm, dtype=np.int32)
        inv = inverse(perm)
        if self._mul is None:
            return _Element(perm, inv, None, None)
        return _Element(perm, inv, pay, self._pinv(pay))

    def _compose(self, a: _Element, b: _Element) -> _Element:
        perm = compose(a.perm, b.perm)
        if self._mul is None:
            return _Element(perm, inverse(perm), None, None)
        pay = self._mul(a.pay, b.pay)
        return _Element(perm, inverse(perm), pay, self._mul(b.inv_pay, a.inv_pay))

    def _identity_element(self) -> _Element:
        return _Element(self._identity.copy(), self._identity.copy(), self._pid, self._pid)

    # -- construction ----------------------------------------------------------

    def add_generator(self, perm: np.ndarray, payload=None) -> None:
        el = self._wrap(perm, payload)
        if is_identity(el.perm):
            return
        self._add_at(0, el)

    def _add_at(self, i: int, el: _Element) -> None:
        # Sift down to the first level where the element acts.
        while True:
            if is_identity(el.perm):
                return
            if i == len(self._levels):
                base = int(np.nonzero(el.perm != self._identity)[0][0])
                self._levels.append(
                    {"base": base, "gens": [], "transversal": {base: self._identity_element()}}
                )
                break
            base = self._levels[i]["base"]
            t = int(el.perm[base])
            if t == base:
                i += 1
                continue
            trans = self._levels[i]["transversal"]
            if t not in trans:
                break
            u = trans[t]
            el = self._compose(el, _Element(u.inv, u.perm, u.inv_pay, u.pay))
            # el now fixes this base; continue sifting below.
            i += 1
        self._install(i, el)

    def _install(self, i: int, el: _Element) -> None:
        """Append a generator at level i and process new Schreier generators."""
        level = self._levels[i]
        old_points = sorted(level["transversal"])
        level["gens"].append(el)
        new_points = self._extend_orbit(level, old_points)
        schreier: list[tuple[int, _Element]] = [(p, el) for p in old_points]
        schreier += [(p, g) for p in new_points for g in level["gens"]]
        for point, gen in schreier:
            u = level["transversal"][point]
            s = self._compose(u, gen)
            target = int(s.perm[level["base"]])
            v = level["transversal"][target]
            residue = self._compose(s, _Element(v.inv, v.perm, v.inv_pay, v.pay))
            if not is_identity(residue.perm):
                self._add_at(i + 1, residue)

    def _extend_orbit(self, level: dict, old_points) -> list[int]:
        trans = level["transversal"]
        frontier = list(old_points)
        new_points: list[int] = []
        while frontier:
            point = frontier.pop(0)
            u = trans[point]
            for gen in level["gens"]:
                image = int(gen.perm[point])
                if image not in trans:
                    trans[image] = self._compose(u, gen)
                    new_points.append(image)
                    frontier.append(image)
        return new_points

    # -- queries -----------------------------------------------------------------

    def order(self) -> int:
        n = 1
        for level in self._levels:
            n *= len(level["transversal"])
        return n

    def contains(self, perm: np.ndarray) -> bool:
        el = self._wrap(perm, self._pid)
        for level in self._levels:
            if is_identity(el.perm):
                return True
            t = int(el.perm[level["base"]])
            if t not in level["transversal"]:
                return False
            u = level["transversal"][t]
            el = self._compose(el, _Element(u.inv, u.perm, u.inv_pay, u.pay))
        return is_identity(el.perm)

    def factor(self, perm: np.ndarray):
        """Payload of a group element given by its permutation.

        Raises LatticeError when the permutation is not in the group.
        The returned payload's induced permutation equals `perm` exactly.
        """
        if self._mul is None:
            raise LatticeError("chain was built without payloads")
        el = self._wrap(perm, self._pid)
        words: list[_Element] = []
        for level in self._levels:
            if is_identity(el.perm):
                break
            t = int(el.perm[level["base"]])
            if t not in level["transversal"]:
                raise LatticeError("permutation is not in the group")
            u = level["transversal"][t]
            words.append(u)
            el = self._compose(el, _Element(u.inv, u.perm, u.inv_pay, u.pay))
        if not is_identity(el.perm):
            raise LatticeError("permutation is not in the group")
        pay = self._pid
        for u in reversed(words):
            pay = self._mul(u.pay, pay)
        return pay
