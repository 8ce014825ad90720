"""Canonical SMILES emission.

Atom ranks come from iterative neighborhood refinement (Morgan-style) on
initial invariants, with deterministic tie-breaking. The writer walks the
graph in rank order; a randomizable walk order is exposed for tests.
"""

from __future__ import annotations

import random

from .parser import (
    AROMATIC,
    DOUBLE,
    SINGLE,
    TRIPLE,
    Bond,
    Molecule,
    allowed_valences,
    parse_smiles,
)
from .tokens import AROMATIC_ORGANIC, ORGANIC_SUBSET

_BOND_SYMBOL = {SINGLE: "", DOUBLE: "=", TRIPLE: "#", AROMATIC: ""}


def _dense(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    n = len(mol.atoms)
    while True:
        keys = []
        for i in range(n):
            nbr = sorted(
                (b.order, ranks[b.other(i)]) for b in mol.bonds_of(i)
            )
            keys.append((ranks[i], tuple(nbr)))
        new_ranks = _dense(keys)
        if len(set(new_ranks)) == len(set(ranks)):
            return new_ranks
        ranks = new_ranks


def canonical_ranks(mol: Molecule) -> list[int]:
    """Bijective atom ranking invariant to input atom order (for molecules
    whose refinement-stable ties are automorphic, which covers drug-like
    chemistry)."""
    n = len(mol.atoms)
    keys = [
        (
            a.element,
            a.formal_charge,
            mol.degree(i),
            a.h_count,
            a.aromatic,
            a.isotope or 0,
        )
        for i, a in enumerate(mol.atoms)
    ]
    ranks = _refine(mol, _dense(keys))
    while len(set(ranks)) < n:
        counts: dict[int, list[int]] = {}
        for i, r in enumerate(ranks):
            counts.setdefault(r, []).append(i)
        tie_rank = min(r for r, members in counts.items() if len(members) > 1)
        chosen = counts[tie_rank][0]
        ranks = [r * 2 for r in ranks]
        ranks[chosen] -= 1
        ranks = _refine(mol, _dense(ranks))
    return ranks


def _implied_bare_h(mol: Molecule, idx: int) -> int | None:
    """Hydrogen count a reader would assign if this atom were written bare,
    or None when a bare form cannot reproduce the atom."""
    atom = mol.atoms[idx]
    heavy = mol.heavy_valence(idx)
    if atom.aromatic:
        base = {"C": 4, "B": 3}.get(atom.element)
        if base is None:
            return 0  # bare aromatic n/o/s/p always read back with 0 H
        return max(base - heavy, 0)
    allowed = allowed_valences(atom.element, 0)
    if allowed is None:
        return None
    fits = [v for v in allowed if v >= heavy]
    if not fits:
        return None
    return fits[0] - heavy


def _atom_token(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    symbol = atom.element.lower() if atom.aromatic else atom.element
    bare_ok = (
        atom.element.lower() in AROMATIC_ORGANIC
        if atom.aromatic
        else atom.element in ORGANIC_SUBSET
    )
    if (
        bare_ok
        and atom.formal_charge == 0
        and atom.isotope is None
        and _implied_bare_h(mol, idx) == atom.h_count
    ):
        return symbol
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    if atom.h_count == 1:
        parts.append("H")
    elif atom.h_count > 1:
        parts.append(f"H{atom.h_count}")
    q = atom.formal_charge
    if q == 1:
        parts.append("+")
    elif q == -1:
        parts.append("-")
    elif q > 1:
        parts.append(f"+{q}")
    elif q < -1:
        parts.append(str(q))
    parts.append("]")
    return "".join(parts)


def _bond_token(mol: Molecule, bond: Bond) -> str:
    if bond.order == SINGLE and mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic:
        # explicit single between aromatic atoms inside a ring would read
        # back ambiguously; emit '-' whenever the bond sits on a ring
        if mol.atoms[bond.a].rings & mol.atoms[bond.b].rings:
            return "-"
    return _BOND_SYMBOL[bond.order]


class _RingDigits:
    def __init__(self) -> None:
        self._free = list(range(1, 100))
        self.open: dict[int, int] = {}  # id(bond) -> digit

    def acquire(self, bond_id: int) -> int:
        digit = self._free.pop(0)
        self.open[bond_id] = digit
        return digit

    def release(self, bond_id: int) -> int:
        digit = self.open.pop(bond_id)
        self._free.append(digit)
        self._free.sort()
        return digit


def _digit_str(digit: int) -> str:
    return str(digit) if digit < 10 else f"%{digit:02d}"


def write_smiles(
    mol: Molecule,
    ranks: list[int] | None = None,
    rng: random.Random | None = None,
) -> str:
    """Emit SMILES walking neighbors in rank order. With rng set, the walk
    order (and therefore the output form) is randomized; the described
    molecule is unchanged."""
    n = len(mol.atoms)
    if ranks is None:
        ranks = list(range(n))

    def nbr_order(i: int) -> list[Bond]:
        bonds = list(mol.bonds_of(i))
        if rng is not None:
            rng.shuffle(bonds)
        else:
            bonds.sort(key=lambda b: ranks[b.other(i)])
        return bonds

    visited = [False] * n
    fragments: list[str] = []

    for_root = list(range(n))
    if rng is not None:
        rng.shuffle(for_root)
    else:
        for_root.sort(key=lambda i: ranks[i])

    for root in for_root:
        if visited[root]:
            continue
        # phase 1: spanning tree + ring bonds, in deterministic scan order
        children: dict[int, list[Bond]] = {}
        ring_at: dict[int, list[Bond]] = {}
        seen_ring: set[int] = set()
        visited[root] = True
        work: list[tuple[int, list[Bond], Bond | None]] = [(root, nbr_order(root), None)]
        while work:
            u, bonds, _parent = work[-1]
            advanced = False
            while bonds:
                bond = bonds.pop(0)
                v = bond.other(u)
                if not visited[v]:
                    visited[v] = True
                    children.setdefault(u, []).append(bond)
                    work.append((v, nbr_order(v), bond))
                    advanced = True
                    break
                elif id(bond) not in seen_ring and all(bond is not w[2] for w in work):
                    seen_ring.add(id(bond))
                    ring_at.setdefault(bond.a, []).append(bond)
                    ring_at.setdefault(bond.b, []).append(bond)
            if not advanced and not bonds:
                work.pop()

        # phase 2: emission
        digits = _RingDigits()
        out: list[str] = []

        def emit(u: int) -> None:
            out.append(_atom_token(mol, u))
            for bond in ring_at.get(u, []):
                other = bond.other(u)
                if id(bond) in digits.open:
                    out.append(_bond_token(mol, bond))
                    out.append(_digit_str(digits.release(id(bond))))
                else:
                    out.append(_digit_str(digits.acquire(id(bond))))
            kids = children.get(u, [])
            for pos, bond in enumerate(kids):
                v = bond.other(u)
                last = pos == len(kids) - 1
                if not last:
                    out.append("(")
                out.append(_bond_token(mol, bond))
                emit(v)
                if not last:
                    out.append(")")

        emit(root)
        fragments.append("".join(out))

    if rng is None:
        fragments.sort()
    return ".".join(fragments)


def canonicalize(mol: Molecule) -> str:
    """Unique SMILES for the molecular graph, independent of input order."""
    return write_smiles(mol, canonical_ranks(mol))


def canonical_smiles(text: str) -> str:
    """Parse then canonicalize."""
    return canonicalize(parse_smiles(text))


def randomized_smiles(text: str, rng: random.Random) -> str:
    """An equivalent SMILES with randomized atom ordering (test helper)."""
    return write_smiles(parse_smiles(text), rng=rng)
