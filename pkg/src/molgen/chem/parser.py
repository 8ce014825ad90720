"""SMILES parser: token stream to a validated molecular graph.

Parsing runs in stages: graph construction, ring perception, aromatic-bond
resolution, Hueckel validation of aromatic atoms, kekulization, implicit
hydrogen assignment with valence checking, and finally promotion of
Kekule-written rings that qualify as aromatic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .tokens import (
    ORGANIC_SUBSET,
    AtomSpec,
    LexError,
    SmilesError,
    Token,
    tokenize_smiles,
)

log = logging.getLogger(__name__)

SINGLE, DOUBLE, TRIPLE, AROMATIC = 1, 2, 3, 4
# implicit bond between two aromatic-marked atoms; resolved during perception
IMPLICIT_AROMATIC = 5

# Allowed valences for bare (organic-subset) atoms. A formal charge of q
# shifts every allowed valence by +q.
VALENCE_TABLE: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

MAX_CHARGE = 4


class ParseError(SmilesError):
    pass


class UnmatchedRingClosure(ParseError):
    pass


class UnmatchedParenthesis(ParseError):
    pass


class ValenceViolation(ParseError):
    def __init__(self, message: str, atom_index: int, valence: int):
        super().__init__(f"{message} (atom {atom_index}, valence {valence})")
        self.atom_index = atom_index
        self.valence = valence


class AromaticityError(ParseError):
    pass


@dataclass
class Atom:
    element: str
    formal_charge: int = 0
    h_count: int = 0
    aromatic: bool = False
    bracket: bool = False
    isotope: int | None = None
    rings: set[int] = field(default_factory=set)

    def copy(self) -> "Atom":
        return Atom(
            self.element,
            self.formal_charge,
            self.h_count,
            self.aromatic,
            self.bracket,
            self.isotope,
            set(self.rings),
        )


@dataclass(eq=False)
class Bond:
    a: int
    b: int
    order: int  # SINGLE/DOUBLE/TRIPLE/AROMATIC
    kek_order: int = 0  # 1 or 2 for aromatic bonds after kekulization

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a

    @property
    def valence_order(self) -> int:
        return self.kek_order if self.order == AROMATIC else self.order


class Molecule:
    """Parsed molecular graph. Built by parse_smiles; treat as immutable."""

    def __init__(self, atoms: list[Atom], bonds: list[Bond], source: str):
        self.atoms = atoms
        self.bonds = bonds
        self.source = source
        self.rings: list[tuple[int, ...]] = []
        self._adj: list[list[int]] = [[] for _ in atoms]
        for bi, bond in enumerate(bonds):
            self._adj[bond.a].append(bi)
            self._adj[bond.b].append(bi)

    def bonds_of(self, idx: int) -> list[Bond]:
        return [self.bonds[bi] for bi in self._adj[idx]]

    def neighbors(self, idx: int) -> list[int]:
        return [self.bonds[bi].other(idx) for bi in self._adj[idx]]

    def bond_between(self, a: int, b: int) -> Bond | None:
        for bi in self._adj[a]:
            if self.bonds[bi].other(a) == b:
                return self.bonds[bi]
        return None

    def degree(self, idx: int) -> int:
        return len(self._adj[idx])

    def heavy_valence(self, idx: int) -> int:
        """Sum of bond orders to heavy neighbors, using kekulized orders."""
        return sum(b.valence_order for b in self.bonds_of(idx))

    def total_valence(self, idx: int) -> int:
        return self.heavy_valence(idx) + self.atoms[idx].h_count

    def __len__(self) -> int:
        return len(self.atoms)


def _build_graph(tokens: list[Token], text: str) -> tuple[list[Atom], list[Bond]]:
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_keys: set[tuple[int, int]] = set()
    prev: int | None = None
    pending_bond: int | None = None
    pending_pos = 0
    branch_stack: list[int | None] = []
    open_rings: dict[int, tuple[int, int | None, int]] = {}  # id -> (atom, order, pos)

    def add_bond(a: int, b: int, order: int, pos: int) -> None:
        if a == b:
            raise ParseError("ring closure bonds an atom to itself", pos)
        key = (min(a, b), max(a, b))
        if key in bond_keys:
            raise ParseError("duplicate bond between the same atom pair", pos)
        bond_keys.add(key)
        bonds.append(Bond(a, b, order))

    def make_atom(spec: AtomSpec) -> Atom:
        if abs(spec.charge) > MAX_CHARGE:
            raise ParseError(f"formal charge {spec.charge} out of range")
        for w in spec.warnings:
            log.warning("%s in %r", w, text)
        return Atom(
            element=spec.element,
            formal_charge=spec.charge,
            h_count=spec.h_count or 0,
            aromatic=spec.aromatic,
            bracket=spec.bracket,
            isotope=spec.isotope,
        )

    for tok in tokens:
        if tok.kind == "atom":
            atoms.append(make_atom(tok.atom))
            idx = len(atoms) - 1
            if prev is not None:
                if pending_bond is not None:
                    order = pending_bond
                elif atoms[prev].aromatic and atoms[idx].aromatic:
                    order = IMPLICIT_AROMATIC
                else:
                    order = SINGLE
                add_bond(prev, idx, order, tok.pos)
            prev = idx
            pending_bond = None
        elif tok.kind == "bond":
            if prev is None:
                raise ParseError("bond symbol with no preceding atom", tok.pos)
            if pending_bond is not None:
                raise ParseError("two consecutive bond symbols", tok.pos)
            if tok.stereo:
                log.warning("stereo bond %r treated as single in %r", tok.lexeme, text)
            pending_bond = AROMATIC if tok.order == 4 else tok.order
            pending_pos = tok.pos
        elif tok.kind == "ring":
            if prev is None:
                raise ParseError("ring closure with no preceding atom", tok.pos)
            rid = tok.ring_id
            if rid in open_rings:
                other, open_order, open_pos = open_rings.pop(rid)
                if pending_bond is not None and open_order is not None and pending_bond != open_order:
                    raise ParseError("conflicting bond orders on ring closure", tok.pos)
                order = pending_bond if pending_bond is not None else open_order
                if order is None:
                    if atoms[prev].aromatic and atoms[other].aromatic:
                        order = IMPLICIT_AROMATIC
                    else:
                        order = SINGLE
                add_bond(prev, other, order, tok.pos)
            else:
                open_rings[rid] = (prev, pending_bond, tok.pos)
            pending_bond = None
        elif tok.kind == "open":
            if prev is None:
                raise ParseError("branch opened before any atom", tok.pos)
            branch_stack.append(prev)
        elif tok.kind == "close":
            if not branch_stack:
                raise UnmatchedParenthesis("unmatched ')'", tok.pos)
            if pending_bond is not None:
                raise ParseError("dangling bond before ')'", tok.pos)
            prev = branch_stack.pop()
        elif tok.kind == "dot":
            if pending_bond is not None:
                raise ParseError("bond symbol before '.'", tok.pos)
            if branch_stack:
                raise ParseError("'.' inside a branch", tok.pos)
            prev = None

    if branch_stack:
        raise UnmatchedParenthesis("unclosed '('", len(text))
    if open_rings:
        rid, (_, _, pos) = next(iter(open_rings.items()))
        raise UnmatchedRingClosure(f"ring closure {rid} never closed", pos)
    if pending_bond is not None:
        raise ParseError("dangling bond at end of input", pending_pos)
    if not atoms:
        raise ParseError("no atoms in SMILES", 0)
    return atoms, bonds


def _find_sssr(mol: Molecule) -> list[tuple[int, ...]]:
    """Smallest set of smallest rings via per-edge shortest cycles plus a
    GF(2) independence filter over the cycle space."""
    n_atoms = len(mol.atoms)
    n_bonds = len(mol.bonds)
    # number of independent cycles
    seen = [False] * n_atoms
    components = 0
    for start in range(n_atoms):
        if seen[start]:
            continue
        components += 1
        queue = [start]
        seen[start] = True
        while queue:
            a = queue.pop()
            for nb in mol.neighbors(a):
                if not seen[nb]:
                    seen[nb] = True
                    queue.append(nb)
    cycle_rank = n_bonds - n_atoms + components
    if cycle_rank == 0:
        return []

    candidates: dict[frozenset[int], tuple[int, ...]] = {}
    for bi, bond in enumerate(mol.bonds):
        # shortest path from a to b avoiding this bond
        a, b = bond.a, bond.b
        prev_atom = {a: -1}
        frontier = [a]
        found = False
        while frontier and not found:
            nxt = []
            for u in frontier:
                for bj in mol._adj[u]:
                    if bj == bi:
                        continue
                    v = mol.bonds[bj].other(u)
                    if v not in prev_atom:
                        prev_atom[v] = u
                        if v == b:
                            found = True
                            break
                        nxt.append(v)
                if found:
                    break
            frontier = nxt
        if not found:
            continue
        path = [b]
        while path[-1] != a:
            path.append(prev_atom[path[-1]])
        ring = tuple(path)
        candidates.setdefault(frozenset(ring), ring)

    # greedy smallest-first selection of an independent basis (GF2 over bonds)
    def edge_vector(ring: tuple[int, ...]) -> int:
        vec = 0
        k = len(ring)
        for i in range(k):
            bond = mol.bond_between(ring[i], ring[(i + 1) % k])
            vec |= 1 << mol.bonds.index(bond)
        return vec

    basis: list[int] = []
    rings: list[tuple[int, ...]] = []
    for key in sorted(candidates, key=lambda fs: (len(fs), sorted(fs))):
        ring = candidates[key]
        vec = edge_vector(ring)
        reduced = vec
        for bvec in basis:
            reduced = min(reduced, reduced ^ bvec)
        if reduced:
            basis.append(reduced)
            rings.append(ring)
        if len(rings) == cycle_rank:
            break
    return rings


def _pi_contribution(mol: Molecule, idx: int) -> int | None:
    """Pi electrons an aromatic-marked atom donates to its ring, or None if
    the atom cannot sit on an aromatic ring."""
    atom = mol.atoms[idx]
    el = atom.element
    charge = atom.formal_charge
    conn = mol.degree(idx) + atom.h_count
    has_exo_double = any(
        b.order == DOUBLE for b in mol.bonds_of(idx)
    )
    if has_exo_double:
        # exocyclic double bond (e.g. ring C=O): sp2 but no ring pi electrons
        return 0
    if el == "C":
        if charge == 0:
            return 1
        if charge == -1:
            return 2
        if charge == 1:
            return 0
        return None
    if el in ("N", "P", "As"):
        if charge == 0:
            return 2 if (atom.h_count > 0 or conn == 3) else 1
        if charge == 1:
            return 1 if conn == 3 else None
        if charge == -1:
            return 2
        return None
    if el in ("O", "S", "Se"):
        if charge == 0:
            return 2
        if charge == 1:
            return 1
        return None
    if el == "B":
        return 0
    return None


def _needs_double(mol: Molecule, idx: int) -> bool:
    """Whether a kekulized form must give this aromatic atom one double bond."""
    pi = _pi_contribution(mol, idx)
    if any(b.order == DOUBLE for b in mol.bonds_of(idx)):
        return False  # double bond already present (exocyclic)
    return pi == 1


def _kekulize(mol: Molecule) -> None:
    """Assign kek_order 1/2 to aromatic bonds via matching of atoms that
    need a double bond. Raises AromaticityError when impossible."""
    arom_bonds = [b for b in mol.bonds if b.order == AROMATIC]
    if not arom_bonds:
        return
    need = {
        idx
        for idx in range(len(mol.atoms))
        if mol.atoms[idx].aromatic and _needs_double(mol, idx)
    }
    for b in arom_bonds:
        b.kek_order = 1
    # adjacency restricted to aromatic bonds between two needy atoms
    adj: dict[int, list[Bond]] = {a: [] for a in need}
    for b in arom_bonds:
        if b.a in need and b.b in need:
            adj[b.a].append(b)
            adj[b.b].append(b)

    matched: dict[int, Bond] = {}

    def try_augment(u: int, visited: set[int]) -> bool:
        for bond in adj[u]:
            v = bond.other(u)
            if v in visited:
                continue
            visited.add(v)
            if v not in matched or try_augment(matched[v].other(v), visited):
                matched[u] = bond
                matched[v] = bond
                return True
        return False

    for u in sorted(need):
        if u in matched:
            continue
        if not try_augment(u, {u}):
            raise AromaticityError(
                f"cannot kekulize aromatic system around atom {u}"
            )
    for bond in {id(b): b for b in matched.values()}.values():
        bond.kek_order = 2


def _perceive_and_validate(mol: Molecule) -> None:
    """Run perception: resolve implicit aromatic bonds, validate marked
    aromatic atoms (Hueckel), kekulize, assign hydrogens, check valences,
    then promote Kekule-written aromatic rings."""
    mol.rings = _find_sssr(mol)
    for rid, ring in enumerate(mol.rings):
        for a in ring:
            mol.atoms[a].rings.add(rid)

    ring_bond_ids: list[set[int]] = []
    for ring in mol.rings:
        ids = set()
        k = len(ring)
        for i in range(k):
            bond = mol.bond_between(ring[i], ring[(i + 1) % k])
            ids.add(id(bond))
        ring_bond_ids.append(ids)

    # resolve implicit aromatic bonds: aromatic when inside a ring whose
    # atoms are all aromatic-marked, single otherwise (e.g. biphenyl link)
    all_marked_rings = [
        ri
        for ri, ring in enumerate(mol.rings)
        if all(mol.atoms[a].aromatic for a in ring)
    ]
    marked_ring_bonds: set[int] = set()
    for ri in all_marked_rings:
        marked_ring_bonds |= ring_bond_ids[ri]
    for bond in mol.bonds:
        if bond.order == IMPLICIT_AROMATIC:
            bond.order = AROMATIC if id(bond) in marked_ring_bonds else SINGLE

    # Hueckel check on rings of aromatic-marked atoms
    aromatic_rings: set[int] = set()
    for ri in all_marked_rings:
        ring = mol.rings[ri]
        total = 0
        ok = True
        for a in ring:
            pi = _pi_contribution(mol, a)
            if pi is None:
                ok = False
                break
            total += pi
        if ok and total >= 2 and (total - 2) % 4 == 0:
            aromatic_rings.add(ri)

    for idx, atom in enumerate(mol.atoms):
        if atom.aromatic and not (atom.rings & aromatic_rings):
            raise AromaticityError(
                f"atom {idx} marked aromatic but lies on no aromatic ring"
            )
    aromatic_bond_ids: set[int] = set()
    for ri in aromatic_rings:
        aromatic_bond_ids |= ring_bond_ids[ri]
    for bond in mol.bonds:
        if bond.order == AROMATIC and id(bond) not in aromatic_bond_ids:
            raise AromaticityError(
                f"aromatic bond {bond.a}-{bond.b} outside any aromatic ring"
            )

    _kekulize(mol)
    _assign_hydrogens(mol)
    _aromatize_kekule_rings(mol, aromatic_rings, ring_bond_ids)


def allowed_valences(element: str, charge: int) -> tuple[int, ...] | None:
    base = VALENCE_TABLE.get(element)
    if base is None:
        return None
    vals = tuple(v + charge for v in base)
    return tuple(v for v in vals if v >= 0) or None


def _assign_hydrogens(mol: Molecule) -> None:
    for idx, atom in enumerate(mol.atoms):
        heavy = mol.heavy_valence(idx)
        allowed = allowed_valences(atom.element, atom.formal_charge)
        if atom.bracket:
            total = heavy + atom.h_count
            if allowed is not None and total not in allowed and total < max(allowed):
                # under-filled bracket atoms are taken literally (radicals
                # et al. are out of scope, but they parse)
                continue
            if allowed is not None and total > max(allowed):
                raise ValenceViolation(
                    f"{atom.element} exceeds allowed valence", idx, total
                )
            continue
        if allowed is None:
            raise ParseError(f"element {atom.element} not allowed bare")
        fits = [v for v in allowed if v >= heavy]
        if not fits:
            raise ValenceViolation(
                f"{atom.element} exceeds allowed valence", idx, heavy
            )
        atom.h_count = fits[0] - heavy


def _sp2_ring_analysis(mol: Molecule, ring: tuple[int, ...]) -> int | None:
    """Pi-electron count of a Kekule-written ring, or None if any member is
    not sp2-capable."""
    ring_set = set(ring)
    total = 0
    for a in ring:
        atom = mol.atoms[a]
        doubles = [b for b in mol.bonds_of(a) if b.valence_order == DOUBLE]
        triples = [b for b in mol.bonds_of(a) if b.valence_order == TRIPLE]
        if triples or len(doubles) > 1:
            return None
        if len(doubles) == 1:
            other_in_ring = doubles[0].other(a) in ring_set
            if other_in_ring:
                total += 1
            else:
                total += 0  # exocyclic double: sp2, no ring pi electrons
            continue
        # saturated member: must donate a lone pair to stay conjugated
        el, q = atom.element, atom.formal_charge
        if el in ("N", "P") and q == 0:
            total += 2
        elif el in ("O", "S") and q == 0 and mol.degree(a) == 2:
            total += 2
        elif el == "C" and q == -1:
            total += 2
        elif el == "B" and q == 0:
            total += 0
        else:
            return None
    return total


def _aromatize_kekule_rings(
    mol: Molecule,
    aromatic_rings: set[int],
    ring_bond_ids: list[set[int]],
) -> None:
    """Promote rings written in Kekule form to aromatic when they satisfy
    the same sp2 + Hueckel conditions. H counts are already fixed."""
    promote: list[int] = []
    for ri, ring in enumerate(mol.rings):
        if ri in aromatic_rings:
            continue
        if any(mol.atoms[a].aromatic for a in ring):
            continue
        total = _sp2_ring_analysis(mol, ring)
        if total is not None and total >= 2 and (total - 2) % 4 == 0:
            promote.append(ri)
    promoted_bonds: set[int] = set()
    for ri in promote:
        for a in mol.rings[ri]:
            mol.atoms[a].aromatic = True
        promoted_bonds |= ring_bond_ids[ri]
        aromatic_rings.add(ri)
    for bond in mol.bonds:
        if id(bond) in promoted_bonds and bond.order in (SINGLE, DOUBLE):
            bond.kek_order = bond.order
            bond.order = AROMATIC


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a validated Molecule.

    Raises LexError, UnmatchedRingClosure, UnmatchedParenthesis,
    ValenceViolation or AromaticityError on invalid input.
    """
    tokens = tokenize_smiles(text)
    atoms, bonds = _build_graph(tokens, text)
    mol = Molecule(atoms, bonds, text)
    _perceive_and_validate(mol)
    return mol


def is_valid(text: str) -> bool:
    """True iff parse_smiles succeeds. Never raises."""
    if not isinstance(text, str) or not text:
        return False
    try:
        parse_smiles(text)
        return True
    except SmilesError:
        return False
    except RecursionError:  # pathological nesting depth
        return False
