"""SMILES lexing, parsing, validity and canonicalization."""

from .tokens import (
    LexError,
    SmilesError,
    Token,
    UnclosedBracketAtom,
    UnknownCharacter,
    tokenize_smiles,
)
from .parser import (
    AROMATIC,
    DOUBLE,
    SINGLE,
    TRIPLE,
    AromaticityError,
    Atom,
    Bond,
    Molecule,
    ParseError,
    UnmatchedParenthesis,
    UnmatchedRingClosure,
    ValenceViolation,
    is_valid,
    parse_smiles,
)
from .canonical import (
    canonical_ranks,
    canonical_smiles,
    canonicalize,
    randomized_smiles,
    write_smiles,
)

__all__ = [
    "AROMATIC",
    "AromaticityError",
    "Atom",
    "Bond",
    "DOUBLE",
    "LexError",
    "Molecule",
    "ParseError",
    "SINGLE",
    "SmilesError",
    "TRIPLE",
    "Token",
    "UnclosedBracketAtom",
    "UnknownCharacter",
    "UnmatchedParenthesis",
    "UnmatchedRingClosure",
    "ValenceViolation",
    "canonical_ranks",
    "canonical_smiles",
    "canonicalize",
    "is_valid",
    "parse_smiles",
    "randomized_smiles",
    "tokenize_smiles",
    "write_smiles",
]
