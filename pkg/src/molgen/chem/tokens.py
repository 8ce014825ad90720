"""Chemical-level SMILES tokenizer.

Splits a SMILES string into atom, bond, branch, ring-closure and dot tokens.
This is distinct from the model-side character codec: "Cl" is one token here
but two characters there.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SmilesError(ValueError):
    """Base class for all SMILES lexing/parsing failures."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class LexError(SmilesError):
    pass


class UnknownCharacter(LexError):
    pass


class UnclosedBracketAtom(LexError):
    pass


# Elements that may be written bare (outside brackets).
ORGANIC_SUBSET = ("B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I")
# Lowercase aromatic forms allowed bare.
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")
# Lowercase symbols allowed inside brackets.
AROMATIC_BRACKET = ("b", "c", "n", "o", "p", "s", "se", "as")

BOND_CHARS = {
    "-": 1,
    "=": 2,
    "#": 3,
    ":": 4,  # aromatic
    "/": 1,  # stereo single, direction discarded downstream
    "\\": 1,
}


@dataclass
class AtomSpec:
    """Atom content of one atom token, before graph construction."""

    element: str
    aromatic: bool = False
    bracket: bool = False
    isotope: int | None = None
    h_count: int | None = None  # None: implicit, to be computed
    charge: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass
class Token:
    kind: str  # atom | bond | ring | open | close | dot
    lexeme: str
    pos: int
    atom: AtomSpec | None = None
    order: int | None = None  # bond tokens
    ring_id: int | None = None  # ring tokens
    stereo: bool = False  # '/' or '\' bond


def _lex_bracket(text: str, start: int) -> tuple[Token, int]:
    """Lex a bracket atom starting at text[start] == '['."""
    i = start + 1
    n = len(text)

    def fail() -> UnclosedBracketAtom:
        return UnclosedBracketAtom("unterminated or malformed bracket atom", start)

    isotope = None
    j = i
    while j < n and text[j].isdigit():
        j += 1
    if j > i:
        isotope = int(text[i:j])
        i = j
    if i >= n:
        raise fail()

    # element symbol: one uppercase + optional lowercase, or a lowercase
    # aromatic symbol, or '*'
    aromatic = False
    if text[i] == "*":
        element = "*"
        i += 1
    elif text[i].isupper():
        element = text[i]
        i += 1
        if i < n and text[i].islower() and text[i] not in "h":
            # two-letter symbol; 'h' would be the H-count field
            element += text[i]
            i += 1
    elif text[i].islower():
        # aromatic symbol, possibly two letters (se, as)
        if text[i : i + 2] in AROMATIC_BRACKET:
            element = text[i : i + 2]
            i += 2
        elif text[i] in AROMATIC_BRACKET:
            element = text[i]
            i += 1
        else:
            raise fail()
        aromatic = True
        element = element.capitalize()
    else:
        raise fail()

    warnings = []
    # chirality: discarded with a warning
    if i < n and text[i] == "@":
        while i < n and text[i] == "@":
            i += 1
        if text[i : i + 2] in ("TH", "AL", "SP", "TB", "OH"):
            i += 2
            while i < n and text[i].isdigit():
                i += 1
        warnings.append("stereochemistry descriptor discarded")

    h_count = 0
    if i < n and text[i] == "H":
        i += 1
        j = i
        while j < n and text[j].isdigit():
            j += 1
        h_count = int(text[i:j]) if j > i else 1
        i = j

    charge = 0
    if i < n and text[i] in "+-":
        sign = 1 if text[i] == "+" else -1
        ch = text[i]
        i += 1
        if i < n and text[i].isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            charge = sign * int(text[i:j])
            i = j
        else:
            charge = sign
            while i < n and text[i] == ch:
                charge += sign
                i += 1

    if i < n and text[i] == ":":
        i += 1
        j = i
        while j < n and text[j].isdigit():
            j += 1
        if j == i:
            raise fail()
        warnings.append("atom-map class discarded")
        i = j

    if i >= n or text[i] != "]":
        raise fail()
    i += 1

    spec = AtomSpec(
        element=element,
        aromatic=aromatic,
        bracket=True,
        isotope=isotope,
        h_count=h_count,
        charge=charge,
        warnings=warnings,
    )
    return Token("atom", text[start:i], start, atom=spec), i


def tokenize_smiles(text: str) -> list[Token]:
    """Tokenize a SMILES string.

    The concatenation of the returned lexemes reproduces the input exactly.
    Raises UnknownCharacter or UnclosedBracketAtom on malformed input.
    """
    if not text:
        raise LexError("empty SMILES string", 0)
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            tok, i = _lex_bracket(text, i)
            tokens.append(tok)
        elif ch == "(":
            tokens.append(Token("open", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(Token("close", ch, i))
            i += 1
        elif ch == ".":
            tokens.append(Token("dot", ch, i))
            i += 1
        elif ch in BOND_CHARS:
            tokens.append(
                Token("bond", ch, i, order=BOND_CHARS[ch], stereo=ch in "/\\")
            )
            i += 1
        elif ch.isdigit():
            tokens.append(Token("ring", ch, i, ring_id=int(ch)))
            i += 1
        elif ch == "%":
            two = text[i + 1 : i + 3]
            if len(two) == 2 and two.isdigit():
                tokens.append(Token("ring", text[i : i + 3], i, ring_id=int(two)))
                i += 3
            else:
                raise UnknownCharacter("'%' must be followed by two digits", i)
        elif text[i : i + 2] in ("Cl", "Br"):
            spec = AtomSpec(element=text[i : i + 2])
            tokens.append(Token("atom", text[i : i + 2], i, atom=spec))
            i += 2
        elif ch in "BCNOPSFI":
            tokens.append(Token("atom", ch, i, atom=AtomSpec(element=ch)))
            i += 1
        elif ch in "bcnops":
            spec = AtomSpec(element=ch.upper(), aromatic=True)
            tokens.append(Token("atom", ch, i, atom=spec))
            i += 1
        else:
            raise UnknownCharacter(f"unexpected character {ch!r}", i)
    return tokens
