"""Label and relation canonicalization, and stable 64-bit keys.

Node ids are FNV-1a/64 hashes of canonical labels; edge ids hash the string
``"<src_id>|<REL_TYPE>|<dst_id>"`` with ids rendered in base 10.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CanonError, HashCollision

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x00000100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class RelType(str, enum.Enum):
    CAUSES = "CAUSES"
    INFLUENCES = "INFLUENCES"
    INCREASES = "INCREASES"
    REDUCES = "REDUCES"
    AFFECTS = "AFFECTS"
    LEADS_TO = "LEADS_TO"

    def __str__(self) -> str:
        return self.value


class Polarity(str, enum.Enum):
    INC = "inc"
    DEC = "dec"
    UNK = "unk"

    def __str__(self) -> str:
        return self.value


# hyphen, non-breaking hyphen, figure dash, en dash, em dash, horizontal bar,
# minus sign, small em dash, small hyphen-minus, fullwidth hyphen-minus
_DASHES = "\u2010\u2011\u2012\u2013\u2014\u2015\u2212\ufe58\ufe63\uff0d"
_DASH_TABLE = str.maketrans({c: "-" for c in _DASHES})
_TRAILING = ".,;:!"


def canon_label(raw: str) -> str:
    """Canonical form of a node label.

    NFC, lowercase, unify dashes to ``-``, collapse whitespace runs, strip, then
    drop trailing sentence punctuation. Raises :class:`CanonError` when nothing
    is left.

    >>> canon_label("long–distance   travel.")
    'long-distance travel'
    """
    s = unicodedata.normalize("NFC", raw).lower()
    s = s.translate(_DASH_TABLE)
    s = " ".join(s.split())
    s = s.rstrip(_TRAILING + " ")
    # lower() can emit decomposed sequences; renormalize so the result is a fixed point
    s = unicodedata.normalize("NFC", s)
    if not s:
        raise CanonError(f"label {raw!r} is empty after canonicalization")
    return s


def hash64(key: str) -> int:
    """FNV-1a 64-bit hash of the UTF-8 bytes of ``key``."""
    h = FNV64_OFFSET
    for b in key.encode("utf-8"):
        h = ((h ^ b) * FNV64_PRIME) & _MASK64
    return h


def node_id(label_canon: str) -> int:
    return hash64(label_canon)


def edge_key_string(src: int, rel: RelType, dst: int) -> str:
    return f"{src}|{RelType(rel).value}|{dst}"


def edge_key(src: int, rel: RelType, dst: int) -> int:
    return hash64(edge_key_string(src, rel, dst))


# -- relation lexicon ---------------------------------------------------------

_I, _D, _U = Polarity.INC, Polarity.DEC, Polarity.UNK

DEFAULT_LEXICON: dict[str, tuple[RelType, Polarity]] = {
    "cause": (RelType.CAUSES, _U),
    "causes": (RelType.CAUSES, _U),
    "influence": (RelType.INFLUENCES, _U),
    "influences": (RelType.INFLUENCES, _U),
    "increase": (RelType.INCREASES, _I),
    "increases": (RelType.INCREASES, _I),
    "raise": (RelType.INCREASES, _I),
    "raises": (RelType.INCREASES, _I),
    "boost": (RelType.INCREASES, _I),
    "boosts": (RelType.INCREASES, _I),
    "reduce": (RelType.REDUCES, _D),
    "reduces": (RelType.REDUCES, _D),
    "decrease": (RelType.REDUCES, _D),
    "decreases": (RelType.REDUCES, _D),
    "lower": (RelType.REDUCES, _D),
    "lowers": (RelType.REDUCES, _D),
    "affect": (RelType.AFFECTS, _U),
    "affects": (RelType.AFFECTS, _U),
    "lead to": (RelType.LEADS_TO, _U),
    "leads to": (RelType.LEADS_TO, _U),
    "led to": (RelType.LEADS_TO, _U),
    "result in": (RelType.LEADS_TO, _U),
    "results in": (RelType.LEADS_TO, _U),
}

_NEGATIONS = (("does", "not"), ("do", "not"), ("did", "not"), ("not",))
_CUES = {"positively": Polarity.INC, "negatively": Polarity.DEC}
_FLIP = {Polarity.INC: Polarity.DEC, Polarity.DEC: Polarity.INC}


@dataclass(frozen=True)
class RelLexicon:
    """Maps canonical relation phrases to ``(RelType, Polarity)``.

    Phrases missing from the table fall back to ``(INFLUENCES, unk)``. Before
    falling back, a leading negation (``not``, ``does not`` ...) and a
    ``positively``/``negatively`` modifier at either end are peeled off; the
    modifier sets the polarity and the negation flips inc and dec.
    """

    table: dict[str, tuple[RelType, Polarity]] = field(
        default_factory=lambda: dict(DEFAULT_LEXICON)
    )

    def classify(self, raw: str) -> tuple[RelType, Polarity]:
        try:
            phrase = canon_label(raw)
        except CanonError:
            return RelType.INFLUENCES, Polarity.UNK
        if phrase in self.table:
            return self.table[phrase]

        words = phrase.split(" ")
        negated = False
        for neg in _NEGATIONS:
            if tuple(words[: len(neg)]) == neg:
                negated, words = True, words[len(neg):]
                break
        cue = None
        if words and words[0] in _CUES:
            cue, words = _CUES[words[0]], words[1:]
        elif words and words[-1] in _CUES:
            cue, words = _CUES[words[-1]], words[:-1]

        rel, pol = self.table.get(" ".join(words), (RelType.INFLUENCES, Polarity.UNK))
        if cue is not None:
            pol = cue
        if negated:
            pol = _FLIP.get(pol, Polarity.UNK)
        return rel, pol

    @classmethod
    def from_file(cls, path: str | Path) -> RelLexicon:
        """Load a ``phrase,RELTYPE,polarity`` file; it replaces the built-in table.

        Blank lines and lines starting with ``#`` are ignored.
        """
        table: dict[str, tuple[RelType, Polarity]] = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.rsplit(",", 2)]
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected phrase,RELTYPE,polarity")
            phrase, rel, pol = parts
            try:
                table[canon_label(phrase)] = (RelType[rel.upper()], Polarity(pol.lower()))
            except (KeyError, ValueError, CanonError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
        return cls(table)


DEFAULT_REL_LEXICON = RelLexicon()


def rel_type(raw: str, lexicon: RelLexicon | None = None) -> tuple[RelType, Polarity]:
    return (lexicon or DEFAULT_REL_LEXICON).classify(raw)


class KeyRegistry:
    """Remembers which key produced each id and aborts on a collision."""

    def __init__(self) -> None:
        self._keys: dict[int, str] = {}

    def register(self, ident: int, key: str) -> int:
        seen = self._keys.setdefault(ident, key)
        if seen != key:
            raise HashCollision(f"id {ident} produced by both {seen!r} and {key!r}")
        return ident

    def __len__(self) -> int:
        return len(self._keys)
