"""Periodic-subset element data and the configurable valence table."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Element:
    """One entry of the periodic subset used for molecule construction."""

    symbol: str
    allowed_valences: tuple[int, ...]
    atomic_mass: float

    def __post_init__(self):
        if not self.allowed_valences:
            raise ValueError(f"element {self.symbol} has no allowed valences")
        if list(self.allowed_valences) != sorted(self.allowed_valences):
            raise ValueError(f"element {self.symbol}: valences must be ascending")


HYDROGEN_MASS = 1.008

# symbol -> (mass, valences). Charged variants live in _DEFAULT_CHARGED.
_DEFAULT_NEUTRAL = {
    "H": (1.008, (1,)),
    "B": (10.81, (3,)),
    "C": (12.011, (4,)),
    "N": (14.007, (3,)),
    "O": (15.999, (2,)),
    "F": (18.998, (1,)),
    "P": (30.974, (3, 5)),
    "S": (32.06, (2, 4, 6)),
    "Cl": (35.45, (1,)),
    "Br": (79.904, (1,)),
    "I": (126.904, (1,)),
}

# (symbol, charge) -> valences for charge states that change bonding capacity.
_DEFAULT_CHARGED = {
    ("N", 1): (4,),
    ("N", -1): (2,),
    ("O", 1): (3,),
    ("O", -1): (1,),
    ("C", 1): (3,),
    ("C", -1): (3,),
    ("S", -1): (1,),
    ("S", 1): (3, 5),
    ("P", 1): (4,),
}

MAX_ABS_CHARGE = 2


class ValenceTable:
    """Maps (element symbol, formal charge) to allowed valences and masses.

    Lookup order: an exact (symbol, charge) entry wins; otherwise the neutral
    entry for the symbol applies unchanged.
    """

    def __init__(
        self,
        elements: dict[str, Element],
        charged: dict[tuple[str, int], tuple[int, ...]] | None = None,
    ):
        self._elements = dict(elements)
        self._charged = dict(charged or {})

    @classmethod
    def default(cls) -> "ValenceTable":
        elements = {
            sym: Element(sym, vals, mass)
            for sym, (mass, vals) in _DEFAULT_NEUTRAL.items()
        }
        return cls(elements, dict(_DEFAULT_CHARGED))

    def knows(self, symbol: str) -> bool:
        return symbol in self._elements

    def element(self, symbol: str) -> Element:
        try:
            return self._elements[symbol]
        except KeyError:
            raise KeyError(f"unknown element {symbol!r}") from None

    def symbols(self) -> tuple[str, ...]:
        return tuple(sorted(self._elements))

    def mass(self, symbol: str) -> float:
        return self.element(symbol).atomic_mass

    def allowed_valences(self, symbol: str, charge: int = 0) -> tuple[int, ...]:
        if (symbol, charge) in self._charged:
            return self._charged[(symbol, charge)]
        return self.element(symbol).allowed_valences

    def max_valence(self, symbol: str, charge: int = 0) -> int:
        return max(self.allowed_valences(symbol, charge))

    def to_text(self) -> str:
        lines = ["# element  mass  valences", ""]
        for sym in sorted(self._elements):
            el = self._elements[sym]
            vals = ",".join(str(v) for v in el.allowed_valences)
            lines.append(f"{sym}  {el.atomic_mass}  {vals}")
        if self._charged:
            lines.append("")
            lines.append("# charged entries: symbol{+|-}n  valences")
            for (sym, chg) in sorted(self._charged):
                vals = ",".join(str(v) for v in self._charged[(sym, chg)])
                sign = "+" if chg > 0 else "-"
                lines.append(f"{sym}{sign}{abs(chg)}  {vals}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_file(cls, path: str | Path) -> "ValenceTable":
        """Parse a key-value valence table.

        Neutral lines: ``symbol mass v1,v2,...``.
        Charged lines: ``symbol{+|-}n v1,v2,...`` (mass comes from the
        neutral entry, which must appear first).
        """
        elements: dict[str, Element] = {}
        charged: dict[tuple[str, int], tuple[int, ...]] = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            key = parts[0]
            if "+" in key or "-" in key:
                sign = "+" if "+" in key else "-"
                sym, _, mag = key.partition(sign)
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'El{sign}n valences'")
                charge = int(mag or "1") * (1 if sign == "+" else -1)
                charged[(sym, charge)] = _parse_valences(parts[1], path, lineno)
            else:
                if len(parts) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 'El mass valences'")
                mass = float(parts[1])
                elements[key] = Element(key, _parse_valences(parts[2], path, lineno), mass)
        for sym, _ in charged:
            if sym not in elements:
                raise ValueError(f"{path}: charged entry for {sym} lacks a neutral line")
        return cls(elements, charged)


def _parse_valences(token: str, path, lineno) -> tuple[int, ...]:
    try:
        vals = tuple(sorted(int(t) for t in token.split(",")))
    except ValueError:
        raise ValueError(f"{path}:{lineno}: bad valence list {token!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise ValueError(f"{path}:{lineno}: bad valence list {token!r}")
    return vals
