"""
Lecture et écriture des tables de séquences normales (.seq).

    selector=<description du sélecteur>
    width=<largeur de clé>
    end_present=<0|1>
    end_state=<hex|->
    prev,next
    -,<hex>
    <hex>,<hex>
"""
from pathlib import Path
from typing import Dict, Optional

from src.monitors.sequence import SENTINEL, SequenceTable
from src.utils.errors import ConfigurationError


def _hex(value: Optional[int], digits: int) -> str:
    return "-" if value is None else format(value, f"0{digits}x")


def serialize_table(table: SequenceTable) -> str:
    """Sérialise une table (paires triées, sentinelle en premier)."""
    digits = max((table.width + 3) // 4, 1)
    lines = [
        f"selector={table.selector_spec}",
        f"width={table.width}",
        f"end_present={0 if table.end_state is None else 1}",
        f"end_state={_hex(table.end_state, digits)}",
        "prev,next",
    ]
    for prev, nxt in table.sorted_pairs():
        lines.append(f"{_hex(prev, digits)},{_hex(nxt, digits)}")
    return "\n".join(lines) + "\n"


def parse_table(text: str, source: str = "<texte>") -> SequenceTable:
    """
    Analyse une table de séquences.

    Raises:
        ConfigurationError: Si l'en-tête ou une paire est mal formé
    """
    header: Dict[str, str] = {}
    pairs = set()
    in_pairs = False
    for i, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        try:
            if not in_pairs:
                if line.strip() == "prev,next":
                    in_pairs = True
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ConfigurationError(f"en-tête mal formé : {line}")
                header[key.strip()] = value.strip()
                continue
            prev_text, sep, next_text = line.strip().partition(",")
            if not sep or next_text == "-":
                raise ConfigurationError(f"paire mal formée : {line}")
            prev = SENTINEL if prev_text == "-" else int(prev_text, 16)
            pairs.add((prev, int(next_text, 16)))
        except ValueError as e:
            raise ConfigurationError(f"{source} Ligne {i}: {e}") from None

    for key in ("width", "end_present", "end_state"):
        if key not in header:
            raise ConfigurationError(f"{source} : en-tête `{key}` manquant")
    width = int(header["width"])
    end_state = None if header["end_present"] == "0" else int(header["end_state"], 16)
    limit = 1 << width
    for prev, nxt in pairs:
        if nxt >= limit or (prev is not None and prev >= limit):
            raise ConfigurationError(f"{source} : clé plus large que {width} bits")
    return SequenceTable(width, frozenset(pairs), end_state, header.get("selector", ""))


def load_table(path: Path) -> SequenceTable:
    """
    Charge une table depuis un fichier.

    Raises:
        FileNotFoundError: Si le fichier n'existe pas
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier introuvable : {path.absolute()}")
    return parse_table(path.read_text(encoding="utf-8"), source=str(path))


def save_table(table: SequenceTable, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_table(table), encoding="utf-8")
    return path
