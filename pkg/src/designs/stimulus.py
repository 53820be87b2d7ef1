"""
Fichiers de stimulus en CSV hexadécimal et générateur des jeux livrés.
Exécutable en tant que module : python -m src.designs.stimulus
"""
import csv
from pathlib import Path
from typing import List

from rich.console import Console

from src.utils.errors import ConfigurationError

console = Console(stderr=True)

CONV_ACTIVATIONS = "conv_activations.csv"
CONV_WEIGHTS = "conv_weights.csv"
GAUS_IMAGE = "gaus_image.csv"
AES_PLAINTEXTS = "aes_plaintexts.csv"

# vecteur de test FIPS-197 (annexe C.1), toujours en tête des blocs en clair
FIPS_PLAINTEXT = 0x00112233445566778899AABBCCDDEEFF
FIPS_KEY = 0x000102030405060708090A0B0C0D0E0F


def _rows(path: Path) -> List[List[str]]:
    if not path.exists():
        raise FileNotFoundError(f"Fichier introuvable : {path.absolute()}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        return [row for row in csv.reader(f) if row and not row[0].lstrip().startswith("#")]


def load_hex_matrix(path: Path, rows: int, cols: int, bits: int = 8,
                    signed: bool = False) -> List[List[int]]:
    """
    Charge une matrice d'entiers écrits en hexadécimal.

    Args:
        path: Fichier CSV (une ligne de matrice par ligne de fichier)
        rows: Nombre de lignes attendu
        cols: Nombre de colonnes attendu
        bits: Largeur des valeurs
        signed: Interprète les valeurs en complément à deux

    Returns:
        Matrice d'entiers

    Raises:
        FileNotFoundError: Si le fichier n'existe pas
        ConfigurationError: Si le contenu ne respecte pas les dimensions ou la largeur
    """
    path = Path(path)
    matrix = []
    errors = []
    for i, row in enumerate(_rows(path), start=1):
        try:
            values = [int(cell.strip(), 16) for cell in row]
        except ValueError as e:
            errors.append(f"Ligne {i}: {e}")
            continue
        if len(values) != cols:
            errors.append(f"Ligne {i}: {len(values)} valeurs au lieu de {cols}")
        if any(v >> bits for v in values):
            errors.append(f"Ligne {i}: valeur plus large que {bits} bits")
        if signed:
            values = [v - (1 << bits) if v >> (bits - 1) else v for v in values]
        matrix.append(values)
    if len(matrix) != rows:
        errors.append(f"{len(matrix)} lignes au lieu de {rows}")
    if errors:
        raise ConfigurationError(f"{path} invalide :\n" + "\n".join(errors[:10]))
    return matrix


def save_hex_matrix(path: Path, matrix: List[List[int]], bits: int = 8) -> None:
    """Écrit une matrice en hexadécimal (complément à deux pour les négatifs)."""
    digits = (bits + 3) // 4
    mask = (1 << bits) - 1
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in matrix:
            writer.writerow([f"{v & mask:0{digits}x}" for v in row])


def load_plaintexts(path: Path) -> List[int]:
    """
    Charge les blocs en clair AES (128 bits, un par ligne).

    Raises:
        FileNotFoundError: Si le fichier n'existe pas
        ConfigurationError: Si un bloc est mal formé ou si le fichier est vide
    """
    blocks = [row[0].strip() for row in _rows(Path(path))]
    values = []
    errors = []
    for i, text in enumerate(blocks, start=1):
        try:
            value = int(text, 16)
        except ValueError as e:
            errors.append(f"Ligne {i}: {e}")
            continue
        if value >> 128:
            errors.append(f"Ligne {i}: bloc plus large que 128 bits")
        values.append(value)
    if not values and not errors:
        errors.append("aucun bloc en clair")
    if errors:
        raise ConfigurationError(f"{path} invalide :\n" + "\n".join(errors[:10]))
    return values


def save_plaintexts(path: Path, blocks: List[int]) -> None:
    save_hex_matrix(path, [[b] for b in blocks], bits=128)


class StimulusGenerator:
    """Générateur déterministe des stimuli livrés (motifs arithmétiques paramétrés)."""

    def __init__(self, output_dir: str = "data/stimuli", seed: int = 1):
        """
        Initialise le générateur.

        Args:
            output_dir: Répertoire de sortie des fichiers CSV
            seed: Paramètre des motifs
        """
        self.output_dir = Path(output_dir)
        self.seed = seed

    def conv_activations(self) -> List[List[int]]:
        s = self.seed
        rows = []
        for r in range(8):
            raw = [(29 * r + 53 * c + 7 * s) % 256 for c in range(8)]
            rows.append([v - 256 if v >= 128 else v for v in raw])
        return rows

    def conv_weights(self) -> List[List[int]]:
        s = self.seed
        return [[(17 * k + 11 * t + 3 * s) % 15 - 7 for t in range(9)] for k in range(4)]

    def gaus_image(self) -> List[List[int]]:
        s = self.seed
        return [
            [(37 * x + 71 * y + 13 * s + (x * y) % 11 * 9) % 256 for x in range(16)]
            for y in range(12)
        ]

    def aes_plaintexts(self, count: int = 5) -> List[int]:
        blocks = [FIPS_PLAINTEXT]
        for i in range(1, count):
            data = bytes((41 * i + 23 * j + 5 * self.seed) % 256 for j in range(16))
            blocks.append(int.from_bytes(data, "big"))
        return blocks

    def save_all(self) -> List[Path]:
        """Écrit les quatre fichiers et retourne leurs chemins."""
        paths = [
            self.output_dir / CONV_ACTIVATIONS,
            self.output_dir / CONV_WEIGHTS,
            self.output_dir / GAUS_IMAGE,
            self.output_dir / AES_PLAINTEXTS,
        ]
        save_hex_matrix(paths[0], self.conv_activations())
        save_hex_matrix(paths[1], self.conv_weights())
        save_hex_matrix(paths[2], self.gaus_image())
        save_plaintexts(paths[3], self.aes_plaintexts())
        return paths


def main():
    """Point d'entrée : régénère les stimuli dans le répertoire configuré."""
    from src.utils.config import get_settings

    settings = get_settings()
    console.print(f"🔧 Génération des stimuli dans {settings.stimulus_dir}")
    for path in StimulusGenerator(settings.stimulus_dir).save_all():
        console.print(f"✅ {path}")


if __name__ == "__main__":
    main()
