"""
Types de base des signaux : vecteurs de bits et références de signaux hiérarchiques.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

MAX_WIDTH = 128


class SignalKind(str, Enum):
    """Nature d'un signal dans la hiérarchie du circuit."""

    PRIMARY_INPUT = "primary-input"
    PRIMARY_OUTPUT = "primary-output"
    SUBMODULE_OUTPUT = "submodule-output"
    REGISTER = "register"
    WIRE = "wire"


class SignalClass(str, Enum):
    """Rôle d'un signal : contrôle ou donnée."""

    CONTROL = "control"
    DATA = "data"


# Niveau hiérarchique surveillé par nature de signal
LEVEL_OF_KIND = {
    SignalKind.PRIMARY_OUTPUT: 1,
    SignalKind.SUBMODULE_OUTPUT: 2,
    SignalKind.REGISTER: 3,
}


@dataclass(frozen=True, slots=True)
class BitVec:
    """Valeur non signée de largeur fixe (1 à 128 bits)."""

    width: int
    value: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"Largeur hors domaine : {self.width} (1..{MAX_WIDTH})")
        masked = self.value & ((1 << self.width) - 1)
        if masked != self.value:
            object.__setattr__(self, "value", masked)

    def bit(self, index: int) -> int:
        """Retourne le bit d'indice donné (0 = LSB)."""
        if not 0 <= index < self.width:
            raise IndexError(f"Bit {index} hors de la largeur {self.width}")
        return (self.value >> index) & 1

    def to_hex(self) -> str:
        """Représentation hexadécimale minuscule, complétée à la largeur."""
        digits = (self.width + 3) // 4
        return format(self.value, f"0{digits}x")

    @classmethod
    def from_hex(cls, width: int, text: str) -> "BitVec":
        """Construit un BitVec depuis une chaîne hexadécimale."""
        return cls(width, int(text, 16))


@dataclass(frozen=True, slots=True)
class SignalRef:
    """Référence unique d'un signal du circuit (chemin hiérarchique)."""

    path: str
    width: int
    kind: SignalKind
    sclass: SignalClass = SignalClass.CONTROL

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(
                f"Signal {self.path} : largeur {self.width} hors domaine (1..{MAX_WIDTH})"
            )

    @property
    def injectable(self) -> bool:
        """Un registre peut recevoir un basculement de bit."""
        return self.kind == SignalKind.REGISTER

    @property
    def forcible(self) -> bool:
        """Une entrée primaire peut être forcée par le moteur de fautes."""
        return self.kind == SignalKind.PRIMARY_INPUT

    @property
    def level(self) -> Optional[int]:
        """Niveau hiérarchique (1 sorties primaires, 2 sorties de sous-modules, 3 registres)."""
        return LEVEL_OF_KIND.get(self.kind)

    def mask(self) -> int:
        """Masque de largeur du signal."""
        return (1 << self.width) - 1

    def hex_digits(self) -> int:
        """Nombre de chiffres hexadécimaux pour sérialiser une valeur."""
        return (self.width + 3) // 4
