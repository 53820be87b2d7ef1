"""
Contrat de circuit synchrone au cycle près et programme de stimulus associé.

Un circuit conserve toutes ses valeurs de signaux dans un dictionnaire chemin -> entier
masqué à la largeur du signal. Les sous-classes implémentent `_reset_state`, `_step`,
`done` et `outputs` ; la classe de base gère l'application des entrées, le forçage
d'entrées primaires et l'injection de basculements de bits.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, List, Mapping, Union

from src.models.signals import BitVec, SignalClass, SignalKind, SignalRef
from src.utils.errors import ConfigurationError

Value = Union[BitVec, int]


class StimulusProgram(ABC):
    """Banc de test : pilote les entrées primaires d'un circuit cycle par cycle."""

    @abstractmethod
    def reset(self) -> None:
        """Remet le banc de test dans son état initial."""

    @abstractmethod
    def drive(self, cycle: int, design: "Design") -> Dict[str, int]:
        """
        Calcule les entrées à appliquer pendant le prochain front d'horloge.

        Args:
            cycle: Numéro du cycle qui va être simulé (1 pour le premier front)
            design: Circuit piloté (lecture des sorties pré-front autorisée)

        Returns:
            Dictionnaire chemin d'entrée -> valeur
        """

    def settle(self, design: "Design") -> None:
        """Fait avancer le banc de test après le front (par défaut : rien)."""


class Design(ABC):
    """Circuit synchrone à pas d'horloge unique."""

    design_id: str = "design"

    def __init__(self, signals: Iterable[SignalRef]):
        self._signals: Dict[str, SignalRef] = {}
        for sig in signals:
            if sig.path in self._signals:
                raise ConfigurationError(f"Chemin de signal dupliqué : {sig.path}")
            self._signals[sig.path] = sig
        self._v: Dict[str, int] = {}
        self._forced: Dict[str, int] = {}
        self._inputs = [s for s in self._signals.values() if s.kind == SignalKind.PRIMARY_INPUT]

    # -- interface publique -------------------------------------------------

    def signals(self) -> List[SignalRef]:
        """Liste ordonnée des signaux déclarés."""
        return list(self._signals.values())

    def signal(self, path: str) -> SignalRef:
        """
        Résout un chemin en SignalRef.

        Raises:
            ConfigurationError: Si le chemin est inconnu
        """
        try:
            return self._signals[path]
        except KeyError:
            raise ConfigurationError(f"Signal inconnu pour {self.design_id} : {path}") from None

    def has_signal(self, path: str) -> bool:
        return path in self._signals

    def values(self) -> Mapping[str, int]:
        """Vue directe (lecture seule par convention) des valeurs courantes."""
        return self._v

    def reset(self) -> None:
        """Remet le circuit à l'état de reset et lève tous les forçages."""
        self._forced.clear()
        self._v = {path: 0 for path in self._signals}
        self._reset_state()

    def step(self, inputs: Mapping[Union[str, SignalRef], Value]) -> Dict[SignalRef, BitVec]:
        """
        Avance d'exactement un cycle d'horloge.

        Args:
            inputs: Valeurs des entrées primaires (absentes = 0)

        Returns:
            Valeurs post-front des sorties primaires
        """
        applied: Dict[str, int] = {}
        for sig in self._inputs:
            applied[sig.path] = 0
        for key, value in inputs.items():
            path = key.path if isinstance(key, SignalRef) else key
            sig = self.signal(path)
            raw = value.value if isinstance(value, BitVec) else int(value)
            applied[path] = raw & sig.mask()
        applied.update(self._forced)
        self._v.update(applied)
        self._step(applied)
        return {
            sig: BitVec(sig.width, self._v[sig.path])
            for sig in self._signals.values()
            if sig.kind == SignalKind.PRIMARY_OUTPUT
        }

    def read(self, sig: Union[str, SignalRef]) -> BitVec:
        """Lit la valeur courante d'un signal."""
        ref = self.signal(sig.path if isinstance(sig, SignalRef) else sig)
        return BitVec(ref.width, self._v[ref.path])

    def read_raw(self, path: str) -> int:
        return self._v[path]

    def flip_register_bit(self, sig: Union[str, SignalRef], bit: int) -> None:
        """
        Bascule (XOR) un bit d'un registre.

        Raises:
            ConfigurationError: Si le signal n'est pas un registre ou si le bit est hors largeur
        """
        ref = self.signal(sig.path if isinstance(sig, SignalRef) else sig)
        if not ref.injectable:
            raise ConfigurationError(f"{ref.path} n'est pas un registre injectable")
        if not 0 <= bit < ref.width:
            raise ConfigurationError(f"Bit {bit} hors de la largeur de {ref.path} ({ref.width})")
        self._v[ref.path] ^= 1 << bit
        self._after_flip(ref)

    def force_input(self, sig: Union[str, SignalRef], value: Value, active: bool) -> None:
        """
        Force (ou libère) une entrée primaire.

        Raises:
            ConfigurationError: Si le signal n'est pas une entrée primaire
        """
        ref = self.signal(sig.path if isinstance(sig, SignalRef) else sig)
        if not ref.forcible:
            raise ConfigurationError(f"{ref.path} n'est pas une entrée primaire")
        if active:
            raw = value.value if isinstance(value, BitVec) else int(value)
            self._forced[ref.path] = raw & ref.mask()
        else:
            self._forced.pop(ref.path, None)

    def control_registers(self) -> List[SignalRef]:
        """Registres de contrôle (cibles du Case 1)."""
        return [
            s for s in self._signals.values()
            if s.kind == SignalKind.REGISTER and s.sclass == SignalClass.CONTROL
        ]

    def primary_control_inputs(self) -> List[SignalRef]:
        """Entrées primaires de contrôle (cibles du Case 2)."""
        return [
            s for s in self._signals.values()
            if s.kind == SignalKind.PRIMARY_INPUT and s.sclass == SignalClass.CONTROL
        ]

    def case2_groups(self) -> List[List[SignalRef]]:
        """Groupes d'entrées perturbés ensemble en Case 2 (par défaut : un seul groupe)."""
        return [self.primary_control_inputs()]

    # -- à implémenter ------------------------------------------------------

    @abstractmethod
    def _reset_state(self) -> None:
        """Initialise les registres et recalcule les sorties combinatoires."""

    @abstractmethod
    def _step(self, inputs: Dict[str, int]) -> None:
        """Calcule l'état post-front à partir de l'état courant et des entrées."""

    @abstractmethod
    def done(self) -> bool:
        """Vrai une fois le traitement terminé (reste vrai ensuite)."""

    @abstractmethod
    def outputs(self) -> Any:
        """Enregistrement des sorties fonctionnelles produites jusqu'ici."""

    @abstractmethod
    def oracle_output(self, stimulus: StimulusProgram) -> Any:
        """Sortie de référence calculée par un modèle fonctionnel indépendant."""

    def output_count(self, record: Any) -> int:
        """Nombre d'éléments de sortie d'un enregistrement (pour la classification)."""
        return len(record)

    def format_outputs(self, record: Any) -> List[str]:
        """Rendu hexadécimal d'un enregistrement de sorties (un élément par ligne)."""
        lines = []
        for item in record:
            if isinstance(item, tuple):
                lines.append(":".join(f"{x:x}" for x in item))
            else:
                lines.append(f"{item:x}")
        return lines

    def _after_flip(self, ref: SignalRef) -> None:
        """Crochet appelé après un basculement (recalcul des sorties combinatoires)."""

    # -- aides aux sous-classes ---------------------------------------------

    def _set(self, path: str, value: int) -> None:
        self._v[path] = value & self._signals[path].mask()

    def _mask(self, path: str, value: int) -> int:
        return value & self._signals[path].mask()

